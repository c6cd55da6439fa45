#!/usr/bin/env python3
"""External MILP backend: solve an LP-format file with scipy's HiGHS wrapper.

Usage: highs_backend.py <model.lp> <solution.sol>

Reads the LP dialect written by sfcplace (Minimize / Subject To / Binary /
End, one row per line, every coefficient written explicitly).  Writes the
solution-file contract expected by the external-backend protocol:
an ``=obj= <value>`` header followed by ``<name> <value>`` lines, or a
single ``=infeasible=`` line.
"""

import sys
from fractions import Fraction

import numpy as np
from scipy.optimize import Bounds
from scipy.optimize import LinearConstraint as ScipyConstraint
from scipy.optimize import milp


def parse_lp(text):
    """Parse the sfcplace LP dialect into (objective, rows, binaries, names).

    objective: {name: coeff}; rows: list of ({name: coeff}, sense, rhs).
    """
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    section = None
    objective = {}
    rows = []
    binaries = []
    pending = []  # token buffer for the objective, which may span lines

    def parse_terms(tokens):
        terms = {}
        sign = 1
        it = iter(tokens)
        for tok in it:
            if tok == "+":
                sign = 1
            elif tok == "-":
                sign = -1
            else:
                coeff = Fraction(tok)
                name = next(it)
                terms[name] = terms.get(name, Fraction(0)) + sign * coeff
                sign = 1
        return terms

    for line in lines:
        low = line.lower()
        if low in ("minimize", "maximize"):
            section = "obj"
            continue
        if low == "subject to":
            if pending:
                objective.update(parse_terms(pending))
                pending = []
            section = "rows"
            continue
        if low == "binary":
            section = "bin"
            continue
        if low == "end":
            break
        if section == "obj":
            if ":" in line:
                line = line.split(":", 1)[1]
            pending.extend(line.split())
        elif section == "rows":
            body = line.split(":", 1)[1] if ":" in line else line
            for sense in ("<=", ">=", "="):
                if f" {sense} " in body:
                    lhs, rhs = body.rsplit(f" {sense} ", 1)
                    rows.append((parse_terms(lhs.split()), sense, Fraction(rhs)))
                    break
            else:
                raise ValueError(f"row without sense: {line}")
        elif section == "bin":
            binaries.extend(line.split())
    if pending:
        objective.update(parse_terms(pending))
    names = []
    seen = set()
    for source in ([objective] + [r[0] for r in rows]):
        for name in source:
            if name not in seen:
                seen.add(name)
                names.append(name)
    for name in binaries:
        if name not in seen:
            seen.add(name)
            names.append(name)
    return objective, rows, binaries, names


def main():
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    lp_path, sol_path = sys.argv[1], sys.argv[2]
    with open(lp_path) as fh:
        objective, rows, binaries, names = parse_lp(fh.read())

    index = {name: i for i, name in enumerate(names)}
    n = len(names)
    c = np.zeros(n)
    for name, coeff in objective.items():
        c[index[name]] = float(coeff)

    a = np.zeros((len(rows), n))
    lo = np.full(len(rows), -np.inf)
    hi = np.full(len(rows), np.inf)
    for r, (terms, sense, rhs) in enumerate(rows):
        for name, coeff in terms.items():
            a[r, index[name]] = float(coeff)
        if sense in ("<=", "="):
            hi[r] = float(rhs)
        if sense in (">=", "="):
            lo[r] = float(rhs)

    integrality = np.zeros(n)
    lb = np.full(n, 0.0)
    ub = np.full(n, np.inf)
    for name in binaries:
        integrality[index[name]] = 1
        ub[index[name]] = 1.0

    res = milp(c=c, constraints=ScipyConstraint(a, lo, hi),
               integrality=integrality, bounds=Bounds(lb, ub))
    with open(sol_path, "w") as fh:
        if res.status == 2:  # proven infeasible
            fh.write("=infeasible=\n")
            return 0
        if not res.success:
            print(f"milp failed: {res.message}", file=sys.stderr)
            return 1
        fh.write(f"=obj= {float(res.fun)!r}\n")
        for name, value in zip(names, res.x):
            fh.write(f"{name} {float(value)!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())

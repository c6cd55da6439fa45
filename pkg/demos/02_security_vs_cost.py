"""Price of security: tighten one chain's minimum link-security level step
by step and watch the optimal deployment cost react.

Low requirements let chains spread across cheap links; high requirements
force co-location (intra-cloud hops always count as fully secure) or
migration onto the few well-protected links, until the instance tips into
infeasibility.

    python3 demos/02_security_vs_cost.py
"""

from dataclasses import replace

from sfcplace import Budget, GenConfig, generate, normalize_types, solve_scenario
from sfcplace.result import INFEASIBLE, OPTIMAL


def with_min_security(scenario, level):
    sfcs = tuple(replace(s, min_security=level) for s in scenario.sfcs)
    return replace(scenario, sfcs=sfcs)


def main():
    base = normalize_types(generate(GenConfig(n_clouds=4, n_sfcs=3, seed=2)))
    levels = sorted({p.security_level for p in base.topology.links.values()})
    print(f"link security levels in this topology: {levels}")
    print()
    print("min_security  status      cost  mean_delay_ms")
    budget = Budget(max_nodes=40_000)
    for level in range(1, base.s_max + 1):
        scenario = with_min_security(base, level)
        _, result, placement = solve_scenario(scenario, budget=budget)
        if result.status == OPTIMAL:
            delays = [m.total_delay for m in placement.sfcs]
            mean_delay = sum(delays) / len(delays)
            print(f"{level:>12}  {result.status:<10}  {str(result.objective):>4}"
                  f"  {float(mean_delay):.1f}")
        elif result.status == INFEASIBLE:
            print(f"{level:>12}  {result.status:<10}     -  -")
            break
        else:
            print(f"{level:>12}  {result.status:<10}  node budget exhausted")


if __name__ == "__main__":
    main()

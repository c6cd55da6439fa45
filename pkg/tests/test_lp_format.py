import importlib.util
import sys
from fractions import Fraction
from pathlib import Path

from sfcplace.ilp import SENSE_EQ, SENSE_GE, SENSE_LE, build_model
from sfcplace.model import normalize_types
from sfcplace.scenarios import GenConfig, generate
from tests.conftest import make_scenario


def load_backend_module():
    path = Path("tools/highs_backend.py")
    spec = importlib.util.spec_from_file_location("highs_backend", path)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def test_lp_text_roundtrips_through_parser():
    backend = load_backend_module()
    for seed in (0, 3):
        sc = normalize_types(generate(GenConfig(n_clouds=2, n_sfcs=2, seed=seed)))
        model = build_model(sc)
        objective, rows, binaries, names = backend.parse_lp(model.to_lp())
        reg = model.registry
        assert set(names) <= set(reg.names)
        assert len(binaries) == model.var_count("b")
        assert len(rows) == len(model.constraints)
        # every parsed row must match the source constraint exactly
        for (terms, sense, rhs), con in zip(rows, model.constraints):
            want = {reg.names[v]: Fraction(c) for c, v in con.terms}
            assert terms == want
            assert sense == con.sense and rhs == Fraction(con.rhs)
        # objective coefficients survive too
        for c, v in model.objective:
            assert objective.get(reg.names[v], 0) == Fraction(c)


def test_lp_fractional_coefficients():
    import copy
    from tests.conftest import TWO_CLOUD_TOPOLOGY
    topology = copy.deepcopy(TWO_CLOUD_TOPOLOGY)
    topology["links"][0]["delay_ms"] = 2.5
    sc = make_scenario(topology=topology)
    model = build_model(sc)
    text = model.to_lp()
    assert "2.5" in text
    backend = load_backend_module()
    _, rows, _, _ = backend.parse_lp(text)
    hop_rows = [r for r in rows if any(abs(c) == Fraction(5, 2) for c in r[0].values())]
    assert hop_rows


def test_senses_serialize():
    sc = make_scenario()
    model = build_model(sc)
    senses = {c.sense for c in model.constraints}
    assert senses == {SENSE_LE, SENSE_GE, SENSE_EQ}
    text = model.to_lp()
    assert " <= " in text and " >= " in text and " = " in text

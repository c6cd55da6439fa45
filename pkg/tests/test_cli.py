import copy
import json

from sfcplace.cli import main
from sfcplace.model import save_scenario
from sfcplace.scenarios import GenConfig, generate
from tests.conftest import CHAIN_SFCS, TWO_CLOUD_TOPOLOGY, make_scenario


def write_scenario(tmp_path, scenario):
    paths = [str(tmp_path / n) for n in ("topology.json", "sfcs.json", "flavors.json")]
    save_scenario(scenario, *paths)
    return paths


def scenario_args(paths):
    return ["--topology", paths[0], "--sfcs", paths[1], "--flavors", paths[2]]


def test_solve_optimal_exit_zero(tmp_path, capsys):
    paths = write_scenario(tmp_path, make_scenario())
    out = tmp_path / "solution.json"
    code = main(["solve", *scenario_args(paths), "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "status: optimal" in text
    assert "residual" in text
    doc = json.loads(out.read_text())
    assert doc["status"] == "optimal"
    assert doc["objective"] == 4  # two small flavors (fw + lb)
    assert doc["placement"]["total_cost"] == 4
    assert "wall_ms" not in doc["stats"]


def test_solve_json_stdout(tmp_path, capsys):
    paths = write_scenario(tmp_path, make_scenario())
    code = main(["solve", *scenario_args(paths), "--json"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "optimal"


def test_solve_reruns_byte_identical(tmp_path):
    paths = write_scenario(tmp_path, make_scenario())
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["solve", *scenario_args(paths), "--out", str(out1)]) == 0
    assert main(["solve", *scenario_args(paths), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_solve_infeasible_names_security(tmp_path, capsys):
    topology = copy.deepcopy(TWO_CLOUD_TOPOLOGY)
    for cloud in topology["clouds"]:
        cloud["capacity"] = {"cpu": 1, "ram": 1, "storage": 1}
    sfcs = copy.deepcopy(CHAIN_SFCS)
    sfcs[0]["min_security"] = 12
    paths = write_scenario(tmp_path, make_scenario(topology=topology, sfcs=sfcs))
    code = main(["solve", *scenario_args(paths)])
    assert code == 1
    text = capsys.readouterr().out
    assert "infeasib" in text
    assert "eq33" in text


def test_solve_timeout_exit_two(tmp_path):
    sc = generate(GenConfig(n_clouds=4, n_sfcs=4, seed=1))
    paths = write_scenario(tmp_path, sc)
    code = main(["solve", *scenario_args(paths), "--max-nodes", "500"])
    assert code == 2


def test_solve_dump_lp(tmp_path):
    paths = write_scenario(tmp_path, make_scenario())
    lp = tmp_path / "model.lp"
    assert main(["solve", *scenario_args(paths), "--dump-lp", str(lp)]) == 0
    text = lp.read_text()
    assert text.startswith("Minimize")
    assert "Binary" in text


def test_solve_input_error_exit_three(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = main(["solve", "--topology", str(bad), "--sfcs", str(bad), "--flavors", str(bad)])
    assert code == 3
    assert "input error" in capsys.readouterr().err


def test_solve_missing_file_exit_three(tmp_path):
    code = main(["solve", "--topology", "/nonexistent.json",
                 "--sfcs", "/nonexistent.json", "--flavors", "/nonexistent.json"])
    assert code == 3


def test_validate_ok_and_violations(tmp_path, capsys):
    paths = write_scenario(tmp_path, make_scenario())
    out = tmp_path / "solution.json"
    assert main(["solve", *scenario_args(paths), "--out", str(out)]) == 0
    assert main(["validate", *scenario_args(paths), "--solution", str(out)]) == 0
    assert "0 violations" in capsys.readouterr().out

    doc = json.loads(out.read_text())
    doc["placement"]["total_cost"] = 999
    out.write_text(json.dumps(doc))
    assert main(["validate", *scenario_args(paths), "--solution", str(out)]) == 1
    assert "[cost]" in capsys.readouterr().out


def test_gen_writes_loadable_scenario(tmp_path):
    code = main(["gen", "--clouds", "3", "--sfcs-count", "2", "--seed", "9",
                 "--out-dir", str(tmp_path)])
    assert code == 0
    code = main(["solve", "--topology", str(tmp_path / "topology.json"),
                 "--sfcs", str(tmp_path / "sfcs.json"),
                 "--flavors", str(tmp_path / "flavors.json"),
                 "--max-nodes", "50000"])
    assert code in (0, 1, 2)


def test_gen_env_seed(tmp_path, monkeypatch):
    monkeypatch.setenv("SFC_PLACER_SEED", "123")
    assert main(["gen", "--out-dir", str(tmp_path / "a")]) == 0
    assert main(["gen", "--seed", "123", "--out-dir", str(tmp_path / "b")]) == 0
    for name in ("topology.json", "sfcs.json", "flavors.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_sweep_outputs_and_rerun_identical(tmp_path):
    args = ["sweep", "--axis", "sfcs", "--points", "1,2", "--reps", "2",
            "--clouds", "3", "--seed", "3", "--max-nodes", "50000"]
    assert main(args + ["--out-dir", str(tmp_path / "r1")]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "r2")]) == 0
    for name in ("sweep_reps.csv", "sweep_summary.csv"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()
    header = (tmp_path / "r1" / "sweep_reps.csv").read_text().splitlines()[0]
    assert header == "axis_value,rep,seed,status,cost,mean_delay_ms,nodes_explored,wall_ms"

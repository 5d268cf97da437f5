import json

import numpy as np

from emrg.cli import main
from emrg.dataio import load_weights, read_logs
from emrg.graphs import LayeredShape
from emrg.measures import emergence_conv
from emrg.scaling import base_init
from emrg.verify import check_layered_vs_network


def write_spec(tmp_path, obj, name="net.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def write_config(tmp_path, **overrides):
    cfg = {
        "layers": [2, 6, 6, 3],
        "seeds": [0, 1],
        "epochs": 1,
        "alpha": 2.0,
        "lr": 0.01,
        "batch_size": 16,
        "dataset": {"classes": 3, "per_class": 30, "dim": 2, "spread": 0.3, "seed": 5},
    }
    cfg.update(overrides)
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(cfg))
    return str(path)


# --- emergence ---------------------------------------------------------------


def test_emergence_known_value(tmp_path, capsys):
    spec = write_spec(tmp_path, {"layers": [2, 3, 2], "profile": [1, 2, 2]})
    assert main(["emergence", spec]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[-1] == "8"


def test_emergence_profile_override(tmp_path, capsys):
    spec = write_spec(tmp_path, {"layers": [2, 3, 2], "profile": [1, 2, 2]})
    assert main(["emergence", spec, "--profile", "2,3,2"]) == 0
    assert capsys.readouterr().out.strip().splitlines()[-1] == "0"


def test_emergence_json(tmp_path, capsys):
    spec = write_spec(tmp_path, {"layers": [2, 3, 2], "profile": [1, 2, 2]})
    assert main(["emergence", spec, "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["emergence"] == "8"
    assert payload["layers"] == [2, 3, 2]
    assert sum(int(t["value"]) for t in payload["terms"]) == 8


def test_emergence_conv_filters(tmp_path, capsys):
    spec = write_spec(tmp_path, {"layers": [4, 4, 4], "profile": [2, 3, 3]})
    assert main(["emergence", spec, "--conv-filters", "4,5,4", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    expected = emergence_conv([4, 4, 4], [2, 3, 3], [4, 5, 4])
    assert payload["emergence"] == str(expected) == "39"


def test_emergence_missing_profile(tmp_path, capsys):
    spec = write_spec(tmp_path, {"layers": [2, 3, 2]})
    assert main(["emergence", spec]) == 1
    assert "profile" in capsys.readouterr().err


def test_emergence_bad_profile_exits_one(tmp_path, capsys):
    spec = write_spec(tmp_path, {"layers": [2, 3, 2]})
    assert main(["emergence", spec, "--profile", "9,9,9"]) == 1


def test_missing_spec_file_exits_one(tmp_path, capsys):
    assert main(["emergence", str(tmp_path / "absent.json")]) == 1


# --- pivot -------------------------------------------------------------------


def test_pivot_uniform(tmp_path, capsys):
    spec = write_spec(tmp_path, {"layers": [4, 4, 4, 4]})
    assert main(["pivot", spec, "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["pivot"] == 2
    assert payload["deltas"] == ["84", "16", "0", "-4"]


def test_pivot_bottleneck(tmp_path, capsys):
    spec = write_spec(tmp_path, {"layers": [8, 2, 2, 8]})
    assert main(["pivot", spec]) == 0
    assert capsys.readouterr().out.strip().splitlines()[-1] == "pivot: 3"


# --- init --------------------------------------------------------------------


def test_init_alpha_one_matches_base(tmp_path, capsys):
    spec = write_spec(tmp_path, {"layers": [3, 4, 2]})
    out = tmp_path / "w.emiw"
    rc = main(["init", spec, "--alpha", "1.0", "--seed", "7",
               "--base", "xavier_normal", "-o", str(out)])
    assert rc == 0
    ws = load_weights(out)
    ref = base_init(LayeredShape([3, 4, 2]), "xavier_normal", 7)
    for a, b in zip(ws.matrices, ref.matrices):
        assert np.array_equal(a.astype(np.float32), b.astype(np.float32))


def test_init_prints_multipliers(tmp_path, capsys):
    spec = write_spec(tmp_path, {"layers": [2, 2, 2, 2, 2, 2]})
    out = tmp_path / "w.emiw"
    assert main(["init", spec, "--alpha", "2.0", "-o", str(out)]) == 0
    text = capsys.readouterr().out
    assert "multipliers: 0.25 0.5 1 2 4" in text
    assert "exponent sum: 0" in text
    assert out.exists()


def test_init_recommended_alpha_note(tmp_path, capsys):
    spec = write_spec(tmp_path, {"layers": [3, 4, 2]})
    out = tmp_path / "w.emiw"
    assert main(["init", spec, "-o", str(out)]) == 0
    # two weight layers qualifies as shallow, so the strong default applies
    assert "recommended alpha = 10" in capsys.readouterr().out


def test_init_explicit_center(tmp_path, capsys):
    spec = write_spec(tmp_path, {"layers": [2, 2, 2, 2]})
    out = tmp_path / "w.emiw"
    rc = main(["init", spec, "--alpha", "2.0", "--pivot-center", "2.0",
               "--json", "-o", str(out)])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["multipliers"] == [0.5, 1.0, 2.0]
    assert payload["exponent_sum"] == 0.0


# --- experiment / report -----------------------------------------------------


def test_experiment_smoke(tmp_path, capsys):
    cfg = write_config(tmp_path)
    logdir = tmp_path / "logs"
    assert main(["experiment", cfg, "-o", str(logdir), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["summary"]) == 4  # 2 seeds x 2 arms
    records = read_logs(logdir / "experiment.jsonl")
    assert [(r.seed, r.arm) for r in records] == [
        (0, "base"), (0, "scaled"), (1, "base"), (1, "scaled")
    ]
    assert all(len(r.logs) == 2 for r in records)  # init eval + 1 epoch


def test_experiment_deterministic(tmp_path):
    cfg = write_config(tmp_path)
    summaries = []
    for name in ("a", "b"):
        logdir = tmp_path / name
        assert main(["experiment", cfg, "-o", str(logdir)]) == 0
        records = read_logs(logdir / "experiment.jsonl")
        summaries.append(
            [(r.seed, r.arm, r.logs[-1]["train_loss"], r.logs[-1]["emergence"])
             for r in records]
        )
    assert summaries[0] == summaries[1]


def test_experiment_zero_epochs(tmp_path, capsys):
    cfg = write_config(tmp_path, epochs=0, seeds=[0])
    logdir = tmp_path / "logs"
    assert main(["experiment", cfg, "-o", str(logdir), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert all(r["epoch1_loss"] is None for r in payload["summary"])


def test_experiment_bad_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"layers": [2, 3], "seeds": [0], "volume": 11}))
    assert main(["experiment", str(path), "-o", str(tmp_path / "logs")]) == 1


def test_report_csv(tmp_path, capsys):
    cfg = write_config(tmp_path, seeds=[0])
    logdir = tmp_path / "logs"
    assert main(["experiment", cfg, "-o", str(logdir)]) == 0
    capsys.readouterr()
    assert main(["report", str(logdir)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    header = lines[0].split(",")
    assert header[:4] == ["seed", "arm", "alpha", "epoch"]
    assert len(lines) == 1 + 2 * 2  # 2 runs x (init + 1 epoch)

    out_csv = tmp_path / "report.csv"
    assert main(["report", str(logdir), "-o", str(out_csv)]) == 0
    assert out_csv.read_text().strip().splitlines()[0] == lines[0]


# --- verify ------------------------------------------------------------------


def test_verify_cli_passes(capsys):
    assert main(["verify", "--trials", "40", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload and all(r["passed"] for r in payload)


def test_verify_battery_catches_mutant():
    def off_by_one(shape, profile):
        from emrg.measures import emergence_layered

        return emergence_layered(shape, profile) + 1

    result = check_layered_vs_network(trials=40, layered_impl=off_by_one)
    assert not result.passed
    assert result.counterexample is not None

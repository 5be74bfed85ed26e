"""End-to-end CLI runs: exit codes and written artifacts."""
import json
import math

import pytest

from main import main
from src.asymptotics import constants_from_values, predict_blowup
from src.config import config
from src.export import CURVATURE_COLUMNS, SCHEMA_MODELS, load_record
from src.geometry import boundary_point
from src.models.schemas import CurvatureMaxima, CurvatureMaximum, DomainSpec, ScalingScan
from src.pipeline import VerificationPipeline

BALL = DomainSpec(kind="ball")


def _write_config(tmp_path, **fields):
    document = {"name": "test", "domain": {"kind": "ball"}}
    document.update(fields)
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


def test_specialfn_range_beyond_underflow_is_config_error(tmp_path):
    assert main(["verify-specialfn", "--rmax", "1000", "--out", str(tmp_path)]) == 2


def test_malformed_json_reports_position(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"domain": {"kind": "ball"},\n  "beta": }', encoding="utf-8")
    assert main(["curvature", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_invalid_experiment_rejected(tmp_path):
    config_path = _write_config(tmp_path, lambda_grid=[2.0, 100.0])
    assert main(["curvature", "--config", config_path, "--out", str(tmp_path)]) == 2


def test_missing_config_file(tmp_path):
    assert main(["curvature", "--config", str(tmp_path / "absent.json")]) == 2


def test_unknown_subcommand_exits_with_config_code():
    with pytest.raises(SystemExit) as exc:
        main(["integrate-everything"])
    assert exc.value.code == 2


def test_bad_lambda_grid_flag(tmp_path):
    config_path = _write_config(tmp_path)
    assert main(["curvature", "--config", config_path, "--lambda-grid", "2,100", "--out", str(tmp_path)]) == 2


def test_predict_on_ball_fails_hypothesis(tmp_path):
    config_path = _write_config(tmp_path, constants={"c0": 13.16, "c1": 3.0, "c2": 19.74})
    assert main(["predict", "--config", config_path, "--out", str(tmp_path / "out")]) == 5
    assert not (tmp_path / "out" / "prediction.json").exists()


def test_fit_constants_single_point_is_rank_deficient(tmp_path):
    config_path = _write_config(tmp_path, boundary_points=[[1.0, 0.0, 0.0, 0.0]])
    assert main(["fit-constants", "--config", config_path, "--out", str(tmp_path)]) == 2


def test_fit_constants_without_points(tmp_path):
    config_path = _write_config(tmp_path)
    assert main(["fit-constants", "--config", config_path, "--out", str(tmp_path)]) == 2


def test_schemas_written(tmp_path):
    assert main(["schemas", "--out", str(tmp_path)]) == 0
    for name in SCHEMA_MODELS:
        schema = json.loads((tmp_path / f"{name}.schema.json").read_text(encoding="utf-8"))
        assert schema["type"] == "object"


def test_curvature_on_ball_is_deterministic(tmp_path):
    config_path = _write_config(tmp_path)
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["curvature", "--config", config_path, "--out", str(first)]) == 0
    assert main(["curvature", "--config", config_path, "--out", str(second), "--json", str(tmp_path / "max.json")]) == 0

    csv_bytes = (first / "curvature.csv").read_bytes()
    assert csv_bytes == (second / "curvature.csv").read_bytes()
    header = csv_bytes.decode("utf-8").splitlines()[0]
    assert header.split(",") == CURVATURE_COLUMNS

    maxima = load_record(first / "curvature_maxima.json", CurvatureMaxima)
    assert maxima.constant_curvature
    assert maxima.maxima == []
    assert load_record(tmp_path / "max.json", CurvatureMaxima) == maxima


def test_failed_invariant_exits_with_one(tmp_path):
    runtime = tmp_path / "strict.yaml"
    runtime.write_text("specialfn:\n  ode_rel_tol: 1.0e-300\n", encoding="utf-8")
    original = config.config_path
    try:
        code = main(["verify-specialfn", "--config-yaml", str(runtime), "--out", str(tmp_path)])
    finally:
        config.reload(original)
    assert code == 1
    report = json.loads((tmp_path / "specialfn_report.json").read_text(encoding="utf-8"))
    assert not report["is_valid"]


@pytest.mark.parametrize("consistent, code", [(False, 1), (True, 0), (None, 0)])
def test_predict_exit_code_follows_cross_check(tmp_path, monkeypatch, consistent, code):
    constants = constants_from_values(4.0 * math.pi ** 2 / 3.0, 3.0, 2.0 * math.pi ** 2)
    maxima = CurvatureMaxima(
        maxima=[CurvatureMaximum(point=boundary_point(BALL, [s, 0.0, 0.0, 0.0]), h=1.0) for s in (1.0, -1.0)],
        h_min=1.0, h_max=1.0, n_seeds=10,
    )
    record = predict_blowup(BALL, 1e4, 1.0, constants, maxima=maxima, cross_validate=False)
    record = record.model_copy(update={"consistent": consistent, "agreement": 0.3, "d_direct": record.d_star})
    monkeypatch.setattr(VerificationPipeline, "predict", lambda self, lam=None: record)
    config_path = _write_config(tmp_path, constants={"c0": 13.16, "c1": 3.0, "c2": 19.74})
    assert main(["predict", "--config", config_path, "--out", str(tmp_path)]) == code


def test_uncoupled_scan_is_exactly_zero_and_repeatable(tmp_path):
    config_path = _write_config(tmp_path, beta=0.0)
    first, second = tmp_path / "a", tmp_path / "b"
    for out in (first, second):
        assert main(["scaling", "--config", config_path, "--quantity", "coupling", "--out", str(out)]) == 0

    scan = load_record(first / "scaling_coupling.json", ScalingScan)
    assert [row["coupling"] for row in scan.rows] == [0.0] * len(scan.lambda_grid)
    assert "vanishes" in scan.terms[0].notice
    for name in ("scaling_coupling.csv", "scaling_coupling.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


@pytest.mark.slow
def test_scaling_output_independent_of_threads(tmp_path):
    config_path = _write_config(tmp_path)
    serial, threaded = tmp_path / "serial", tmp_path / "threaded"
    code = main(["scaling", "--config", config_path, "--quantity", "wnorm", "--threads", "1", "--out", str(serial)])
    assert main(["scaling", "--config", config_path, "--quantity", "wnorm", "--threads", "4",
                 "--out", str(threaded)]) == code
    for name in ("scaling_wnorm.csv", "scaling_wnorm.json"):
        assert (serial / name).read_bytes() == (threaded / name).read_bytes()

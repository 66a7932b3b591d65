import json
import os
import signal
import subprocess
import sys
import time
from importlib import resources

import jsonschema
import pytest

from epbounds import cli
from epbounds.cli import EXIT_COUNTEREXAMPLE, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE, UsageError, main, parse_inline
from epbounds.sieve import read_checkpoints


@pytest.fixture(autouse=True)
def _ckpt_dir(tmp_path, monkeypatch):
    d = tmp_path / "ckpt"
    monkeypatch.setenv("EPB_CHECKPOINT_DIR", str(d))
    return d


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def schema(name):
    return json.loads(resources.files("epbounds").joinpath(f"data/schemas/{name}.schema.json").read_text())


def test_verify_exit_codes(capsys):
    code, out, _ = run(capsys, "verify", "--ineq", "thm103", "--from", "48", "--to", "1e6")
    assert code == EXIT_OK
    doc = json.loads(out)
    jsonschema.validate(doc, schema("report"))
    assert doc["status"] == "verified"

    code, out, _ = run(capsys, "verify", "--ineq", "cor801:1.08366", "--from", "1526600", "--to", "1526671")
    assert code == EXIT_COUNTEREXAMPLE
    assert json.loads(out)["witness"] is not None

    code, _, _ = run(capsys, "verify", "--ineq", "thm103", "--from", "1", "--to", "47")
    assert code == EXIT_COUNTEREXAMPLE


def test_verify_default_from_and_csv(capsys):
    code, out, _ = run(capsys, "--format", "csv", "verify", "--ineq", "prop502", "--to", "1e6")
    assert code == EXIT_OK
    header, row = out.strip().splitlines()
    assert header.startswith("ineq_id,x_lo,x_hi,status")
    assert row.startswith("prop502,467497")


def test_verify_inline_bounds(capsys, tmp_path):
    out_file = tmp_path / "r.json"
    code, _, _ = run(capsys, "verify", "--bound", "eta:4,57.184@1091159", "--to", "3e6", "--out", str(out_file))
    assert code == EXIT_OK and json.loads(out_file.read_text())["ineq_id"] == "inline"
    code, _, _ = run(capsys, "verify", "--bound", "gap:198.2,4", "--from", "2", "--to", "1e5")
    assert code == EXIT_OK
    code, _, _ = run(capsys, "verify", "--bound", "series-lower:1,1,2,6@10384261", "--to", "2e7")
    assert code == EXIT_OK


def test_parse_inline():
    b = parse_inline("rational:1,1,3.024334@48")
    assert b.direction == "upper" and b.x0 == 48
    assert parse_inline("rational-lower:1,1,3").direction == "lower"
    assert parse_inline("eta:4,57.184@1091159").x1 == 1_091_159
    for bad in ("rational", "rational:", "rational:1,x", "blob:1,2", "rational-sideways:1", "eta:1", "eta:0,1"):
        with pytest.raises(UsageError):
            parse_inline(bad)


def test_usage_errors(capsys):
    assert run(capsys, "verify", "--ineq", "nope", "--to", "1e6")[0] == EXIT_USAGE
    assert run(capsys, "verify", "--ineq", "thm103", "--bound", "rational:1", "--to", "1e6")[0] == EXIT_USAGE
    assert run(capsys, "verify", "--ineq", "thm103", "--from", "100", "--to", "50")[0] == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--ineq", "thm103"])
    assert exc.value.code == EXIT_USAGE


def test_extended_refusal(capsys):
    code, _, err = run(capsys, "verify", "--ineq", "thm103", "--to", "1e11")
    assert code == EXIT_USAGE and "--extended" in err


def test_crossing(capsys):
    code, out, _ = run(capsys, "crossing", "--ineq", "cor801:1.099")
    assert code == EXIT_OK
    doc = json.loads(out)
    jsonschema.validate(doc, schema("crossing"))
    assert doc["smallest_N"] == 60_224
    code, _, _ = run(capsys, "crossing", "--ineq", "cor801:1.08366", "--hint-lo", "1.6e6", "--hint-hi", "2e6")
    assert code == EXIT_INCONCLUSIVE


def test_constants(capsys):
    code, out, _ = run(capsys, "constants", "--x", "1e6")
    assert code == EXIT_OK
    doc = json.loads(out)
    jsonschema.validate(doc, schema("constants"))
    assert abs(doc["B_hat"] - 0.26149) < 1e-3
    code, out, _ = run(capsys, "--format", "text", "constants", "--x", "10")
    assert code == EXIT_OK and "sum_recip: 1.17619" in out


def test_catalog(capsys):
    code, out, _ = run(capsys, "catalog", "--export", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    jsonschema.validate(doc, schema("catalog"))
    assert len(doc) >= 80


def test_identity(capsys):
    code, out, _ = run(capsys, "identity", "--which", "eq1.7", "--x", "1e5")
    assert code == EXIT_OK
    doc = json.loads(out)
    jsonschema.validate(doc, schema("identity"))
    assert doc["relative"] < 1e-8


def test_sieve_checkpoint_and_reuse(capsys, _ckpt_dir, tmp_path):
    csv_path = tmp_path / "c.csv"
    code, _, _ = run(capsys, "sieve-checkpoint", "--to", "3e6", "--step", "1e6", "--csv", str(csv_path))
    assert code == EXIT_OK
    path = _ckpt_dir / "step1000000.epbc"
    step, recs = read_checkpoints(path)
    assert step == 10**6 and [r.pi for r in recs] == [78498, 148933, 216816]
    assert csv_path.read_text().splitlines()[1].startswith("1000000,78498,")
    # resume extends the same file
    code, _, _ = run(capsys, "sieve-checkpoint", "--to", "4e6", "--step", "1e6", "--resume")
    assert code == EXIT_OK and len(read_checkpoints(path)[1]) == 4
    # the checkpoint directory is picked up by later commands
    cfg = cli.RunConfig(1, cli.S.DEFAULT_SEGMENT, None, "json", False)
    assert cli.make_sieve(cfg, 1e7).checkpoints


def test_run_config_validation():
    with pytest.raises(UsageError):
        cli.RunConfig(0, cli.S.DEFAULT_SEGMENT, None, "json", False)
    with pytest.raises(UsageError):
        cli.RunConfig(1, 7, None, "json", False)


def test_module_entry_point_help():
    r = subprocess.run([sys.executable, "-m", "epbounds", "--help"], capture_output=True, text=True, timeout=120)
    assert r.returncode == 0
    for sub in ("verify", "crossing", "constants", "catalog", "identity", "sieve-checkpoint"):
        assert sub in r.stdout


def test_ctrl_c_leaves_valid_checkpoint(tmp_path):
    out = tmp_path / "big.epbc"
    env = dict(os.environ, EPB_CHECKPOINT_DIR=str(tmp_path))
    proc = subprocess.Popen([sys.executable, "-m", "epbounds", "--threads", "1", "--extended", "sieve-checkpoint",
                             "--to", "1e11", "--step", "1e8", "--out", str(out)],
                            stdout=subprocess.PIPE, stderr=subprocess.PIPE, env=env)
    deadline = time.time() + 120
    while time.time() < deadline and proc.poll() is None and (not out.exists() or out.stat().st_size < 200):
        time.sleep(0.2)
    proc.send_signal(signal.SIGINT)
    _, err = proc.communicate(timeout=120)
    assert proc.returncode == 130, err
    step, recs = read_checkpoints(out)
    assert step == 10**8 and 0 < len(recs) < 1000
    assert recs[0].pi == 5_761_455

import csv
import json
import math
import os

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primerace import __version__
from primerace.cli import EXIT_RESOURCE, EXIT_VALIDATION, clean, main
from primerace.config import RunConfig
from primerace.errors import ValidationError


def run_cli(args, capsys):
    status = main(args)
    out = capsys.readouterr()
    return status, (json.loads(out.out) if status == 0 else None), out.err


configs = st.builds(
    RunConfig,
    command=st.sampled_from(["race", "counts", "lpoly"]),
    mode=st.sampled_from(["ff", "classical"]),
    field=st.sampled_from([None, "3^1", "2^2"]),
    modulus=st.sampled_from([None, "t^2+1", "1,0,1"]),
    classes=st.sampled_from([None, "1,t+1", "3,1"]),
    k_max=st.integers(1, 10**6),
    samples=st.integers(1, 10**8),
    seed=st.integers(0, 2**63),
    eps=st.floats(1e-6, 0.5),
    omega=st.one_of(st.none(), st.integers(0, 9)),
    omega_mod2=st.booleans(),
    threads=st.integers(1, 64),
)


@settings(max_examples=60, deadline=None)
@given(configs)
def test_config_round_trip(cfg):
    assert RunConfig.from_text(cfg.to_text()) == cfg


def test_config_errors_name_the_field(tmp_path):
    with pytest.raises(ValidationError, match="samples"):
        RunConfig.from_text("samples = many\n")
    with pytest.raises(ValidationError, match="unknown key"):
        RunConfig.from_text("colour = blue\n")
    with pytest.raises(ValidationError, match="k_max"):
        RunConfig(field="3", modulus="t", k_max=0).validate()


def test_flag_overrides_config(tmp_path, capsys):
    p = tmp_path / "run.cfg"
    RunConfig(command="counts", field="3^1", modulus="t", k_max=3).save(str(p))
    status, rep, _ = run_cli(["counts", "--config", str(p), "--kmax", "2"], capsys)
    assert status == 0
    assert rep["config"]["k_max"] == 2 and rep["result"]["pi"]["1"] == [1, 2]


def test_race_example(capsys):
    status, rep, _ = run_cli(["race", "--field", "3^1", "--modulus", "t", "--classes", "2,1", "--kmax", "12",
                              "--samples", "2000"], capsys)
    assert status == 0
    res = rep["result"]
    counts = res["empirical"]["exact_counts"]
    assert counts["1"][1] == 2 and counts["2"][1] == 3
    assert res["checks"]["count_conservation_gap"] == 0
    assert "no critical zeros: E is eventually one-sided" in res["notes"]
    assert rep["seed"] == 0 and rep["version"] == __version__
    assert rep["certificates"]["height_H"] == 10**6


def test_missing_modulus(capsys):
    status, _, err = run_cli(["race", "--field", "3^1", "--classes", "2,1"], capsys)
    assert status == EXIT_VALIDATION and "modulus" in err


def test_resource_exit(capsys):
    status, _, err = run_cli(["counts", "--field", "3", "--modulus", "t", "--kmax", "40"], capsys)
    assert status == EXIT_RESOURCE


def test_bad_zero_file(tmp_path, capsys):
    p = tmp_path / "z.csv"
    p.write_text("chi_label,gamma,multiplicity\nchi4,-3,1\n")
    status, _, err = run_cli(["hypothesis", "--mode", "classical", "--zeros", str(p)], capsys)
    assert status == EXIT_VALIDATION and "gamma" in err


def test_lpoly_and_zeros(capsys, tmp_path):
    status, rep, _ = run_cli(["lpoly", "--field", "3", "--modulus", "t^2+1"], capsys)
    assert status == 0 and len(rep["result"]["l_polynomials"]) == 7
    status, rep, _ = run_cli(["zeros", "--field", "3", "--modulus", "t^2+1", "--out", str(tmp_path)], capsys)
    assert status == 0 and rep["result"]["max_rh_deviation"] < 1e-9
    assert os.path.exists(tmp_path / "zeros.csv")


def test_meta_block_separate(tmp_path, capsys):
    args = ["counts", "--field", "3", "--modulus", "t", "--kmax", "4", "--out", str(tmp_path)]
    run_cli(args, capsys)
    meta = json.load(open(tmp_path / "counts.meta.json"))
    assert "timestamp" in meta
    assert "timestamp" not in open(tmp_path / "counts.json").read()


def test_float_digits():
    assert clean(math.pi) == 3.14159265359
    assert clean({"a": (1 / 3, 2)}) == {"a": [0.333333333333, 2]}


@pytest.fixture(scope="module")
def plot_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("plot")
    status = main(["plotdata", "--field", "3", "--modulus", "t^2+1", "--classes", "1,t+1", "--kmax", "3000",
                   "--samples", "20000", "--radii", "1:50:12", "--out", str(out)])
    assert status == 0
    return out


def read(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(x) for x in r] for r in rows[1:]]


def test_plot_running_density(plot_dir):
    head, rows = read(plot_dir / "running_density.csv")
    assert head == ["X", "running_density"]
    xs = [r[0] for r in rows]
    assert all(b > a for a, b in zip(xs, xs[1:]))


def test_plot_scan_bounded(plot_dir):
    head, rows = read(plot_dir / "fourier_scan.csv")
    assert head[0] == "r" and head[-1] == "abs"
    assert all(math.hypot(r[-3], r[-2]) <= 1 + 1e-6 for r in rows)


def test_plot_histogram_mass(plot_dir):
    head, rows = read(plot_dir / "histogram.csv")
    assert head == ["coord", "bin_lo", "bin_hi", "mass"]
    assert abs(sum(r[3] for r in rows if r[0] == 1) - 1) <= 1e-9


def test_plot_trajectories(plot_dir):
    head, rows = read(plot_dir / "trajectories.csv")
    assert head == ["x", "E_1"] and len(rows) == 3000

"""Command-line surface, configuration and the eigenmode cache."""

import csv
import io
import json
import os

import numpy as np
import pytest

from ypqwave.cache import CacheKey, cache_get_or_solve
from ypqwave.cli import run
from ypqwave.config import parse_config
from ypqwave.errors import ConfigError
from ypqwave.geometry import profile_h, solve_geometry
from ypqwave.radial import radial_problem, solve_radial


class TestGeometryCommand:
    def test_json_output_invariants(self, capsys):
        assert run(["geometry", "--p", "2", "--q", "3", "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["p"] == 2 and payload["q"] == 3
        a, ym, yp = payload["a"], payload["y_minus"], payload["y_plus"]
        assert ym < 0.0 < yp
        hm, hp = profile_h(ym, a), profile_h(yp, a)
        assert abs((hm - hp) / (2 * hm) - 2.0 / 3.0) < 1e-12
        assert payload["tau"] > 0.0
        assert payload["sigma"] == 6

    def test_json_round_trip_one_ulp(self, capsys):
        run(["geometry", "--p", "3", "--q", "4", "--json"])
        payload = json.loads(capsys.readouterr().out)
        gp = solve_geometry(3, 4)
        for name in ("a", "y_minus", "y_plus", "tau"):
            assert payload[name] == getattr(gp, name)

    def test_invalid_label_exit_1(self, capsys):
        assert run(["geometry", "--p", "2", "--q", "5"]) == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_unknown_flag_exit_2(self, capsys):
        assert run(["geometry", "--p", "2", "--q", "3", "--bogus"]) == 2

    def test_unknown_command_exit_2(self, capsys):
        assert run(["frobnicate"]) == 2


class TestTableCommands:
    def test_angular_csv(self, capsys):
        assert run(["angular", "--n", "1", "--m", "0", "--jmax", "2"]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert [r["j"] for r in rows] == ["0", "1", "2"]
        assert float(rows[0]["lambda"]) == 2.0

    def test_radial_with_oracle(self, capsys):
        assert run(["radial", "--p", "2", "--q", "3", "--m", "1", "--l", "0",
                    "--Lambda", "6", "--kmax", "1", "--nbasis", "24",
                    "--oracle"]) == 0
        out = capsys.readouterr().out
        body = "\n".join(line for line in out.splitlines()
                         if not line.startswith("#"))
        rows = list(csv.DictReader(io.StringIO(body)))
        for row in rows:
            rel = abs(float(row["ell"]) - float(row["oracle_ell"])) \
                / max(1.0, float(row["ell"]))
            assert rel < 1e-6

    def test_spectrum_sorted(self, capsys):
        assert run(["spectrum", "--p", "2", "--q", "3", "--nmax", "1",
                    "--mmax", "0", "--lmax", "0", "--kmax", "1", "--jmax", "1",
                    "--nbasis", "20"]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        lams = [float(r["lambda"]) for r in rows]
        assert lams == sorted(lams)
        assert lams[0] == pytest.approx(0.0, abs=1e-12)

    def test_ads_modes(self, capsys):
        assert run(["ads-modes", "--beta1", "0", "--c", "2.0",
                    "--imax", "2"]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert [float(r["omega"]) for r in rows] == [16.0, 36.0, 64.0]
        assert all(float(r["norm_residual"]) < 1e-10 for r in rows)


CONFIG_TEMPLATE = """
schema_version = 1
p = 2
q = 3
M = 1.0
kappa = 1.0
s1_max = 0
n_max = 1
i_max = 2
n_basis = 16
grid_x = 16
grid_t1 = 6
grid_t2 = 6
grid_theta = 8
grid_y = 16
times = 0.0, 1.0
phi0_coef = 0 0 0 0 0 0 0 0 0 : 1.0 : 0.0
phi0_coef = 0 0 0 1 0 0 0 0 1 : 0.0 : 0.5
out_format = csv
"""


class TestConfig:
    def test_parse(self):
        cfg = parse_config(CONFIG_TEMPLATE)
        assert cfg.p == 2 and cfg.q == 3
        assert cfg.times == [0.0, 1.0]
        assert len(cfg.phi0_coefs) == 2
        assert cfg.grid_shape == (16, 6, 6, 8, 16)

    def test_missing_schema(self):
        with pytest.raises(ConfigError, match="schema_version"):
            parse_config("p = 2\nq = 3\n")

    def test_line_precise_errors(self):
        with pytest.raises(ConfigError, match="line 3"):
            parse_config("schema_version = 1\np = 2\nq = oops\n")
        with pytest.raises(ConfigError, match="line 4"):
            parse_config("schema_version = 1\np = 2\nq = 3\nwhat = 1\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("schema_version = 1\np = 2\np = 3\nq = 3\n")

    def test_validation(self):
        with pytest.raises(ConfigError, match="kappa"):
            parse_config(CONFIG_TEMPLATE.replace("kappa = 1.0",
                                                 "kappa = -2.0"))
        with pytest.raises(ConfigError, match="no data"):
            parse_config("schema_version = 1\np = 2\nq = 3\n")


class TestPropagate:
    def test_end_to_end(self, tmp_path, capsys):
        cfg_path = tmp_path / "run.cfg"
        out_dir = tmp_path / "out"
        cfg_path.write_text(CONFIG_TEMPLATE
                            + f"out_dir = {out_dir}\n"
                            + f"cache_dir = {tmp_path / 'cache'}\n")
        assert run(["propagate", "--config", str(cfg_path)]) == 0
        capsys.readouterr()
        files = sorted(os.listdir(out_dir))
        assert "energy_trace.csv" in files
        assert any(f.startswith("field_t0") for f in files)
        with open(out_dir / "energy_trace.csv", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        # conservation through the pipeline: per-mode energy equal at the
        # two output times
        by_key = {}
        for row in rows:
            key = tuple(row[c] for c in ("s1", "s2", "s3", "n", "m", "l",
                                         "k", "j", "i"))
            by_key.setdefault(key, []).append(float(row["energy"]))
        for vals in by_key.values():
            assert vals[0] == pytest.approx(vals[1], rel=1e-12)

    def test_cache_transparency(self, tmp_path, capsys):
        # identical outputs with and without the cache, bitwise
        outs = []
        for tag, cache_line in (("a", ""), ("b", "cache_dir = {}\n"),
                                ("c", "cache_dir = {}\n")):
            out_dir = tmp_path / f"out_{tag}"
            cfg = CONFIG_TEMPLATE + f"out_dir = {out_dir}\n"
            if cache_line:
                cfg += cache_line.format(tmp_path / "shared_cache")
            path = tmp_path / f"run_{tag}.cfg"
            path.write_text(cfg)
            assert run(["propagate", "--config", str(path)]) == 0
            capsys.readouterr()
            with open(out_dir / "field_t1.csv", "rb") as fh:
                outs.append(fh.read())
        assert outs[0] == outs[1] == outs[2]

    def test_json_output(self, tmp_path, capsys):
        cfg = (CONFIG_TEMPLATE.replace("out_format = csv", "out_format = json")
               .replace("times = 0.0, 1.0", "times = 0.5")
               + f"out_dir = {tmp_path / 'out'}\n")
        path = tmp_path / "run.cfg"
        path.write_text(cfg)
        assert run(["propagate", "--config", str(path)]) == 0
        capsys.readouterr()
        with open(tmp_path / "out" / "field_t0p5.json", encoding="utf-8") as fh:
            payload = json.load(fh)
        sector = payload["sectors"][0]
        nx, n1, n2, nth, ny = sector["shape"]
        assert len(sector["re"]) == nx * n1 * n2 * nth * ny
        for axis, count in (("x", nx), ("theta1", n1), ("theta2", n2),
                            ("theta", nth), ("y", ny)):
            assert len(sector[axis]) == count

    def test_preset_runs(self, tmp_path, capsys):
        cfg = (CONFIG_TEMPLATE.replace("phi0_coef = 0 0 0 0 0 0 0 0 0 : 1.0 : 0.0\n", "")
               .replace("phi0_coef = 0 0 0 1 0 0 0 0 1 : 0.0 : 0.5\n", "")
               + "preset = gaussian_x\n"
               + f"out_dir = {tmp_path / 'out'}\n")
        path = tmp_path / "run.cfg"
        path.write_text(cfg)
        # the bump profile is not band-limited, so the tail warning fires
        import pytest as _pytest
        from ypqwave.propagator import TruncationWarning
        with _pytest.warns(TruncationWarning):
            assert run(["propagate", "--config", str(path)]) == 0
        capsys.readouterr()
        assert (tmp_path / "out" / "energy_trace.csv").exists()


class TestCache:
    def test_hit_skips_solver(self, tmp_path, gp23):
        prob = radial_problem(gp23, 1, 0, 2.0)
        calls = {"n": 0}

        def solve():
            calls["n"] += 1
            return solve_radial(prob, 1, 16)

        key = CacheKey(p=2, q=3, sigma_rule="prose", m=1, l=0,
                       lambda_cap=2.0, n_basis=16)
        first = cache_get_or_solve(key, solve, str(tmp_path), min_modes=2)
        second = cache_get_or_solve(key, solve, str(tmp_path), min_modes=2)
        assert calls["n"] == 1
        for a, b in zip(first, second):
            assert a.ell == b.ell
            assert np.array_equal(a.coeffs, b.coeffs)

    def test_distinct_nbasis_entries(self, tmp_path, gp23):
        prob = radial_problem(gp23, 1, 0, 2.0)
        k16 = CacheKey(p=2, q=3, sigma_rule="prose", m=1, l=0,
                       lambda_cap=2.0, n_basis=16)
        k20 = CacheKey(p=2, q=3, sigma_rule="prose", m=1, l=0,
                       lambda_cap=2.0, n_basis=20)
        assert k16.filename() != k20.filename()
        cache_get_or_solve(k16, lambda: solve_radial(prob, 1, 16),
                           str(tmp_path), min_modes=2)
        cache_get_or_solve(k20, lambda: solve_radial(prob, 1, 20),
                           str(tmp_path), min_modes=2)
        assert len(list(tmp_path.iterdir())) == 2

    def test_corruption_recovery(self, tmp_path, gp23):
        prob = radial_problem(gp23, 0, 1, 2.0)
        key = CacheKey(p=2, q=3, sigma_rule="prose", m=0, l=1,
                       lambda_cap=2.0, n_basis=16)
        fresh = cache_get_or_solve(key, lambda: solve_radial(prob, 1, 16),
                                   str(tmp_path), min_modes=2)
        path = tmp_path / key.filename()
        path.write_text(path.read_text().replace('"checksum"', '"chekcsum"'))
        with pytest.warns(UserWarning, match="re-solving"):
            again = cache_get_or_solve(key, lambda: solve_radial(prob, 1, 16),
                                       str(tmp_path), min_modes=2)
        for a, b in zip(fresh, again):
            assert a.ell == b.ell

    def test_canonical_lambda_digits(self):
        k1 = CacheKey(p=2, q=3, sigma_rule="prose", m=0, l=0,
                      lambda_cap=2.0, n_basis=16)
        k2 = CacheKey(p=2, q=3, sigma_rule="prose", m=0, l=0,
                      lambda_cap=2.0 + 1e-17, n_basis=16)
        assert k1.canonical() == k2.canonical()


def test_selftest_fast_exit_zero(capsys):
    assert run(["selftest", "--fast"]) == 0
    out = capsys.readouterr().out
    assert "OK" in out and "FAIL " not in out

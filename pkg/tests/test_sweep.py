import math

import numpy as np
import pytest

from optocool import linearized, noise
from optocool.errors import ConfigError
from optocool.sweep import (
    Axis, GridResult, SweepSpec, extract_contours, preset_config, ridge_separation, run_sweep,
    spec_from_config,
)


def test_single_cell_matches_direct_call(fig2):
    p = fig2.replace(n_p=50.0)
    spec = SweepSpec(Axis.point("detuning", -1.3), "n_steady", p, Axis.point("n_p", 50.0))
    grid = run_sweep(spec, threads=1)
    assert grid.values.shape == (1, 1)
    assert grid.values[0, 0] == noise.steady_state_phonon(p.replace(detuning=-1.3))
    assert grid.status[0, 0] == "ok"


def test_cells_equal_single_cell_sweeps(fig2):
    spec = SweepSpec(Axis("detuning", -3, 0.5, 7), "n_steady", fig2, Axis("n_p", 1, 1e4, 5, "log"))
    grid = run_sweep(spec, threads=2)
    for i, d in enumerate(grid.axis_values[0]):
        for j, n in enumerate(grid.axis_values[1]):
            one = run_sweep(SweepSpec(Axis.point("detuning", d), "n_steady", fig2, Axis.point("n_p", n)), 1)
            assert np.array_equal(one.values[0, 0], grid.values[i, j], equal_nan=True)
            assert one.status[0, 0] == grid.status[i, j]


def test_spectral_cells_equal_single_cell_sweeps(fig3):
    spec = SweepSpec(Axis("detuning", -1.2, -0.8, 3), "s_cc", fig3, Axis("omega", -1.2, -0.8, 9))
    grid = run_sweep(spec, threads=1)
    for i, d in enumerate(grid.axis_values[0]):
        for j, w in enumerate(grid.axis_values[1]):
            one = run_sweep(SweepSpec(Axis.point("detuning", d), "s_cc", fig3, Axis.point("omega", w)), 1)
            assert one.values[0, 0] == grid.values[i, j]


def test_thread_count_does_not_change_output(fig2):
    spec = spec_from_config(preset_config("fig2a"))
    a = run_sweep(spec, threads=1)
    b = run_sweep(spec, threads=4)
    assert np.array_equal(a.values, b.values, equal_nan=True)
    assert np.array_equal(a.status, b.status)
    assert a.to_csv() == b.to_csv()


def test_status_flags(fig3):
    spec = SweepSpec(Axis("detuning", -1.0, 1.0, 3), "n_steady", fig3)
    grid = run_sweep(spec, threads=1)
    assert list(grid.status) == ["weak-coupling-invalid", "not-cooling", "unstable"]
    assert math.isnan(grid.values[2])
    assert grid.values[1] == noise.steady_state_phonon(fig3.replace(detuning=0.0))
    n_min = run_sweep(SweepSpec(Axis("detuning", -1.0, 1.0, 3), "n_min", fig3), 1)
    assert n_min.values[0] == pytest.approx(1 / 1600) and np.isnan(n_min.values[1:]).all()
    spec = SweepSpec(Axis("detuning", -1.5, 1.5, 3), "s_cc", fig3, Axis("omega", -1.2, -0.8, 5))
    grid = run_sweep(spec, threads=1)
    assert list(grid.status[:, 0]) == ["ok", "ok", "unstable"]


def test_fig2b_preset_matches_closed_form():
    grid = run_sweep(spec_from_config(preset_config("fig2b")), threads=1)
    ratio = grid.axis_values[0]
    np.testing.assert_array_equal(grid.values, noise.min_phonon(1.0, 1.0 / ratio))


def test_fig3_preset_mirrors_frequency(fig3):
    cfg = preset_config("fig3")
    cfg["sweep"]["axis1"] = {"name": "detuning", "min": -1.0, "max": -1.0, "count": 1}
    grid = run_sweep(spec_from_config(cfg), threads=1)
    w = grid.axis_values[1]
    direct = linearized.s_cc(linearized.build_system(fig3), -w).values
    np.testing.assert_array_equal(grid.values[0], direct)


def test_fig3_avoided_crossing():
    grid = run_sweep(spec_from_config(preset_config("fig3")), threads=1)
    sep = ridge_separation(grid)
    near = np.abs(grid.axis_values[0] + 1.0) < 0.2
    assert np.isfinite(sep[near]).all()
    assert np.nanmin(sep) >= 0.9 * 0.2


@pytest.mark.parametrize("sweep", [
    {"axis1": {"name": "bogus", "min": 0, "max": 1, "count": 3}, "observable": "n_steady"},
    {"axis1": {"name": "n_p", "min": 0, "max": 1, "count": 3, "scale": "log"}, "observable": "n_steady"},
    {"axis1": {"name": "n_p", "min": 1, "max": 0, "count": 3}, "observable": "n_steady"},
    {"axis1": {"name": "n_p", "min": 0, "max": 1, "count": 3}, "observable": "s_cc"},
    {"axis1": {"name": "n_p", "min": 0, "max": 1, "count": 3}, "observable": "nope"},
    {"axis1": {"name": "n_p", "min": 0, "max": 1}, "observable": "n_steady"},
])
def test_bad_sweep_config(sweep):
    with pytest.raises(ConfigError):
        spec_from_config({**preset_config("fig2a"), "sweep": sweep})


def synthetic(f, n1=81, n2=61):
    a1, a2 = Axis("detuning", -2, 2, n1), Axis("n_p", -1.5, 1.5, n2)
    x, y = np.meshgrid(a1.values(), a2.values(), indexing="ij")
    vals = f(x, y)
    return GridResult((a1, a2), (a1.values(), a2.values()), vals, np.full(vals.shape, "ok"),
                      "n_steady", None)


def test_contours_constant_grid_empty():
    grid = synthetic(lambda x, y: np.full_like(x, 3.0))
    assert extract_contours(grid, [1.0, 3.0]) == {1.0: [], 3.0: []}


def test_contours_unit_circle():
    grid = synthetic(lambda x, y: x**2 + y**2)
    lines = extract_contours(grid, [1.0])[1.0]
    assert len(lines) == 1
    pts = lines[0]
    cell = max(4 / 80, 3 / 60)
    assert np.max(np.abs(np.hypot(pts[:, 0], pts[:, 1]) - 1.0)) < cell
    np.testing.assert_allclose(pts[0], pts[-1])  # closed


def test_contours_on_log_axis_in_axis_coordinates():
    a1, a2 = Axis("detuning", -1, 1, 41), Axis("n_p", 1, 1e4, 41, "log")
    x, y = np.meshgrid(a1.values(), a2.values(), indexing="ij")
    vals = np.log10(y) + 0 * x
    grid = GridResult((a1, a2), (a1.values(), a2.values()), vals, np.full(vals.shape, "ok"), "n_steady", None)
    (line,) = extract_contours(grid, [2.0])[2.0]
    np.testing.assert_allclose(line[:, 1], 100.0, rtol=1e-12)


def test_csv_and_json_schema(fig2):
    spec = SweepSpec(Axis("detuning", -2, 1, 4), "n_steady", fig2.replace(n_p=100.0), Axis("n_p", 1, 10, 2))
    grid = run_sweep(spec, threads=1)
    lines = grid.to_csv().splitlines()
    assert lines[0] == "detuning[omega_m],n_p[1],n_steady,status"
    assert len(lines) == 1 + 8
    assert lines[-1].endswith(",unstable") and ",nan," in lines[-1]
    d = grid.to_dict()
    assert d["shape"] == [4, 2] and len(d["values"]) == 8 and d["values"][-1] is None
    assert d["status"] == [r.split(",")[-1] for r in lines[1:]]

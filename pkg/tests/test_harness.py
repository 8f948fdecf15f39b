import numpy as np
import pytest

from unishear.harness import (
    CSV_COLUMNS,
    ComparisonTable,
    DegenerateInput,
    ExperimentRecord,
    MismatchedGrids,
    SweepConfig,
    build_system,
    compare_presets,
    fit_decay_rate,
    gap_law,
    plot_errors,
    records_csv,
    run_sweep,
    strip_timing,
    write_reports,
)
from unishear.model import EmptyMask
from unishear.recover import SolverConfig

FAST = SolverConfig(max_iters=60)


def small_config(**kw):
    base = dict(N=64, j_min=1, j_max=2, h1_pixels=3.0, solver=FAST)
    base.update(kw)
    return SweepConfig(**base)


@pytest.fixture(scope="module")
def sweep():
    return run_sweep(small_config())


def test_fit_exact_line():
    pts = [(j, 2.0 ** (-1.5 * j + 3)) for j in range(1, 6)]
    fit = fit_decay_rate(pts)
    assert fit.slope == pytest.approx(-1.5, abs=1e-12)
    assert fit.intercept == pytest.approx(3.0, abs=1e-12)
    assert fit.residual <= 1e-12


def test_fit_residual_oracle():
    # log2 errors 0, -2, -1: slope -1/2, residual sqrt(mean(res^2)) with res = (1/2, -1, 1/2)
    fit = fit_decay_rate([(1, 1.0), (2, 0.25), (3, 0.5)])
    assert fit.slope == pytest.approx(-0.5)
    assert fit.residual == pytest.approx(np.sqrt(0.5))


def test_fit_degenerate():
    with pytest.raises(DegenerateInput):
        fit_decay_rate([(1, 0.1), (2, 0.01)])
    with pytest.raises(DegenerateInput):
        fit_decay_rate([(1, 0.1), (2, 0.0), (3, 0.01)])
    with pytest.raises(DegenerateInput):
        fit_decay_rate([(1, 0.1), (2, float("nan")), (3, 0.01)])


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(j_min=3, j_max=2)
    with pytest.raises(ValueError):
        SweepConfig(epsilon=0)
    with pytest.raises(ValueError):
        SweepConfig(gaps=(0.1,))
    with pytest.raises(ValueError):
        build_system(SweepConfig(N=64, j_max=2, J=2))


def test_default_mapping():
    c = SweepConfig()
    assert c.n_scales == 5 and c.spacing == 0.5
    sys = build_system(small_config())
    assert sys.J == 3 and sys.grid.eta == 16


def test_gap_law_calibration():
    c = small_config()
    hs = gap_law(c)
    sys = build_system(c)
    # h_1 is h1_pixels pixels and the law shrinks by 2^{-(1 + eps')} per scale (alpha = 1)
    assert hs[0] == pytest.approx(3.0 * sys.grid.pixel)
    assert hs[1] / hs[0] == pytest.approx(2.0 ** -1.2)
    assert gap_law(small_config(c=0.5))[0] == pytest.approx(0.5 * 2.0 ** -1.2)


def test_sweep_records(sweep):
    assert [r.j for r in sweep] == [1, 2]
    for r in sweep:
        assert r.status in ("ok", "NonConvergence")
        assert np.isfinite(r.rel_err_l1a) and r.rel_err_l1a >= 0
        assert r.h_pixels >= 1 and r.iters > 0
        assert r.bound_ok in ("ok", "violated", "NotApplicable")
        assert "objective=" in r.report


def test_sweep_deterministic(sweep):
    again = run_sweep(small_config())
    assert strip_timing(records_csv(again)) == strip_timing(records_csv(sweep))


def test_csv_header_and_timing(sweep):
    text = records_csv(sweep)
    lines = text.strip().split("\n")
    assert lines[0].split(",") == CSV_COLUMNS
    assert len(lines) == 3
    stripped = strip_timing(text).strip().split("\n")
    assert "ms" not in stripped[0].split(",") and len(stripped[1].split(",")) == len(CSV_COLUMNS) - 1
    assert strip_timing("") == ""


def test_reports_file(sweep, tmp_path):
    p = tmp_path / "r.txt"
    write_reports(p, sweep)
    text = p.read_text()
    assert text.count("[parabolic j=") == 2 and "record_status=" in text


def test_zero_gap_sweep():
    cfg = small_config(gaps=(1e-6, 1e-6), diagnostics=False)
    with pytest.warns(EmptyMask):
        recs = run_sweep(cfg)
    for r in recs:
        assert r.h_pixels == 0 and r.rel_err_l1a == 0.0 and r.iters == 0
        assert r.bound_ok == "skipped"


def test_wide_gap_is_clipped_to_period():
    sys = build_system(small_config())
    recs = run_sweep(small_config(j_min=2, j_max=2, gaps=(10.0,), diagnostics=False), sys)
    assert recs[0].h_pixels == 64


def test_failed_scale_is_recorded(monkeypatch):
    import unishear.harness as hmod

    real = hmod.filtered_model

    def flaky(j, sys, spec=None):
        if j == 1:
            raise RuntimeError("boom")
        return real(j, sys, spec)

    monkeypatch.setattr(hmod, "filtered_model", flaky)
    recs = run_sweep(small_config(diagnostics=False))
    assert recs[0].status == "failed: boom" and recs[0].bound_ok == "failed"
    assert recs[1].status in ("ok", "NonConvergence")


def test_compare_empty():
    t = compare_presets([])
    assert t.presets == [] and t.csv().strip() == ",".join(CSV_COLUMNS)


def test_compare_identical_presets():
    c = small_config(diagnostics=False)
    t = compare_presets([c, c])
    assert t.presets == ["parabolic", "parabolic'"]
    a, b = (t.records[p] for p in t.presets)
    assert [r.rel_err_l1a for r in a] == [r.rel_err_l1a for r in b]
    assert set(t.by_j()) == {1, 2}


def test_compare_shares_gaps():
    a = small_config(diagnostics=False)
    b = small_config(preset="wavelet", diagnostics=False)
    t = compare_presets([a, b])
    ha = [r.h_continuum for r in t.records["parabolic"]]
    hb = [r.h_continuum for r in t.records["wavelet"]]
    assert ha == hb == gap_law(a)


def test_compare_mismatched():
    with pytest.raises(MismatchedGrids):
        compare_presets([small_config(), small_config(N=128)])


def test_plot(sweep):
    t = ComparisonTable(["parabolic"], {"parabolic": sweep})
    img = plot_errors(t)
    assert img.shape == (240, 360) and img.dtype == np.uint8
    assert (img == 0).sum() > 4 * 300
    empty = plot_errors(ComparisonTable(["x"], {"x": [ExperimentRecord("x", 1, 1, 0.1, 0)]}))
    assert empty[120, 180] == 255

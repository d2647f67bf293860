"""Sweep drivers: rate fits, study tables, flags, and dispatch."""

import numpy as np
import pytest

import leraydec as ld
from leraydec import experiments


def _small_base(grid8):
    return ld.SolverConfig(
        grid=grid8,
        model=ld.ModelKind.nse(),
        nu=0.2,
        dt=0.05,
        t_end=0.2,
        ic=ld.FieldSpec(kind="taylor_green"),
        snapshot_every=1,
    )


# ---------------------------------------------------------------- fit_rate


def test_fit_rate_exact_power():
    ds = (0.4, 0.2, 0.1, 0.05)
    es = [d**3 for d in ds]
    fit = experiments.fit_rate(ds, es, expected=3.0)
    assert fit.slope == pytest.approx(3.0, abs=1e-10)
    assert fit.deviation < 1e-10
    assert fit.window == (0.2, 0.1, 0.05)  # default: three finest
    assert not fit.degenerate and not fit.floor_limited


def test_fit_rate_window_clamps():
    ds = (1.0, 0.5, 0.25, 0.125, 0.0625)
    es = [d**2 for d in ds]
    wide = experiments.fit_rate(ds, es, expected=2.0, window=10)
    assert wide.window == ds
    narrow = experiments.fit_rate(ds, es, expected=2.0, window=1)
    assert len(narrow.window) == 3  # never fewer than three points


def test_fit_rate_floor_truncation():
    ds = (1.0, 0.5, 0.25, 0.125, 0.0625)
    es = [d**2 for d in ds]
    es[4] = es[3]  # finest pair sits on the floor
    fit = experiments.fit_rate(ds, es, expected=2.0, floor=1e-12)
    assert fit.floor_limited
    assert not fit.degenerate
    assert fit.window == (0.5, 0.25, 0.125)
    assert fit.slope == pytest.approx(2.0, abs=1e-10)


def test_fit_rate_floor_degenerate_when_too_few_points():
    ds = (1.0, 0.5, 0.25, 0.125)
    es = [1.0, 1.0, 0.5, 0.25]  # flat from the first pair on
    fit = experiments.fit_rate(ds, es, expected=2.0, floor=1e-6)
    assert fit.degenerate and fit.floor_limited
    assert np.isnan(fit.slope)


def test_fit_rate_degenerate_on_zero_error():
    fit = experiments.fit_rate((0.4, 0.2, 0.1), [1e-3, 1e-4, 0.0], expected=2.0)
    assert fit.degenerate
    assert np.isnan(fit.slope)


def test_fit_rate_validation():
    with pytest.raises(ValueError, match="three"):
        experiments.fit_rate((0.2, 0.1), [1.0, 0.5], expected=2.0)
    with pytest.raises(ValueError, match="decreasing"):
        experiments.fit_rate((0.1, 0.2, 0.4), [1.0, 0.5, 0.25], expected=2.0)
    with pytest.raises(ValueError):
        experiments.fit_rate((0.4, 0.2, 0.1), [1.0, 0.5], expected=2.0)


# ---------------------------------------------------------------- StudySpec


def test_study_spec_rejects_unknown_kind():
    with pytest.raises(ValueError, match="unknown study kind"):
        experiments.StudySpec(kind="bogus")


def test_study_spec_rejects_nondecreasing_deltas():
    with pytest.raises(ValueError, match="strictly decreasing"):
        experiments.StudySpec(kind="deconv_rate", deltas=(0.1, 0.2))


# ------------------------------------------------------------- deconv_rate


def test_deconv_rate_study_matches_closed_form():
    spec = experiments.StudySpec(kind="deconv_rate", grid_n=16)
    rep = experiments.run_study(spec)
    assert rep.kind == "deconv_rate"
    table = rep.tables["main"]
    assert table["delta"] == [0.2, 0.1, 0.05, 0.025]

    # single-mode |k| = 1 field of unit amplitude has L2 norm 1/sqrt(2), and
    # the end-to-end error is exactly the scalar error multiplier times that
    for order in (0, 1, 2):
        for d, err in zip(table["delta"], table[f"error_order_{order}"]):
            fs = ld.FilterSpec(delta=d, order=order)
            want = ld.deconv_error_multiplier(1.0, fs) / np.sqrt(2.0)
            assert err == pytest.approx(want, rel=1e-12)
        fit = rep.fits[f"order_{order}"]
        assert fit.expected == 2.0 * (order + 1)
        assert fit.deviation <= 0.05
    assert rep.flags == []


# -------------------------------------------------------------- delta_rate


def test_delta_rate_study_requires_base():
    spec = experiments.StudySpec(kind="delta_rate", deltas=(0.4, 0.2, 0.1))
    with pytest.raises(ValueError, match="base"):
        experiments.run_study(spec)


def test_delta_rate_study_small_grid(grid8):
    spec = experiments.StudySpec(
        kind="delta_rate", deltas=(0.4, 0.2, 0.1), orders=(0,), base=_small_base(grid8)
    )
    rep = experiments.run_study(spec)
    table = rep.tables["main"]
    for col in ("l2l2_order_0", "l2_final_order_0", "h1_avg_order_0"):
        vals = table[col]
        assert len(vals) == 3
        assert all(v > 0 for v in vals)
        assert vals[0] > vals[1] > vals[2]  # smaller radius, smaller error
    fit = rep.fits["order_0"]
    assert fit.expected == 2.0
    assert 1.3 < fit.slope < 2.3  # pre-asymptotic window on a coarse sweep
    assert rep.metadata["n"] == 8
    assert rep.metadata["nu"] == pytest.approx(0.2)
    assert set(rep.metadata["wall_seconds"]) == {
        "order_0_delta_0.4", "order_0_delta_0.2", "order_0_delta_0.1"
    }


def test_delta_rate_study_zero_delta_passthrough(grid8):
    spec = experiments.StudySpec(
        kind="delta_rate", deltas=(0.2, 0.1, 0.0), orders=(0,), base=_small_base(grid8)
    )
    rep = experiments.run_study(spec)
    assert rep.tables["main"]["l2l2_order_0"][-1] == 0.0
    assert rep.fits["order_0"].degenerate
    assert "order_0" in rep.flags


# ----------------------------------------------------------------- n_limit


def test_n_limit_study_counts_and_errors(grid8):
    spec = experiments.StudySpec(
        kind="n_limit", delta=0.5, orders=(0, 1, 2), base=_small_base(grid8)
    )
    rep = experiments.run_study(spec)
    table = rep.tables["main"]
    assert table["order"] == [0, 1, 2]
    errs = table["l2l2"]
    assert errs[0] > errs[1] > errs[2]
    assert "errors_not_strictly_decreasing" not in rep.flags
    for order, apps, rhs in zip(
        table["order"], table["filter_applications"], table["rhs_evals"]
    ):
        assert apps == (order + 1) * rhs
    assert all(w > 0 for w in table["wall_seconds"])
    assert rep.metadata["unit_filter_seconds"] > 0


# ------------------------------------------------------------ cutoff_table


def test_cutoff_table_study_defaults():
    rep = experiments.run_study(experiments.StudySpec(kind="cutoff_table"))
    table = rep.tables["main"]
    assert table["order"][0] == 0 and table["order"][-1] == 50
    assert table["k_c_delta_1"][0] == 1
    assert table["k_c_delta_0.5"][0] == 2
    assert table["k_c_delta_0.25"][0] == 4
    for col in ("k_c_delta_1", "k_c_delta_0.5", "k_c_delta_0.25"):
        kc = table[col]
        assert all(b >= a for a, b in zip(kc, kc[1:]))  # monotone in order
    assert rep.flags == []


# ------------------------------------------------------- consistency_rate


def test_consistency_rate_study_defaults():
    rep = experiments.run_study(experiments.StudySpec(kind="consistency_rate"))
    assert "bound_violated" not in rep.flags
    table = rep.tables["main"]
    for order in (0, 1):
        fit = rep.fits[f"order_{order}"]
        assert fit.deviation <= 0.3
        # the test field makes the sharp bound an equality, so ratios sit
        # at 1 up to rounding
        ratios = table[f"ratio_order_{order}"]
        assert all(0.0 < r <= 1.0 + 1e-12 for r in ratios)


# ------------------------------------------------------- transfer_figures


def test_transfer_figures_tables():
    rep = experiments.run_study(experiments.StudySpec(kind="transfer_figures"))
    dec = rep.tables["deconvolution"]
    smo = rep.tables["smoother"]
    assert len(dec["k"]) == 201
    assert dec["k"][-1] == pytest.approx(10.0)
    assert dec["d_hat_order_2"][0] == pytest.approx(1.0)
    assert dec["d_exact"][-1] == pytest.approx(1.0 + 10.0**2)
    for order in (0, 10, 50):
        h = smo[f"h_hat_order_{order}"]
        assert h[0] == pytest.approx(1.0)
        assert all(b <= a + 1e-15 for a, b in zip(h, h[1:]))  # decays with k

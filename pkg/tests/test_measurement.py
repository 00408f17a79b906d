import numpy as np
import pytest

from biphoton_walk.correlations import BiphotonInput, CoincidenceMatrix, gamma_partial
from biphoton_walk.disorder import derive_seed
from biphoton_walk.lattice import Mode, enumerate_modes
from biphoton_walk.measurement import (
    PAPER_PRESET,
    CountMatrix,
    ExperimentPreset,
    reproduce_experiment,
    sample_counts,
    step6_enhancing_map,
    violation_from_counts,
)
from biphoton_walk.search import evaluate_map
from biphoton_walk.violation import violation_matrix
from biphoton_walk.walk import PhaseMap, build_unitary


def hom_counts(n_bunch):
    """Ideal one-step count pattern: all events bunched, none in coincidence."""
    n = 2 * (2 * 1 + 1)
    idx = enumerate_modes(1)
    c = np.zeros((n, n), dtype=np.int64)
    c[idx.index(Mode(1, "L")), idx.index(Mode(1, "L"))] = n_bunch
    c[idx.index(Mode(-1, "R")), idx.index(Mode(-1, "R"))] = n_bunch
    return CountMatrix(step=1, counts=c, total=2 * n_bunch)


def test_preset_validation():
    with pytest.raises(ValueError):
        ExperimentPreset(q=-0.2)
    with pytest.raises(ValueError):
        ExperimentPreset(total_counts=0)
    assert PAPER_PRESET.coin.transmissivity == pytest.approx(0.55)
    assert PAPER_PRESET.q == pytest.approx(0.11)


def test_enhancing_map_layout_and_score():
    pm = step6_enhancing_map()
    assert pm.t_max == 6
    assert pm.pi_sites() == [(4, -2, "R"), (4, 2, "L")]
    v, mav, flat_idx, _ = evaluate_map(6, pm)
    assert mav == pytest.approx(1.0 / 12.0, abs=1e-12)
    i, j = divmod(flat_idx, v.shape[0])
    modes = enumerate_modes(6).modes
    assert {modes[i], modes[j]} == {Mode(-2, "R"), Mode(2, "L")}
    _, ordered_mav, _, _ = evaluate_map(6, PhaseMap.zeros(6))
    assert mav > ordered_mav + 0.05


def test_sample_counts_determinism_and_support():
    g = gamma_partial(build_unitary(2, PhaseMap.zeros(2)))
    a = sample_counts(g, 5000, seed=3)
    b = sample_counts(g, 5000, seed=3)
    c = sample_counts(g, 5000, seed=4)
    assert np.array_equal(a.counts, b.counts)
    assert not np.array_equal(a.counts, c.counts)
    # zero-probability pairs can never fire
    assert np.all(a.counts[g.gamma == 0.0] == 0)
    assert a.total == int(np.triu(a.counts).sum())


def test_count_matrix_validation():
    n = 2 * (2 * 1 + 1)
    good = np.zeros((n, n), dtype=np.int64)
    good[0, 0] = 5
    CountMatrix(step=1, counts=good, total=5)
    with pytest.raises(ValueError):
        CountMatrix(step=1, counts=good, total=6)
    bad = good.copy()
    bad[0, 1] = 2
    with pytest.raises(ValueError):
        CountMatrix(step=1, counts=bad, total=7)  # not symmetric
    with pytest.raises(ValueError):
        CountMatrix(step=1, counts=-good, total=-5)


def test_hom_counts_recover_reference_violation():
    est = violation_from_counts(hom_counts(500))
    idx = enumerate_modes(1)
    i, j = idx.index(Mode(-1, "R")), idx.index(Mode(1, "L"))
    assert est.values[i, j] == pytest.approx(1.0 / 3.0, abs=1e-12)
    # two bunched terms of (1/3 * sqrt(500)/1000)^2 each, no coincidence term
    expect_sigma = np.sqrt(2.0 * (np.sqrt(500.0) / 3000.0) ** 2)
    assert est.sigma[i, j] == pytest.approx(expect_sigma, rel=1e-12)
    assert est.zero_count_mask[i, j]
    assert not est.zero_count_mask[i, i]


def test_sigma_closed_form_from_counts():
    """Propagation reduces to counts: 9 T^2 sigma^2 = c_jj[c_ii>0] +
    c_ii[c_jj>0] + 9 c_ij."""
    rng = np.random.default_rng(8)
    n = 2 * (2 * 1 + 1)
    raw = rng.integers(0, 40, size=(n, n))
    raw[rng.random((n, n)) < 0.3] = 0
    counts = np.triu(raw) + np.triu(raw, 1).T
    cm = CountMatrix(step=1, counts=counts, total=int(np.triu(counts).sum()))
    est = violation_from_counts(cm)
    T = float(cm.total)
    d = np.diagonal(counts).astype(float)
    for i in range(n):
        for j in range(n):
            if i == j:
                assert np.isnan(est.sigma[i, j])
                continue
            expect = (d[j] * (d[i] > 0) + d[i] * (d[j] > 0)) / (9.0 * T * T) \
                + counts[i, j] / (T * T)
            assert est.sigma[i, j] ** 2 == pytest.approx(expect, rel=1e-10, abs=1e-18)


def test_empirical_gamma_normalizes():
    g = gamma_partial(build_unitary(3, PhaseMap.zeros(3)))
    est = violation_from_counts(sample_counts(g, 20_000, seed=5))
    assert isinstance(est.gamma_empirical, CoincidenceMatrix)
    assert est.step == 3


def test_violation_from_counts_rejects_empty():
    n = 2 * (2 * 1 + 1)
    with pytest.raises(ValueError):
        violation_from_counts(CountMatrix(step=1, counts=np.zeros((n, n), np.int64), total=0))


def test_estimates_converge_with_count_budget():
    pm = step6_enhancing_map()
    theory = gamma_partial(build_unitary(6, pm, PAPER_PRESET.coin),
                           BiphotonInput(q=PAPER_PRESET.q))
    exact = violation_matrix(theory).values
    errs = []
    for total in (10_000, 10_000_000):
        est = violation_from_counts(sample_counts(theory, total, seed=6))
        mask = ~np.isnan(exact)
        errs.append(float(np.abs(est.values[mask] - exact[mask]).max()))
    assert errs[1] < errs[0] / 10.0
    assert errs[1] < 1e-3


def test_reproduce_experiment_pipeline():
    run = reproduce_experiment(PAPER_PRESET, 6, step6_enhancing_map(), seed=9)
    assert run.step == 6
    assert run.counts.total > 0
    assert 0.9 < run.similarity <= 1.0
    assert run.violation.values.shape == run.gamma_theory.gamma.shape
    # error bars shrink like 1/sqrt(N): a 100x budget gives ~10x tighter sigma
    big = ExperimentPreset(coin=PAPER_PRESET.coin, q=PAPER_PRESET.q,
                           total_counts=1_000_000)
    run_big = reproduce_experiment(big, 6, step6_enhancing_map(), seed=9)
    # restrict to pairs that registered counts in both runs; most pairs on
    # this lattice are parity-forbidden and carry sigma = 0
    both = (run.violation.sigma > 0) & (run_big.violation.sigma > 0)
    assert both.sum() > 20
    med = np.median(run.violation.sigma[both] / run_big.violation.sigma[both])
    assert 6.0 < med < 16.0


def test_peak_sigma_tracks_monte_carlo_scatter():
    pm = step6_enhancing_map()
    theory = gamma_partial(build_unitary(6, pm, PAPER_PRESET.coin),
                           BiphotonInput(q=PAPER_PRESET.q))
    v = violation_matrix(theory).values
    i, j = np.unravel_index(np.nanargmax(np.where(np.isnan(v), -np.inf, v)), v.shape)
    peaks, sigmas = [], []
    for s in range(120):
        est = violation_from_counts(sample_counts(theory, 10_000, derive_seed(50, s)))
        peaks.append(est.values[i, j])
        sigmas.append(est.sigma[i, j])
    ratio = np.mean(sigmas) / np.std(peaks)
    assert 0.7 < ratio < 1.4

"""Search for correlation-enhancing phase maps.

Random search draws uniform binary maps (the p=1 disorder sampler), scores
each by its violation matrix, and keeps per-pair and global bests.  The
map stream is indexed by (base_seed, map index), so any candidate can be
rebuilt without storing the population, and results do not depend on how
the index range is split across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .correlations import DEFAULT_INPUT, BiphotonInput, gamma_partial
from .disorder import enumerate_phase_maps, realization_map
from .lattice import Mode, enumerate_modes
from .parallel import run_chunked
from .violation import violation_values
from .walk import BALANCED_COIN, CoinSpec, PhaseMap, build_unitary


def evaluate_map(t: int, phase_map: PhaseMap, spec: CoinSpec = BALANCED_COIN,
                 inp: BiphotonInput = DEFAULT_INPUT):
    """Score one map: (V matrix with NaN diagonal, mav, flat argmax, total).

    The argmax is the row-major flat index over the upper triangle, which
    makes the lowest-index convention of tie-breaking explicit.
    """
    gamma = gamma_partial(build_unitary(t, phase_map, spec), inp).gamma
    v = violation_values(gamma)
    masked = np.where(np.isnan(v), -np.inf, v)
    masked[np.tril_indices_from(masked)] = -np.inf
    flat_idx = int(np.argmax(masked))
    mav = float(masked.flat[flat_idx])
    total = float(masked[masked > 0.0].sum())
    return v, mav, flat_idx, total


@dataclass(frozen=True)
class SearchResult:
    """Best-of-population summary; maps are kept, not just their scores.

    ``per_pair_best`` holds, for every mode pair, the largest V[i, j] seen
    over all evaluated maps (NaN on the diagonal); its maximum equals
    ``best_mav``.  The MAV and Total Violation optima may be attained by
    different maps.
    """

    step: int
    maps_evaluated: int
    best_mav: float
    best_mav_map: PhaseMap
    best_mav_pair: tuple[Mode, Mode]
    best_total: float
    best_total_map: PhaseMap
    per_pair_best: np.ndarray


class _Tracker:
    """Running bests with the lowest-map-index tie-break."""

    def __init__(self, n_modes: int):
        self.per_pair = np.full((n_modes, n_modes), -np.inf)
        np.fill_diagonal(self.per_pair, np.nan)
        self._iu = np.triu_indices(n_modes, k=1)
        self.mav = -np.inf
        self.mav_order = None  # (map index, flat pair index)
        self.mav_map = None
        self.total = -np.inf
        self.total_order = None
        self.total_map = None
        self.count = 0

    def observe(self, index: int, phase_map: PhaseMap, v: np.ndarray,
                mav: float, flat_idx: int, total: float) -> None:
        iu = self._iu
        self.per_pair[iu] = np.maximum(self.per_pair[iu], v[iu])
        if mav > self.mav:
            self.mav, self.mav_order, self.mav_map = mav, (index, flat_idx), phase_map
        if total > self.total:
            self.total, self.total_order, self.total_map = total, (index,), phase_map
        self.count += 1

    def merge(self, other: "_Tracker") -> None:
        """Fold in a tracker for a later index range (strict > keeps ours)."""
        iu = self._iu
        self.per_pair[iu] = np.maximum(self.per_pair[iu], other.per_pair[iu])
        if other.mav > self.mav:
            self.mav, self.mav_order, self.mav_map = other.mav, other.mav_order, other.mav_map
        if other.total > self.total:
            self.total, self.total_order, self.total_map = (
                other.total, other.total_order, other.total_map)
        self.count += other.count

    def result(self, step: int) -> SearchResult:
        if self.count == 0:
            raise ValueError("no maps were evaluated")
        modes = enumerate_modes(step).modes
        n = len(modes)
        i, j = divmod(self.mav_order[1], n)
        lower = np.tril(np.ones((n, n), dtype=bool), k=-1)
        per_pair = np.where(lower, self.per_pair.T, self.per_pair)
        per_pair.flags.writeable = False
        return SearchResult(
            step=step,
            maps_evaluated=self.count,
            best_mav=self.mav,
            best_mav_map=self.mav_map,
            best_mav_pair=(modes[i], modes[j]),
            best_total=self.total,
            best_total_map=self.total_map,
            per_pair_best=per_pair,
        )


def _search_chunk(start: int, stop: int, t: int, base_seed: int,
                  spec: CoinSpec, inp: BiphotonInput) -> _Tracker:
    tracker = _Tracker(2 * (2 * t + 1))
    for k in range(start, stop):
        pm = realization_map(1.0, base_seed, k, t)
        tracker.observe(k, pm, *evaluate_map(t, pm, spec, inp))
    return tracker


def random_search(t: int, n_maps: int, base_seed: int,
                  spec: CoinSpec = BALANCED_COIN,
                  inp: BiphotonInput = DEFAULT_INPUT,
                  workers: int = 1,
                  progress: Optional[Callable[[int, int], None]] = None) -> SearchResult:
    """Best violation stats over ``n_maps`` uniform random binary maps."""
    if n_maps < 1:
        raise ValueError(f"need at least one map, got {n_maps}")
    chunks = run_chunked(_search_chunk, (t, base_seed, spec, inp), n_maps,
                         workers=workers, progress=progress)
    head = chunks[0]
    for tracker in chunks[1:]:
        head.merge(tracker)
    return head.result(t)


def search_candidates(t: int, maps: Iterable[PhaseMap],
                      spec: CoinSpec = BALANCED_COIN,
                      inp: BiphotonInput = DEFAULT_INPUT) -> SearchResult:
    """Score an explicit candidate collection (enumerations, curated maps)."""
    tracker = _Tracker(2 * (2 * t + 1))
    for k, pm in enumerate(maps):
        tracker.observe(k, pm, *evaluate_map(t, pm, spec, inp))
    return tracker.result(t)


def exhaustive_search(t: int, spec: CoinSpec = BALANCED_COIN,
                      inp: BiphotonInput = DEFAULT_INPUT,
                      gauge_quotient: bool = False) -> SearchResult:
    """True optimum by enumerating every map (small t only, guarded)."""
    return search_candidates(t, enumerate_phase_maps(t, gauge_quotient), spec, inp)


def violation_landscape(t: int, n_maps: int, base_seed: int,
                        spec: CoinSpec = BALANCED_COIN,
                        inp: BiphotonInput = DEFAULT_INPUT,
                        workers: int = 1, progress=None) -> np.ndarray:
    """Per-pair best V over the sampled maps (the search's per_pair_best)."""
    return random_search(t, n_maps, base_seed, spec, inp,
                         workers=workers, progress=progress).per_pair_best


@dataclass(frozen=True)
class TrendRecord:
    step: int
    ordered_mav: float
    ordered_total: float
    best_mav: float
    best_total: float


def mav_trend(t_range: Iterable[int], n_maps: int, base_seed: int,
              spec: CoinSpec = BALANCED_COIN,
              inp: BiphotonInput = DEFAULT_INPUT,
              workers: int = 1, progress=None) -> list[TrendRecord]:
    """Ordered-walk MAV/Total Violation versus the searched best, per step.

    Each step draws its maps from ``derive_seed(base_seed, t)`` so records
    are step-wise reproducible.
    """
    from .disorder import derive_seed
    records = []
    for t in t_range:
        _, o_mav, _, o_total = evaluate_map(t, PhaseMap.zeros(t), spec, inp)
        searched = random_search(t, n_maps, derive_seed(base_seed, t), spec, inp,
                                 workers=workers, progress=progress)
        records.append(TrendRecord(
            step=t, ordered_mav=o_mav, ordered_total=o_total,
            best_mav=searched.best_mav,
            best_total=searched.best_total,
        ))
    return records


def hill_climb(t: int, start: PhaseMap, spec: CoinSpec = BALANCED_COIN,
               inp: BiphotonInput = DEFAULT_INPUT,
               max_rounds: int = 64) -> tuple[PhaseMap, float]:
    """Greedy single-site-flip refinement of a map's MAV (off by default
    everywhere; random sampling alone matches the reference behavior)."""
    current = start
    _, best, _, _ = evaluate_map(t, current, spec, inp)
    for _ in range(max_rounds):
        flat = current.flat()
        improved = None
        for site in range(flat.size):
            trial = flat.copy()
            trial[site] ^= 1
            candidate = PhaseMap.from_flat(t, trial)
            _, mav, _, _ = evaluate_map(t, candidate, spec, inp)
            if mav > best:
                best, improved = mav, candidate
        if improved is None:
            return current, best
        current = improved
    return current, best

"""p-diluted binary phase disorder: sampling, enumeration, averaging.

Each phase site independently takes the value pi with probability p/2 and 0
otherwise, so p=0 is the ordered walk and p=1 is uniform over all binary
maps.  Disorder averages follow the convention that the violation matrix is
computed from the averaged coincidence matrix, not averaged itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .correlations import (
    DEFAULT_INPUT,
    BiphotonInput,
    CoincidenceMatrix,
    gamma_partial,
)
from .parallel import KahanAccumulator, run_chunked
from .violation import ViolationMatrix, violation_matrix, violation_values
from .walk import BALANCED_COIN, CoinSpec, PhaseMap, build_unitary, site_count

MAX_ENUM_SITES = 24


def derive_seed(base_seed: int, index: int) -> int:
    """Stable per-item seed so realization ``index`` is reproducible alone."""
    seq = np.random.SeedSequence(base_seed, spawn_key=(index,))
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class DisorderModel:
    """Bernoulli(p/2) phase flips, fully determined by (p, seed)."""

    p: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"disorder level p must lie in [0, 1], got {self.p}")


def sample_phase_map(model: DisorderModel, t_max: int) -> PhaseMap:
    rng = np.random.default_rng(model.seed)
    flat = (rng.random(site_count(t_max)) < model.p / 2.0).astype(np.uint8)
    return PhaseMap.from_flat(t_max, flat)


def realization_map(p: float, base_seed: int, index: int, t_max: int) -> PhaseMap:
    """Map number ``index`` of the stream defined by (p, base_seed)."""
    return sample_phase_map(DisorderModel(p, derive_seed(base_seed, index)), t_max)


def enumerate_phase_maps(t_max: int, gauge_quotient: bool = False) -> Iterator[PhaseMap]:
    """All binary phase maps for a t_max-step walk, in ascending bit order.

    With ``gauge_quotient`` the first site of every step layer is pinned to
    zero; flipping an entire layer only changes the state by a global sign,
    so each pinned map represents a class of 2^t_max physically equivalent
    ones.
    """
    n_sites = site_count(t_max)
    if n_sites > MAX_ENUM_SITES:
        raise ValueError(
            f"enumeration refused: {n_sites} phase sites exceed the "
            f"{MAX_ENUM_SITES}-site guard"
        )
    free = n_sites - t_max if gauge_quotient else n_sites
    pinned = []
    if gauge_quotient:
        offset = 0
        for s in range(t_max):
            pinned.append(offset)
            offset += 2 * (2 * s + 1)
    free_slots = [i for i in range(n_sites) if i not in pinned]
    flat = np.zeros(n_sites, dtype=np.uint8)
    for code in range(1 << free):
        for bit, slot in enumerate(free_slots):
            flat[slot] = (code >> bit) & 1
        yield PhaseMap.from_flat(t_max, flat)


@dataclass(frozen=True)
class DisorderAverage:
    """Disorder-averaged output statistics.

    ``mean_violation`` (and its Total Violation, reported here with a
    first-order standard error) is computed from the averaged Gamma: the
    average probability distribution is the object the violation analysis
    runs on.  ``per_map_total_violation`` instead averages each single
    realization's Total Violation; the two differ because violations of
    individual interference patterns wash out under averaging.
    """

    p: float
    step: int
    realizations: int
    mean_gamma: CoincidenceMatrix
    mean_violation: ViolationMatrix
    mean_total_violation: float
    total_violation_se: float
    per_map_total_violation: float
    per_map_total_violation_se: float


def _average_chunk(start: int, stop: int, p: float, t: int, base_seed: int,
                   spec: CoinSpec, inp: BiphotonInput):
    """Partial sums over realizations [start, stop)."""
    n = 2 * (2 * t + 1)
    gamma_sum = np.zeros((n, n))
    gamma_sq_sum = np.zeros((n, n))
    tv_sum = 0.0
    tv_sq_sum = 0.0
    for k in range(start, stop):
        pm = realization_map(p, base_seed, k, t)
        g = gamma_partial(build_unitary(t, pm, spec), inp)
        gamma_sum += g.gamma
        gamma_sq_sum += g.gamma * g.gamma
        tv = violation_matrix(g).total_violation
        tv_sum += tv
        tv_sq_sum += tv * tv
    return gamma_sum, gamma_sq_sum, tv_sum, tv_sq_sum


def _total_violation_se(gbar: np.ndarray, var_mean: np.ndarray) -> float:
    """First-order error of the mean pattern's Total Violation.

    Propagates the entrywise variance of the averaged Gamma through the
    gradient of TV = sum of positive V entries, treating entries as
    independent (cross covariances dropped); replication experiments show
    this errs on the conservative side.
    """
    v = violation_values(gbar)
    active = np.triu(np.where(np.isnan(v), -1.0, v), k=1) > 0.0
    d = np.diagonal(gbar)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sqrt(np.outer(1.0 / d, d))
    ratio = np.where(np.isfinite(ratio), ratio, 0.0)
    grad_diag = (ratio / 3.0 * (active | active.T)).sum(axis=1)
    se_sq = float(var_mean[active].sum())
    se_sq += float((grad_diag ** 2 * np.diagonal(var_mean)).sum())
    return float(np.sqrt(se_sq))


def average_over_disorder(p: float, t: int, n: int, base_seed: int,
                          spec: CoinSpec = BALANCED_COIN,
                          inp: BiphotonInput = DEFAULT_INPUT,
                          workers: int = 1, progress=None) -> DisorderAverage:
    """Average Γ over n seeded realizations; V comes from the averaged Γ."""
    if n < 1:
        raise ValueError(f"need at least one realization, got {n}")
    shape = (2 * (2 * t + 1),) * 2
    chunks = run_chunked(_average_chunk, (p, t, base_seed, spec, inp), n,
                         workers=workers, progress=progress)
    gamma_acc = KahanAccumulator(shape)
    gamma_sq_acc = KahanAccumulator(shape)
    tv_acc = KahanAccumulator()
    tv_sq_acc = KahanAccumulator()
    for gamma_sum, gamma_sq_sum, tv_sum, tv_sq_sum in chunks:
        gamma_acc.add(gamma_sum)
        gamma_sq_acc.add(gamma_sq_sum)
        tv_acc.add(tv_sum)
        tv_sq_acc.add(tv_sq_sum)
    gbar = gamma_acc.total / n
    mean_gamma = CoincidenceMatrix(step=t, gamma=gbar)
    mean_violation = violation_matrix(mean_gamma)
    var_mean = np.maximum(gamma_sq_acc.total / n - gbar * gbar, 0.0) / n
    tv_mean = tv_acc.total / n
    tv_var = max(tv_sq_acc.total / n - tv_mean * tv_mean, 0.0)
    return DisorderAverage(
        p=p, step=t, realizations=n,
        mean_gamma=mean_gamma,
        mean_violation=mean_violation,
        mean_total_violation=mean_violation.total_violation,
        total_violation_se=_total_violation_se(gbar, var_mean),
        per_map_total_violation=float(tv_mean),
        per_map_total_violation_se=float(np.sqrt(tv_var / n)) if n > 1 else 0.0,
    )

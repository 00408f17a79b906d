"""Cauchy-Schwarz violation analysis of coincidence matrices.

For classical (distinguishable) light the cross-coincidences obey
Gamma[i,j]^2 >= (4/9) Gamma[i,i] Gamma[j,j], so

    V[i, j] = (2/3) sqrt(Gamma[i,i] Gamma[j,j]) - Gamma[i,j]

is non-positive for every off-diagonal pair.  Positive entries certify
nonclassical interference.  The diagonal carries no information and is
stored as NaN.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlations import CoincidenceMatrix
from .lattice import Mode, enumerate_modes


def violation_values(gamma: np.ndarray) -> np.ndarray:
    """V matrix for a raw symmetric non-negative array; diagonal set to NaN."""
    g = np.asarray(gamma, dtype=float)
    diag = np.diagonal(g)
    v = (2.0 / 3.0) * np.sqrt(np.outer(diag, diag)) - g
    np.fill_diagonal(v, np.nan)
    return v


@dataclass(frozen=True)
class ViolationMatrix:
    step: int
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        n = 2 * (2 * self.step + 1)
        if v.shape != (n, n):
            raise ValueError(f"step {self.step} expects a {n}x{n} matrix, got {v.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def max_violation(self) -> float:
        """Largest off-diagonal entry (the MAV)."""
        return float(np.nanmax(self.values))

    @property
    def max_pair(self) -> tuple[Mode, Mode]:
        """Modes achieving the MAV; ties resolve to the lowest row-major index."""
        v = np.where(np.isnan(self.values), -np.inf, self.values)
        v[np.tril_indices_from(v)] = -np.inf
        i, j = np.unravel_index(int(np.argmax(v)), v.shape)
        modes = enumerate_modes(self.step).modes
        return modes[i], modes[j]

    @property
    def total_violation(self) -> float:
        """Sum of positive violations over unordered pairs."""
        v = np.triu(np.where(np.isnan(self.values), 0.0, self.values), k=1)
        return float(v[v > 0.0].sum())


def violation_matrix(coincidences: CoincidenceMatrix) -> ViolationMatrix:
    return ViolationMatrix(
        step=coincidences.step,
        values=violation_values(coincidences.gamma),
    )


@dataclass(frozen=True)
class PairDecomposition:
    """Restriction of the biphoton state to one output pair (a, b).

    Conditioned on both photons landing in {a, b}, the reduced state has
    amplitude magnitudes |alpha_aa|, |alpha_ab|, |alpha_bb| recoverable from
    the coincidence matrix (relative phases are not).  ``weight`` is the
    probability of the pair subspace, ``violation`` the V entry rescaled by
    that weight.
    """

    mode_a: Mode
    mode_b: Mode
    weight: float
    prob_aa: float
    prob_ab: float
    prob_bb: float
    violation: float


def pair_decomposition(coincidences: CoincidenceMatrix,
                       mode_a: Mode, mode_b: Mode) -> PairDecomposition:
    if mode_a == mode_b:
        raise ValueError("pair decomposition needs two distinct modes")
    from .lattice import mode_index
    indexing = enumerate_modes(coincidences.step)
    i = mode_index(indexing, mode_a)
    j = mode_index(indexing, mode_b)
    g = coincidences.gamma
    gii, gij, gjj = float(g[i, i]), float(g[i, j]), float(g[j, j])
    weight = gii + gij + gjj
    if weight <= 0.0:
        raise ValueError(f"pair ({mode_a.label()}, {mode_b.label()}) has zero probability")
    p_aa, p_ab, p_bb = gii / weight, gij / weight, gjj / weight
    v = weight * ((2.0 / 3.0) * np.sqrt(p_aa * p_bb) - p_ab)
    return PairDecomposition(
        mode_a=mode_a, mode_b=mode_b, weight=weight,
        prob_aa=p_aa, prob_ab=p_ab, prob_bb=p_bb,
        violation=v,
    )


def similarity(a: CoincidenceMatrix | np.ndarray,
               b: CoincidenceMatrix | np.ndarray) -> float:
    """Classical fidelity between two coincidence patterns.

    S = (sum_{i<=j} sqrt(a_ij b_ij))^2 / (sum a * sum b) over the upper
    triangle; equals 1 iff the normalized patterns coincide.
    """
    ga = a.gamma if isinstance(a, CoincidenceMatrix) else np.asarray(a, dtype=float)
    gb = b.gamma if isinstance(b, CoincidenceMatrix) else np.asarray(b, dtype=float)
    if ga.shape != gb.shape:
        raise ValueError(f"shape mismatch: {ga.shape} vs {gb.shape}")
    iu = np.triu_indices_from(ga)
    ta, tb = ga[iu], gb[iu]
    if np.any(ta < 0) or np.any(tb < 0):
        raise ValueError("similarity needs non-negative entries")
    na, nb = ta.sum(), tb.sum()
    if na == 0.0 or nb == 0.0:
        raise ValueError("similarity of an all-zero pattern is undefined")
    return float(np.sqrt(ta * tb).sum() ** 2 / (na * nb))

"""Two-photon coincidence matrices from a single-particle unitary.

With photons injected in modes a and b, the unordered-pair coincidence
probabilities for indistinguishable bosons are

    Gamma[i, j] = |U[i,a] U[j,b] + U[j,a] U[i,b]|^2      (i != j)
    Gamma[i, i] = 2 |U[i,a] U[i,b]|^2

and for fully distinguishable photons the same expressions with amplitudes
replaced by intensities.  Each unordered outcome is counted once, so the
upper triangle (diagonal included) sums to one.  Partial distinguishability
is the convex mixture of the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Mode
from .walk import (
    BALANCED_COIN,
    CoinSpec,
    PhaseMap,
    SingleParticleUnitary,
    coin_matrix,
)

ORACLE_MAX_STEP = 8


@dataclass(frozen=True)
class BiphotonInput:
    """A photon pair entering two distinct origin modes.

    ``q`` is the probability that the pair behaves as distinguishable
    particles; the complementary ``1 - q`` is its indistinguishability.
    """

    mode_a: Mode = Mode(0, "L")
    mode_b: Mode = Mode(0, "R")
    q: float = 0.0

    def __post_init__(self):
        if self.mode_a == self.mode_b:
            raise ValueError("the two input modes must differ")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"distinguishability q must lie in [0, 1], got {self.q}")

    @property
    def indistinguishability(self) -> float:
        return 1.0 - self.q


DEFAULT_INPUT = BiphotonInput()


@dataclass(frozen=True)
class CoincidenceMatrix:
    """Symmetric unordered-pair detection probabilities over one step's modes."""

    step: int
    gamma: np.ndarray

    def __post_init__(self):
        g = np.ascontiguousarray(self.gamma, dtype=float)
        n = 2 * (2 * self.step + 1)
        if g.shape != (n, n):
            raise ValueError(f"step {self.step} expects a {n}x{n} matrix, got {g.shape}")
        if np.any(g < -1e-12):
            raise ValueError("coincidence probabilities must be non-negative")
        if np.abs(g - g.T).max() > 1e-12:
            raise ValueError("coincidence matrix must be symmetric")
        total = float(np.triu(g).sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"unordered-pair probabilities sum to {total}, not 1")
        g.flags.writeable = False
        object.__setattr__(self, "gamma", g)

    def pair_probability(self, i: int, j: int) -> float:
        return float(self.gamma[i, j])


def _input_columns(unitary: SingleParticleUnitary, inp: BiphotonInput):
    gram = unitary.matrix.conj().T @ unitary.matrix
    if np.abs(gram - np.eye(gram.shape[0])).max() > 1e-6:
        raise ValueError("unitary columns are not orthonormal (evolution corrupted?)")
    return unitary.column(inp.mode_a), unitary.column(inp.mode_b)


def gamma_indistinguishable(unitary: SingleParticleUnitary,
                            inp: BiphotonInput = DEFAULT_INPUT) -> CoincidenceMatrix:
    """Coincidence matrix of a fully indistinguishable pair (bosonic amplitudes)."""
    u, v = _input_columns(unitary, inp)
    m = np.outer(u, v)
    amp2 = np.abs(m + m.T) ** 2
    np.fill_diagonal(amp2, np.diagonal(amp2) / 2.0)
    return CoincidenceMatrix(step=unitary.step, gamma=amp2)


def gamma_distinguishable(unitary: SingleParticleUnitary,
                          inp: BiphotonInput = DEFAULT_INPUT) -> CoincidenceMatrix:
    """Coincidence matrix of a fully distinguishable pair (intensity products)."""
    u, v = _input_columns(unitary, inp)
    pa, pb = np.abs(u) ** 2, np.abs(v) ** 2
    m = np.outer(pa, pb)
    g = m + m.T
    np.fill_diagonal(g, pa * pb)
    return CoincidenceMatrix(step=unitary.step, gamma=g)


def gamma_partial(unitary: SingleParticleUnitary,
                  inp: BiphotonInput = DEFAULT_INPUT) -> CoincidenceMatrix:
    """Convex q-mixture of the distinguishable and indistinguishable matrices."""
    if inp.q == 0.0:
        return gamma_indistinguishable(unitary, inp)
    if inp.q == 1.0:
        return gamma_distinguishable(unitary, inp)
    g_ind = gamma_indistinguishable(unitary, inp).gamma
    g_dis = gamma_distinguishable(unitary, inp).gamma
    return CoincidenceMatrix(
        step=unitary.step,
        gamma=(1.0 - inp.q) * g_ind + inp.q * g_dis,
    )


def two_particle_oracle(t: int, phase_map: PhaseMap,
                        spec: CoinSpec = BALANCED_COIN,
                        inp: BiphotonInput = DEFAULT_INPUT) -> CoincidenceMatrix:
    """Brute-force check path: evolve the full symmetrized biphoton tensor.

    Phases, coin and shift are applied on each tensor factor directly, never
    through the single-particle unitary, so this is an independent route for
    validating ``gamma_indistinguishable``.  Quadratic state size; refuses
    t > 8.
    """
    if t > ORACLE_MAX_STEP:
        raise ValueError(f"oracle is limited to t <= {ORACLE_MAX_STEP} (got {t})")
    if t > phase_map.t_max:
        raise ValueError(f"phase map covers {phase_map.t_max} steps, requested {t}")
    for mode in (inp.mode_a, inp.mode_b):
        if mode.position != 0:
            raise ValueError(f"input {mode.label()} is off the origin; walks start at x=0")
    c = coin_matrix(spec)

    amp = np.zeros((2, 2), dtype=complex)
    a = 0 if inp.mode_a.coin == "L" else 1
    b = 0 if inp.mode_b.coin == "L" else 1
    amp[a, b] = amp[b, a] = 1.0 / np.sqrt(2.0)

    for s in range(t):
        signs = phase_map.signs(s)
        amp = signs[:, None] * amp * signs[None, :]
        npos = 2 * s + 1
        a4 = amp.reshape(npos, 2, npos, 2)
        a4 = np.einsum("pa,qc,xayc->xpyq", c, c, a4)
        shifted = np.zeros((npos + 2, 2, npos + 2, 2), dtype=complex)
        shifted[2:, 0, 2:, 0] = a4[:, 0, :, 0]
        shifted[2:, 0, :npos, 1] = a4[:, 0, :, 1]
        shifted[:npos, 1, 2:, 0] = a4[:, 1, :, 0]
        shifted[:npos, 1, :npos, 1] = a4[:, 1, :, 1]
        amp = shifted.reshape(2 * (npos + 2), 2 * (npos + 2))

    g = 2.0 * np.abs(amp) ** 2
    np.fill_diagonal(g, np.abs(np.diagonal(amp)) ** 2)
    return CoincidenceMatrix(step=t, gamma=g)

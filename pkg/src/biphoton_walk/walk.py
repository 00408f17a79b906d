"""Single-particle engine of the phase-disordered walk.

One step applies, in order: a diagonal layer of binary {0, pi} phases over
the current step's modes, a beam-splitter coin on each position's (L, R)
pair, and the coin-conditioned shift L -> x+1, R -> x-1.  Composing steps
from the origin yields the single-particle unitary whose columns feed the
two-photon correlation formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import COINS, Mode


@dataclass(frozen=True)
class CoinSpec:
    """Beam-splitter coin given by its intensity transmissivity.

    ``transmissivity`` and ``reflectivity`` are intensity splitting ratios;
    the coin amplitudes are their square roots, with the reflected amplitude
    carrying the factor i of a symmetric beam splitter.
    """

    transmissivity: float = 0.5

    def __post_init__(self):
        t = self.transmissivity
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"transmissivity must lie in [0, 1], got {t}")

    @property
    def reflectivity(self) -> float:
        return 1.0 - self.transmissivity


BALANCED_COIN = CoinSpec(0.5)


def coin_matrix(spec: CoinSpec) -> np.ndarray:
    """2x2 coin in the (L, R) basis: [[sqrt(T), i sqrt(R)], [i sqrt(R), sqrt(T)]]."""
    t = math.sqrt(spec.transmissivity)
    r = 1j * math.sqrt(spec.reflectivity)
    return np.array([[t, r], [r, t]])


def site_count(t_max: int) -> int:
    """Number of binary phase sites a depth-``t_max`` map addresses."""
    return 2 * t_max * t_max


class PhaseMap:
    """Binary {0, pi} phase assignment, one site per (step, mode).

    Step ``s`` (0-based; its phases act before the coin of that step)
    carries one site per mode of the step-``s`` indexing, 2(2s+1) in total.
    A stored 1 means a pi phase.  Sites off the parity-reachable sublattice
    are storable but act on zero amplitude.
    """

    __slots__ = ("_bits",)

    def __init__(self, bits):
        arrays = []
        for s, b in enumerate(bits):
            b = np.ascontiguousarray(b, dtype=np.uint8)
            expected = 2 * (2 * s + 1)
            if b.shape != (expected,):
                raise ValueError(
                    f"step {s} needs {expected} phase sites, got shape {b.shape}"
                )
            if b.size and b.max() > 1:
                raise ValueError("phase bits must be 0 or 1")
            b.flags.writeable = False
            arrays.append(b)
        self._bits = tuple(arrays)

    @property
    def t_max(self) -> int:
        return len(self._bits)

    def bits(self, step: int) -> np.ndarray:
        """Read-only bit array over the step-``step`` mode indexing."""
        return self._bits[step]

    def signs(self, step: int) -> np.ndarray:
        """Phase factors exp(i*phi) as real +1/-1 values."""
        return 1.0 - 2.0 * self._bits[step].astype(float)

    def flat(self) -> np.ndarray:
        """All bits concatenated in canonical (step-major) site order."""
        if not self._bits:
            return np.zeros(0, dtype=np.uint8)
        return np.concatenate(self._bits)

    def pi_sites(self) -> list[tuple[int, int, str]]:
        """Sorted (step, position, coin) triples of the pi-valued sites."""
        sites = []
        for s, b in enumerate(self._bits):
            for slot in np.flatnonzero(b):
                x, c = divmod(int(slot), 2)
                sites.append((s, x - s, COINS[c]))
        return sites

    def key(self) -> bytes:
        """Compact hashable identity, e.g. for counting distinct maps."""
        return bytes([self.t_max]) + np.packbits(self.flat()).tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhaseMap):
            return NotImplemented
        return self.t_max == other.t_max and all(
            np.array_equal(a, b) for a, b in zip(self._bits, other._bits)
        )

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"PhaseMap(t_max={self.t_max}, pi_sites={self.pi_sites()!r})"

    def __reduce__(self):
        return (PhaseMap.from_flat, (self.t_max, self.flat()))

    @classmethod
    def zeros(cls, t_max: int) -> "PhaseMap":
        """The ordered (disorder-free) configuration."""
        return cls([np.zeros(2 * (2 * s + 1), dtype=np.uint8) for s in range(t_max)])

    @classmethod
    def from_flat(cls, t_max: int, flat) -> "PhaseMap":
        flat = np.asarray(flat, dtype=np.uint8)
        if flat.shape != (site_count(t_max),):
            raise ValueError(
                f"depth-{t_max} map needs {site_count(t_max)} bits, got {flat.shape}"
            )
        bits, lo = [], 0
        for s in range(t_max):
            n = 2 * (2 * s + 1)
            bits.append(flat[lo : lo + n])
            lo += n
        return cls(bits)

    @classmethod
    def from_pi_sites(cls, t_max: int, sites) -> "PhaseMap":
        """Build a map from (step, position, coin) triples; absent sites are 0."""
        bits = [np.zeros(2 * (2 * s + 1), dtype=np.uint8) for s in range(t_max)]
        for entry in sites:
            step, x, coin = entry
            if not 0 <= step < t_max:
                raise ValueError(f"site {tuple(entry)!r}: step outside 0..{t_max - 1}")
            if coin not in COINS:
                raise ValueError(f"site {tuple(entry)!r}: coin must be 'L' or 'R'")
            if abs(x) > step:
                raise ValueError(f"site {tuple(entry)!r}: |position| exceeds the step")
            bits[step][2 * (x + step) + COINS.index(coin)] = 1
        return cls(bits)


def _step_columns(cols: np.ndarray, step_index: int, phase_map: PhaseMap,
                  spec: CoinSpec) -> np.ndarray:
    """Advance a (modes, k) block of amplitude columns by one step."""
    work = cols * phase_map.signs(step_index)[:, None]
    ct = math.sqrt(spec.transmissivity)
    cr = 1j * math.sqrt(spec.reflectivity)
    w_l, w_r = work[0::2], work[1::2]
    coined_l = ct * w_l + cr * w_r
    coined_r = cr * w_l + ct * w_r
    npos = 2 * step_index + 1
    out = np.zeros((2 * (npos + 2), cols.shape[1]), dtype=complex)
    out[0::2][2:] = coined_l   # L moves x -> x+1
    out[1::2][:npos] = coined_r  # R moves x -> x-1
    return out


def apply_step(state, step_index: int, phase_map: PhaseMap,
               spec: CoinSpec = BALANCED_COIN) -> np.ndarray:
    """One walk step on an amplitude vector over the step-``step_index`` modes.

    Returns the vector over the step ``step_index + 1`` indexing; the norm is
    preserved exactly up to rounding.
    """
    state = np.asarray(state, dtype=complex)
    n_in = 2 * (2 * step_index + 1)
    if state.shape != (n_in,):
        raise ValueError(
            f"state has shape {state.shape}, step {step_index} expects ({n_in},)"
        )
    if abs(np.linalg.norm(state) - 1.0) > 1e-9:
        raise ValueError("state must be normalized on the reachable subspace")
    return _step_columns(state[:, None], step_index, phase_map, spec)[:, 0]


DEFAULT_INPUTS = (Mode(0, "L"), Mode(0, "R"))


@dataclass(frozen=True)
class SingleParticleUnitary:
    """Amplitudes U[out_mode, in_mode] of the ``step``-deep walk.

    Rows follow the step-``step`` mode indexing; one column per input mode
    (origin modes of the step-0 indexing).
    """

    step: int
    matrix: np.ndarray
    inputs: tuple[Mode, ...]

    def input_index(self, mode: Mode) -> int:
        try:
            return self.inputs.index(mode)
        except ValueError:
            raise ValueError(f"{mode.label()} is not an input column") from None

    def column(self, mode: Mode) -> np.ndarray:
        return self.matrix[:, self.input_index(mode)]


def build_unitary(t: int, phase_map: PhaseMap, spec: CoinSpec = BALANCED_COIN,
                  inputs: tuple[Mode, ...] = DEFAULT_INPUTS) -> SingleParticleUnitary:
    """Evolve each input mode for ``t`` steps and collect the columns."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t > phase_map.t_max:
        raise ValueError(f"phase map covers {phase_map.t_max} steps, requested {t}")
    inputs = tuple(inputs)
    cols = np.zeros((2, len(inputs)), dtype=complex)
    for j, mode in enumerate(inputs):
        if mode.position != 0:
            raise ValueError(f"input {mode.label()} is off the origin; walks start at x=0")
        cols[COINS.index(mode.coin), j] = 1.0
    for s in range(t):
        cols = _step_columns(cols, s, phase_map, spec)
    cols.flags.writeable = False
    return SingleParticleUnitary(step=t, matrix=cols, inputs=inputs)

"""Mode bookkeeping for the one-dimensional walk lattice.

Every matrix in the package (single-particle unitaries, coincidence and
violation matrices) is indexed by the modes of a fixed step: positions
-t..t, each carrying the two internal coin states L and R.  The ordering
is ascending position with L before R, so matrix axes read left to right
the way the reporting tools draw them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

COINS = ("L", "R")


class Mode(NamedTuple):
    """One walk mode: a lattice position plus the internal coin state."""

    position: int
    coin: str

    def label(self) -> str:
        """Render the mode in the "x_sigma" form used by all output files."""
        return f"{self.position}_{self.coin}"

    @classmethod
    def from_label(cls, text: str) -> "Mode":
        pos, sep, coin = text.rpartition("_")
        if not sep or coin not in COINS:
            raise ValueError(f"bad mode label {text!r} (expected e.g. '-2_R')")
        try:
            position = int(pos)
        except ValueError:
            raise ValueError(f"bad mode label {text!r} (position is not an integer)") from None
        return cls(position, coin)


@dataclass(frozen=True)
class ModeIndexing:
    """Dense canonical ordering of the modes present after ``step`` steps.

    Positions run from -step to step, L before R at each position, for a
    total of 2(2*step+1) slots.  Modes off the parity-reachable sublattice
    keep their slot (they just carry zero amplitude), so all matrices at a
    given step share one shape regardless of the phase configuration.
    """

    step: int
    modes: tuple[Mode, ...]

    def __len__(self) -> int:
        return len(self.modes)

    def index(self, mode: Mode) -> int:
        if mode.coin not in COINS:
            raise ValueError(f"unknown coin state {mode.coin!r}")
        if abs(mode.position) > self.step:
            raise ValueError(
                f"position {mode.position} lies outside the step-{self.step} lattice"
            )
        return 2 * (mode.position + self.step) + COINS.index(mode.coin)

    def labels(self) -> list[str]:
        return [m.label() for m in self.modes]


def enumerate_modes(step: int) -> ModeIndexing:
    """Canonical mode ordering at ``step``: ascending position, L before R."""
    if step < 0:
        raise ValueError("step must be non-negative")
    modes = tuple(Mode(x, c) for x in range(-step, step + 1) for c in COINS)
    return ModeIndexing(step=step, modes=modes)


def mode_index(indexing: ModeIndexing, mode: Mode) -> int:
    """Index of ``mode`` in the canonical ordering; inverse of enumeration."""
    return indexing.index(mode)

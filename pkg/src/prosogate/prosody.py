"""Per-syllable acoustic measurement records and feature-vector assembly.

No signal processing happens here: records arrive already measured
(synthetic, in this repository). A feature vector for syllable *i*
concatenates the per-syllable block for positions i-6 .. i+6, one
validity flag per position (0 where the context runs off the turn and
the block is zero-padded), the current syllable's pause lengths, and its
F0 / energy regression-coefficient blocks.

The default layout totals 242 values:

    15 values x 13 positions   195
    validity flags              13
    pause before / after         2
    F0 regression               16
    energy regression           16
                               ---
                               242

The composition (not the total) is a layout decision; alternative
layouts, including masked feature subsets, are first-class.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

PER_SYLLABLE_VALUES = 15


class LayoutError(ValueError):
    """Record does not fit the layout (wrong regression block length)."""


@dataclass
class SyllableRecord:
    nucleus_dur: float = 0.0  # normalized, dimensionless
    f0_min: float = 0.0  # semitone-scaled
    f0_max: float = 0.0
    f0_onset: float = 0.0
    f0_offset: float = 0.0
    f0_min_pos: float = 0.0  # seconds, relative to the syllable anchor
    f0_max_pos: float = 0.0
    f0_onset_pos: float = 0.0
    f0_offset_pos: float = 0.0
    energy_max: float = 0.0
    energy_max_pos: float = 0.0
    energy_mean: float = 0.0
    f0_mean: float = 0.0
    accent: bool = False  # carries the lexical word accent
    word_final: bool = False
    pause_before: float = 0.0  # seconds, 0 if none
    pause_after: float = 0.0
    f0_regression: list = field(default_factory=list)
    energy_regression: list = field(default_factory=list)

    def __post_init__(self):
        if self.pause_before < 0 or self.pause_after < 0:
            raise ValueError("pause lengths must be >= 0")

    def block(self):
        return [
            self.nucleus_dur,
            self.f0_min, self.f0_max, self.f0_onset, self.f0_offset,
            self.f0_min_pos, self.f0_max_pos, self.f0_onset_pos,
            self.f0_offset_pos,
            self.energy_max, self.energy_max_pos,
            self.energy_mean, self.f0_mean,
            1.0 if self.accent else 0.0,
            1.0 if self.word_final else 0.0,
        ]

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True)
class FeatureLayout:
    layout_id: str = "default-242"
    context_radius: int = 6
    f0_reg_len: int = 16
    energy_reg_len: int = 16
    # Optional feature subset: indices into the full vector. None = all.
    mask: tuple | None = None

    @property
    def positions(self):
        return 2 * self.context_radius + 1

    @property
    def full_dim(self):
        return (PER_SYLLABLE_VALUES * self.positions + self.positions
                + 2 + self.f0_reg_len + self.energy_reg_len)

    @property
    def dim(self):
        return len(self.mask) if self.mask is not None else self.full_dim


DEFAULT_LAYOUT = FeatureLayout()


def extract_features(syllables, index, layout=DEFAULT_LAYOUT):
    """Assemble the feature vector for one syllable of a turn.

    Out-of-range context positions contribute a zero block and a 0
    validity flag. Returns a float64 numpy vector of length layout.dim.
    """
    if not 0 <= index < len(syllables):
        raise IndexError(f"syllable index {index} out of range")
    values = []
    flags = []
    for off in range(-layout.context_radius, layout.context_radius + 1):
        j = index + off
        if 0 <= j < len(syllables):
            values.extend(syllables[j].block())
            flags.append(1.0)
        else:
            values.extend([0.0] * PER_SYLLABLE_VALUES)
            flags.append(0.0)
    cur = syllables[index]
    if len(cur.f0_regression) != layout.f0_reg_len:
        raise LayoutError(
            f"F0 regression block has {len(cur.f0_regression)} coefficients, "
            f"layout {layout.layout_id!r} expects {layout.f0_reg_len}")
    if len(cur.energy_regression) != layout.energy_reg_len:
        raise LayoutError(
            f"energy regression block has {len(cur.energy_regression)} "
            f"coefficients, layout {layout.layout_id!r} expects "
            f"{layout.energy_reg_len}")
    vec = np.array(
        values + flags + [cur.pause_before, cur.pause_after]
        + list(cur.f0_regression) + list(cur.energy_regression),
        dtype=np.float64)
    if layout.mask is not None:
        vec = vec[list(layout.mask)]
    return vec

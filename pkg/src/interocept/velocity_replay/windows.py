"""Sliding-window segmentation, smoothing and pair construction."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum

from ..errors import ProfileTooShort, TooFewWindows
from ..tracking import VelocityProfile


@dataclass(frozen=True)
class Window:
    values: tuple[float, ...]
    start_index: int
    context_key: str

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


class PairLabel(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class WindowPair:
    a: Window
    b: Window
    label: PairLabel


def segment(profile: VelocityProfile, w: int, stride: int, context_key: str) -> list[Window]:
    """floor((N-W)/stride)+1 windows; the ragged tail is dropped."""
    if w < 2:
        raise ValueError("window length must be >= 2")
    if not 1 <= stride <= w:
        raise ValueError("stride must be in [1, W]")
    n = len(profile.samples)
    if n < w:
        raise ProfileTooShort(f"{n} samples < window length {w}")
    return [
        Window(profile.samples[start:start + w], start, context_key)
        for start in range(0, n - w + 1, stride)
    ]


def gaussian_smooth(window: Window, sigma: float) -> Window:
    """Truncated-Gaussian convolution, kernel renormalized at boundaries.

    Renormalization keeps constant signals exactly constant at the edges;
    it is not mass-preserving there (an impulse near a boundary sums to
    slightly more than its input mass).
    """
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    radius = math.ceil(3 * sigma)
    kernel = [math.exp(-(k * k) / (2 * sigma * sigma)) for k in range(-radius, radius + 1)]
    n = len(window.values)
    out = []
    for p in range(n):
        acc = 0.0
        weight = 0.0
        for k in range(-radius, radius + 1):
            j = p + k
            if 0 <= j < n:
                g = kernel[k + radius]
                acc += window.values[j] * g
                weight += g
        out.append(acc / weight)
    return Window(tuple(out), window.start_index, window.context_key)


def make_pairs(windows, n_negative_per_window: int, gap: int, seed: int) -> list[WindowPair]:
    """Consecutive windows pair Positive; distant ones (seeded) pair Negative.

    Windows whose candidate set is empty (possible near the middle of short
    sequences) contribute no negatives; draws are with replacement.
    """
    if gap < 2:
        raise ValueError("gap must be >= 2")
    if len(windows) < gap + 2:
        raise TooFewWindows(f"{len(windows)} windows < gap + 2 = {gap + 2}")
    rng = random.Random(seed)
    pairs = [
        WindowPair(a, b, PairLabel.POSITIVE) for a, b in zip(windows, windows[1:])
    ]
    for i, w in enumerate(windows):
        candidates = [j for j in range(len(windows)) if abs(i - j) >= gap]
        if not candidates:
            continue
        for _ in range(n_negative_per_window):
            pairs.append(WindowPair(w, windows[rng.choice(candidates)], PairLabel.NEGATIVE))
    return pairs

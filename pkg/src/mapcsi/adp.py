"""Angle-delay profile: oversampled DFT projection of the CSI matrix and peak picking.

Column ``q`` of the angle matrix is the array response at ``theta = q*pi/n_tt``
and column ``q`` of the delay matrix matches a sampled delay of
``q*n_c/n_cc``, so :func:`bin_to_aod` and :func:`bin_to_delay` invert the
matched filter exactly.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .channel import SystemConfig

DEFAULT_SUPPRESS_BINS = 6
DEFAULT_REL_THRESHOLD = 0.1


class AdpPeak(NamedTuple):
    angle_bin: int
    delay_bin: int
    magnitude: float


@lru_cache(maxsize=16)
def _dft_v(n_t: int, n_tt: int) -> np.ndarray:
    z = np.arange(n_t)[:, None]
    q = np.arange(n_tt)[None, :]
    v = np.exp(-1j * np.pi * z * np.cos(q * np.pi / n_tt))
    v.setflags(write=False)
    return v


@lru_cache(maxsize=16)
def _dft_f(n_c: int, n_cc: int) -> np.ndarray:
    z = np.arange(n_c)[:, None]
    q = np.arange(n_cc)[None, :]
    f = np.exp(2j * np.pi * z * q / n_cc)
    f.setflags(write=False)
    return f


def dft_v(cfg: SystemConfig) -> np.ndarray:
    """Angle DFT matrix, ``n_t x n_tt``, ``V[z, q] = exp(-j pi z cos(q pi / n_tt))``."""
    return _dft_v(cfg.n_t, cfg.n_tt)


def dft_f(cfg: SystemConfig) -> np.ndarray:
    """Delay DFT matrix, ``n_c x n_cc``, ``F[z, q] = exp(j 2 pi z q / n_cc)``."""
    return _dft_f(cfg.n_c, cfg.n_cc)


def compute_adp(h: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    h = np.asarray(h)
    if h.shape != (cfg.n_t, cfg.n_c):
        raise ValueError(f"CSI shape {h.shape} does not match ({cfg.n_t}, {cfg.n_c})")
    return np.abs(dft_v(cfg).conj().T @ h @ dft_f(cfg))


def default_suppression(cfg: SystemConfig) -> tuple[int, int]:
    """Suppression half-widths: 6 bins at a 180-bin grid, scaled with grid size."""
    sa = max(1, round(DEFAULT_SUPPRESS_BINS * cfg.n_tt / 180))
    sd = max(1, round(DEFAULT_SUPPRESS_BINS * cfg.n_cc / 180))
    return sa, sd


def extract_peaks(
    a: np.ndarray,
    n_max: int,
    suppress_a: int = DEFAULT_SUPPRESS_BINS,
    suppress_d: int = DEFAULT_SUPPRESS_BINS,
    rel_threshold: float = DEFAULT_REL_THRESHOLD,
) -> list[AdpPeak]:
    """Strongest strict local maxima of the ADP, greedily non-max suppressed.

    Neither axis wraps. Peaks weaker than ``rel_threshold`` times the global
    maximum are dropped, so fewer than ``n_max`` peaks may come back.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if not 0 < rel_threshold < 1:
        raise ValueError("rel_threshold must lie in (0, 1)")
    a = np.asarray(a, dtype=float)
    top = float(a.max()) if a.size else 0.0
    if top <= 0:
        return []

    footprint = np.ones((2 * suppress_a + 1, 2 * suppress_d + 1), dtype=bool)
    footprint[suppress_a, suppress_d] = False
    neighbours = ndimage.maximum_filter(a, footprint=footprint, mode="constant", cval=-np.inf)
    is_max = (a > neighbours) & (a >= rel_threshold * top)

    rows, cols = np.nonzero(is_max)
    order = np.lexsort((cols, rows, -a[rows, cols]))
    taken = np.zeros(a.shape, dtype=bool)
    peaks: list[AdpPeak] = []
    for k in order:
        r, c = int(rows[k]), int(cols[k])
        if taken[r, c]:
            continue
        peaks.append(AdpPeak(r, c, float(a[r, c])))
        if len(peaks) == n_max:
            break
        taken[max(0, r - suppress_a): r + suppress_a + 1, max(0, c - suppress_d): c + suppress_d + 1] = True
    return peaks


def bin_to_aod(q_a: int, cfg: SystemConfig) -> float:
    if not 0 <= q_a < cfg.n_tt:
        raise IndexError(f"angle bin {q_a} outside [0, {cfg.n_tt})")
    return q_a * np.pi / cfg.n_tt


def bin_to_delay(q_d: int, cfg: SystemConfig) -> float:
    if not 0 <= q_d < cfg.n_cc:
        raise IndexError(f"delay bin {q_d} outside [0, {cfg.n_cc})")
    return q_d * cfg.n_c * cfg.t_s / cfg.n_cc


def save_adp_csv(path, a: np.ndarray) -> None:
    """One row per angle bin, one column per delay bin."""
    np.savetxt(Path(path), np.asarray(a), delimiter=",", fmt="%.10g")

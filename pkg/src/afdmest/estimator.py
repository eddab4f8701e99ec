"""Pilot frame construction and the joint fractional delay/Doppler estimator.

Estimation runs in three stages on a received frame:

1. fractional Doppler: a scalar search over the compensation phase that
   maximizes the peak-to-sidelobe power ratio (PSPR) of the pilot region
   readout. Coarse grid first, then golden-section refinement. Only the
   pilot region of the transform output is computed inside the loop.

2. integer decode: the peak position of the compensated readout sits on a
   comb with spacing C; its position splits into an integer delay and an
   integer Doppler by nearest-multiple rounding.

3. fractional delay: the ratio in dB of the two comb taps bracketing the
   true delay is a monotone function of the delay fraction (see
   effective.elg_theory); reading it off the profile and inverting the
   curve gives the fraction, and picks the bracket's lower integer as the
   delay floor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AfdmGrid, daft_matrix
from .effective import elg_invert

__all__ = [
    "PilotLayout",
    "SearchConfig",
    "Estimate",
    "build_pilot_frame",
    "profile_bins",
    "read_profile",
    "pspr",
    "compensate",
    "integer_estimate",
    "estimate_doppler_frac",
    "estimate_delay_frac",
    "joint_estimate",
]


@dataclass(frozen=True)
class PilotLayout:
    """Single embedded pilot with a zero guard band on both sides.

    The pilot sits at ``pilot_index`` with amplitude 10^(ep_ei_db/20), i.e.
    ``ep_ei_db`` is the pilot-to-data energy ratio per symbol in dB. The
    guard width comes from the grid (enough slots to keep data sidelobes
    out of the pilot readout region), data fills the rest with unit-energy
    QPSK.
    """

    pilot_index: int = 0
    ep_ei_db: float = 10.0

    @property
    def pilot_amplitude(self) -> float:
        return 10.0 ** (self.ep_ei_db / 20.0)

    def guard_slots(self, grid: AfdmGrid) -> np.ndarray:
        # a full Q on each side: the composite response is read at bins
        # pilot - j for j up to Q, so the reserve below the pilot must not
        # stop one slot short of the search-box corner
        q = grid.guard_width
        lo = (self.pilot_index + np.arange(1, q + 1)) % grid.n
        hi = (self.pilot_index + np.arange(-q, 0)) % grid.n
        return np.concatenate([lo, hi])

    def data_slots(self, grid: AfdmGrid) -> np.ndarray:
        q = grid.guard_width
        return (self.pilot_index + np.arange(q + 1, grid.n - q)) % grid.n


def build_pilot_frame(
    grid: AfdmGrid, layout: PilotLayout, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Transform-domain frame: pilot, zero guards, QPSK data.

    With no rng the data slots stay zero (pilot-only frame, useful for
    calibration runs).
    """
    x = np.zeros(grid.n, dtype=complex)
    x[layout.pilot_index] = layout.pilot_amplitude
    if rng is not None:
        slots = layout.data_slots(grid)
        bits = rng.integers(0, 2, size=(slots.size, 2))
        x[slots] = ((2 * bits[:, 0] - 1) + 1j * (2 * bits[:, 1] - 1)) / np.sqrt(2.0)
    return x


def profile_bins(grid: AfdmGrid) -> np.ndarray:
    """Readout offsets j covering every decodeable peak plus one comb period
    of margin each side for the PSPR window and the late gate."""
    c, half = grid.n_seg, grid.n_seg // 2
    return np.arange(-half - c, c * grid.l_max + (c - half) + c)


def read_profile(grid: AfdmGrid, y: np.ndarray, layout: PilotLayout) -> np.ndarray:
    """Pilot readout: p[j] = |y[(pilot_index - j) mod N]| over profile_bins.

    Positive j walks toward larger equivalent delay; the channel peak for
    integer delay l and Doppler k appears at j = k + C*l.
    """
    j = profile_bins(grid)
    return np.abs(y[(layout.pilot_index - j) % grid.n])


def pspr(p: np.ndarray, peak_pos: int, c: int) -> float:
    """Peak-to-sidelobe power ratio inside one comb period around the peak.

    Ratio of the peak power to the mean power of the C-sample window
    centered on the peak, peak excluded but counted in the normalization
    (a flat profile scores C/(C-1), a lone spike +inf).
    """
    half = c // 2
    window = p[peak_pos - half : peak_pos + (c - half)]
    denom = (np.sum(window**2) - p[peak_pos] ** 2) / c
    if denom <= 0.0:
        return np.inf
    return float(p[peak_pos] ** 2 / denom)


def compensate(r: np.ndarray, kappa: float) -> np.ndarray:
    """Undo a fractional Doppler kappa on a received frame body."""
    n = r.shape[0]
    return r * np.exp(2j * np.pi * kappa * np.arange(n) / n)


def _region_rows(grid: AfdmGrid, layout: PilotLayout) -> tuple[np.ndarray, np.ndarray]:
    # demodulation restricted to the pilot readout bins: rows of the inverse
    # transform for output indices (pilot - j) mod N, j over profile_bins
    j = profile_bins(grid)
    bins = (layout.pilot_index - j) % grid.n
    u = daft_matrix(grid)
    return np.conj(u[:, bins]).T, j


def _inner_slice(grid: AfdmGrid) -> slice:
    # positions of the decodeable peak range inside the profile array
    # (strips the one-comb-period margin on each side)
    return slice(grid.n_seg, -grid.n_seg)


def integer_estimate(
    grid: AfdmGrid, p: np.ndarray
) -> tuple[int, int, int, bool]:
    """Decode the profile peak into integer delay and Doppler.

    Returns (peak_js, doppler_int, delay_round, flagged): the peak offset on
    the j axis, its split js = k + C*l with k the nearest centered residue,
    and a flag when the split lands outside the designed search ranges.
    """
    c = grid.n_seg
    j = profile_bins(grid)
    inner = _inner_slice(grid)
    pos = inner.start + int(np.argmax(p[inner]))
    js = int(j[pos])
    l_round = int(np.round(js / c))
    k = js - c * l_round
    flagged = abs(k) > grid.k_max or not (0 <= l_round <= grid.l_max)
    return js, k, l_round, flagged


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the fractional Doppler search."""

    coarse_steps: int = 64
    refine_tol: float = 1e-3


@dataclass(frozen=True)
class Estimate:
    """Joint channel estimate with its quality metadata.

    ``peak_index`` is the readout peak position on the equivalent-delay
    axis, stored modulo N (so a peak at k + C*l with k < 0, l = 0 shows up
    near N rather than as a negative number).
    """

    delay_int: int
    delay_frac: float
    doppler_int: int
    doppler_frac: float
    pspr: float
    peak_index: int
    flagged: bool

    @property
    def delay(self) -> float:
        return self.delay_int + self.delay_frac

    @property
    def doppler(self) -> float:
        return self.doppler_int + self.doppler_frac


def _golden_max(f, a: float, b: float, tol: float) -> float:
    gr = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def estimate_doppler_frac(
    grid: AfdmGrid,
    r: np.ndarray,
    layout: PilotLayout,
    cfg: SearchConfig = SearchConfig(),
) -> tuple[float, float]:
    """Fractional Doppler by closed-loop PSPR maximization.

    Sweeps candidate compensations on a coarse grid over [0, 1), then
    golden-section refines the best cell. Returns (kappa_hat, pspr_at_opt).
    The PSPR objective is evaluated on the pilot readout region only.
    """
    rows, _ = _region_rows(grid, layout)
    n = grid.n
    nn = np.arange(n)
    inner = _inner_slice(grid)
    c = grid.n_seg

    def objective(kappa: float) -> float:
        y_region = rows @ (r * np.exp(2j * np.pi * kappa * nn / n))
        p = np.abs(y_region)
        pos = inner.start + int(np.argmax(p[inner]))
        return pspr(p, pos, c)

    steps = cfg.coarse_steps
    cand = (np.arange(steps) + 0.5) / steps
    scores = [objective(k) for k in cand]
    best = int(np.argmax(scores))
    lo = cand[best] - 1.0 / steps
    hi = cand[best] + 1.0 / steps
    kappa = _golden_max(objective, lo, hi, cfg.refine_tol) % 1.0
    return kappa, objective(kappa)


def estimate_delay_frac(
    grid: AfdmGrid, p: np.ndarray, peak_pos: int, l_round: int
) -> tuple[int, float, float]:
    """Fractional delay from the early/late comb taps around the peak.

    Picks the delay bracket by comparing the taps one comb period either
    side of the peak, forms the early-minus-late ratio in dB, and inverts
    the theoretical discriminator. Returns (delay_floor, iota_hat, a_db)
    where the full delay estimate is delay_floor + iota_hat.
    """
    c = grid.n_seg
    tiny = 1e-300
    # Peak towering over the late tap means the delay is integer at the
    # peak itself; decide that before consulting the early tap, which in
    # this regime is a numerical-noise null that would tip the bracket
    # arbitrarily.
    a_right = 10.0 * (np.log10(max(p[peak_pos], tiny)) - np.log10(max(p[peak_pos + c], tiny)))
    if elg_invert(a_right) == 0.0:
        return l_round, 0.0, a_right
    if p[peak_pos - c] > p[peak_pos + c]:
        early, floor = peak_pos - c, l_round - 1
    else:
        early, floor = peak_pos, l_round
    a_db = 10.0 * (np.log10(max(p[early], tiny)) - np.log10(max(p[early + c], tiny)))
    return floor, elg_invert(a_db), a_db


def joint_estimate(
    grid: AfdmGrid,
    r: np.ndarray,
    layout: PilotLayout,
    cfg: SearchConfig = SearchConfig(),
) -> Estimate:
    """Full three-stage estimate from a received frame body (prefix stripped)."""
    kappa, score = estimate_doppler_frac(grid, r, layout, cfg)
    rows, j = _region_rows(grid, layout)
    p = np.abs(rows @ compensate(r, kappa))
    js, k, l_round, flagged = integer_estimate(grid, p)
    peak_pos = int(np.searchsorted(j, js))
    floor, iota, _ = estimate_delay_frac(grid, p, peak_pos, l_round)
    return Estimate(
        delay_int=floor,
        delay_frac=iota,
        doppler_int=k,
        doppler_frac=kappa,
        pspr=score,
        peak_index=js % grid.n,
        flagged=flagged,
    )

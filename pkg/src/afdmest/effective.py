"""Effective channel in the transform domain: exact entries and the
closed-form magnitude envelope the estimator is built on.

For a single path with full delay L (integer l, fraction iota) and full
Doppler K (integer k, fraction kappa), the demodulated pilot energy lands
on a comb of taps spaced C apart on the output axis. ``exact_channel_sum``
evaluates the defining N-term sum with no approximation and is the oracle
everything else is checked against. ``envelope_magnitude`` is the
two-factor closed form (a Dirichlet-style comb factor times a broad
sinc width factor) that predicts |exact sum| to a few percent.

The early-late-gate helpers at the bottom turn the ratio of two comb taps
adjacent in delay into a dB discriminator that is exactly
10*log10((1-iota)/iota) under the envelope model; the estimator inverts it
through a table.
"""

from __future__ import annotations

import numpy as np

from .channel import LosChannel
from .core import AfdmGrid

__all__ = [
    "segment_boundaries",
    "segment_index",
    "exact_channel_sum",
    "exact_spectrum",
    "exact_profile",
    "effective_gain",
    "effective_column",
    "envelope_magnitude",
    "envelope_profile",
    "elg_theory",
    "elg_invert",
]


def segment_boundaries(grid: AfdmGrid, sub: int) -> np.ndarray:
    """Last sample index of each frequency-wrap segment for one subcarrier.

    Subcarrier ``sub`` wraps C times across the frame; segment q (q = 0..C)
    ends at sample floor((q*N - sub)/C) for q >= 1, and the returned array
    holds those C integers in increasing order. Segment 0 starts at sample 0
    and the final boundary is N - 1 - floor(sub/C) shy of the frame end only
    through the residual segment C.
    """
    c, n = grid.n_seg, grid.n
    q = np.arange(1, c + 1)
    return (q * n - sub) // c


def segment_index(grid: AfdmGrid, sub: int, u) -> np.ndarray:
    """Frequency-wrap count of subcarrier ``sub`` at sample position ``u``.

    ``u`` may be fractional (the channel delays by non-integer amounts);
    the count is the number of segment boundaries strictly below u.
    """
    bounds = segment_boundaries(grid, sub)
    return np.searchsorted(bounds, np.atleast_1d(u), side="left").reshape(np.shape(u))


def _wrap_phase(grid: AfdmGrid, m_src: int, ch: LosChannel) -> np.ndarray:
    # e^(i*2*pi*(-l_eq*n/N + iota*q_n)) for n = 0..N-1, the inner factor of
    # the exact sum that does not depend on the output bin.
    n = grid.n
    l_eq = ch.doppler + grid.n_seg * ch.delay
    nn = np.arange(n)
    q = segment_index(grid, m_src, (nn - ch.delay) % n)
    return np.exp(2j * np.pi * (-l_eq * nn / n + ch.delay_frac * q))


def exact_channel_sum(grid: AfdmGrid, m_out: int, m_src: int, ch: LosChannel) -> complex:
    """Exact inner sum of the effective channel entry (m_out, m_src).

    F = sum_n exp(i*2*pi*(n*(m_src - m_out - l_eq)/N + iota*q((n - L) mod N)))

    where l_eq = K + C*L is the equivalent shift on the output axis and q is
    the wrap count of the source subcarrier at the delayed sample position.
    |F| never exceeds N and equals N exactly for an integer channel on its
    peak bin.
    """
    g = _wrap_phase(grid, m_src, ch)
    nn = np.arange(grid.n)
    return complex(np.sum(g * np.exp(2j * np.pi * nn * (m_src - m_out) / grid.n)))


def exact_spectrum(grid: AfdmGrid, m_src: int, ch: LosChannel) -> np.ndarray:
    """exact_channel_sum(m, m_src) for every output bin m at once, via one FFT."""
    g = _wrap_phase(grid, m_src, ch)
    spec = np.fft.fft(g)
    m = np.arange(grid.n)
    return spec[(m - m_src) % grid.n]


def exact_profile(grid: AfdmGrid, m_src: int, ch: LosChannel) -> np.ndarray:
    """|exact_channel_sum(m, m_src)| for every output bin m."""
    return np.abs(exact_spectrum(grid, m_src, ch))


def effective_gain(grid: AfdmGrid, m_out: int, m_src: int, ch: LosChannel) -> complex:
    """Full effective-channel entry, leading phase included.

    gain/N * exp(i*2*pi*(c1*L^2 - c2*(m_out^2 - m_src^2) - L*m_src/N)) * F
    """
    n = grid.n
    lead = np.exp(
        2j
        * np.pi
        * (
            grid.c1 * ch.delay**2
            - grid.c2 * (m_out**2 - m_src**2)
            - ch.delay * m_src / n
        )
    )
    return ch.gain / n * lead * exact_channel_sum(grid, m_out, m_src, ch)


def effective_column(
    grid: AfdmGrid, m_src: int, ch: LosChannel, bins: np.ndarray
) -> np.ndarray:
    """effective_gain at several output bins, sharing one spectrum pass.

    This is the model response a single source symbol produces across the
    requested output bins; the 2-D search baseline correlates measured pilot
    readouts against it.
    """
    n = grid.n
    bins = np.asarray(bins) % n
    lead = np.exp(
        2j
        * np.pi
        * (
            grid.c1 * ch.delay**2
            - grid.c2 * (bins.astype(float) ** 2 - float(m_src) ** 2)
            - ch.delay * m_src / n
        )
    )
    return ch.gain / n * lead * exact_spectrum(grid, m_src, ch)[bins]


def _comb_factor(x: np.ndarray, c: int, n: int) -> np.ndarray:
    # N*|sinc(x)/sinc(x/C)|. At x = j*C (j != 0) both sincs vanish; inside a
    # 1e-9 guard band around those points the ratio is replaced by its limit
    # cos(pi*x)/cos(pi*x/C).
    x = np.asarray(x, dtype=float)
    j = np.round(x / c)
    singular = (j != 0) & (np.abs(x - j * c) < 1e-9)
    out = np.empty_like(x)
    safe = ~singular
    out[safe] = np.abs(np.sinc(x[safe]) / np.sinc(x[safe] / c))
    if singular.any():
        xs = x[singular]
        out[singular] = np.abs(np.cos(np.pi * xs) / np.cos(np.pi * xs / c))
    return n * out


def envelope_magnitude(grid: AfdmGrid, m_out, m_src: int, ch: LosChannel) -> np.ndarray:
    """Closed-form prediction of |exact_channel_sum| at the given output bins.

    Product of two factors in the bin offset u = m_src - m_out (taken modulo
    N, re-centered so the window of width N is symmetric about the comb):

    * comb factor N*|sinc(x)/sinc(x/C)| with x = u - (K + C*l): period-C
      spikes whose heights are set by the fractional Doppler;
    * width factor |sinc((u - (K + C*L))/C)|: a broad lobe centered on the
      full equivalent shift, sliding with the fractional delay.
    """
    n, c = grid.n, grid.n_seg
    l_eq = ch.doppler + c * ch.delay
    u_raw = (np.asarray(m_src) - np.asarray(m_out)) % n
    u = (u_raw - l_eq + n / 2) % n - n / 2 + l_eq
    x = u - (ch.doppler + c * ch.delay_int)
    theta = np.abs(np.sinc((u - l_eq) / c))
    return _comb_factor(np.atleast_1d(x).astype(float), c, n).reshape(np.shape(x)) * theta


def envelope_profile(grid: AfdmGrid, m_src: int, ch: LosChannel) -> np.ndarray:
    """envelope_magnitude evaluated at every output bin, aligned with exact_profile."""
    m = np.arange(grid.n)
    return envelope_magnitude(grid, m, m_src, ch)


# --- early-late gate discriminator ----------------------------------------

_ELG_GRID = np.linspace(0.01, 0.99, 981)


def elg_theory(delay_frac) -> np.ndarray:
    """Early-late tap ratio in dB predicted by the envelope model.

    With the comb tap pair straddling the fractional delay, the width factor
    contributes |sinc(iota)| early and |sinc(1 - iota)| late, and the ratio
    collapses to 10*log10((1 - iota)/iota): +infinity at 0, zero at 1/2,
    strictly decreasing in between.
    """
    i = np.asarray(delay_frac, dtype=float)
    return 10.0 * (np.log10(np.abs(np.sinc(i))) - np.log10(np.abs(np.sinc(1.0 - i))))


_ELG_TABLE = elg_theory(_ELG_GRID)


def elg_invert(a_db: float) -> float:
    """Fractional delay whose theoretical discriminator equals ``a_db``.

    Interpolates the tabulated curve on [0.01, 0.99]. Readings more than
    3 dB above the table's top mean the late tap has sunk into the noise
    floor and the delay is treated as integer (returns 0.0); readings off
    the bottom clamp to 0.99.
    """
    if a_db > _ELG_TABLE[0] + 3.0:
        return 0.0
    # table is decreasing; negate for np.interp's ascending requirement
    return float(np.interp(-a_db, -_ELG_TABLE, _ELG_GRID))

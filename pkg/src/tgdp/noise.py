"""Discrete noise distributions for distributed aggregation.

Implements the discrete Laplace DLap(b), the negative binomial NB(r, p) with
real-valued r, and the symmetric difference sNB(r, p) of two independent
NB(r, p) draws, together with exact windowed pmfs, seeded samplers, and a
numeric certificate for the max log-ratio of a shifted sNB (the pure-DP
distinguishability of the sum of protocol noise).

Key identities used throughout: sNB is additive in r at fixed p, and
DLap(b) equals sNB(1, 1 - exp(-1/b)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np
from scipy.special import gammaln

TAIL_MASS = 1e-13       # per-tail truncation target for certified windows
CERT_TRUNCATION = 1e-12  # max total truncation for a certified pmf


class WindowTooSmallError(ValueError):
    """Requested pmf window cannot hold the certified mass."""

    def __init__(self, requested: tuple[int, int], required: tuple[int, int]):
        self.requested = requested
        self.required = required
        super().__init__(
            f"window {requested} too small for certified truncation; "
            f"need at least {required}")


# ---------------------------------------------------------------------------
# Distribution types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteLaplace:
    """Pr[k] proportional to exp(-|k|/b), k integer."""

    b: float

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"b must be > 0, got {self.b}")

    def variance(self) -> float:
        q = math.exp(-1.0 / self.b)
        return 2.0 * q / (1.0 - q) ** 2

    def as_snb(self) -> "SymmetricNegativeBinomial":
        return SymmetricNegativeBinomial(1.0, 1.0 - math.exp(-1.0 / self.b))


@dataclass(frozen=True)
class NegativeBinomial:
    """Pr[k] = C(k+r-1, k) (1-p)^k p^r on k >= 0; real r >= 0 via log-gamma."""

    r: float
    p: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"r must be >= 0, got {self.r}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must be in (0,1), got {self.p}")

    def variance(self) -> float:
        return self.r * (1.0 - self.p) / self.p ** 2

    def mean(self) -> float:
        return self.r * (1.0 - self.p) / self.p


@dataclass(frozen=True)
class SymmetricNegativeBinomial:
    """Difference of two independent NB(r, p) draws; point mass at 0 if r=0."""

    r: float
    p: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"r must be >= 0, got {self.r}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must be in (0,1), got {self.p}")

    def variance(self) -> float:
        return 2.0 * self.r * (1.0 - self.p) / self.p ** 2


@dataclass(frozen=True)
class PointMassZero:
    def variance(self) -> float:
        return 0.0


NoiseDist = DiscreteLaplace | NegativeBinomial | SymmetricNegativeBinomial | PointMassZero


def variance(dist: NoiseDist) -> float:
    """Closed-form variance of any supported distribution."""
    return dist.variance()


# ---------------------------------------------------------------------------
# Exact windowed pmfs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Pmf:
    """Finite window of a distribution's probability masses.

    ``masses[i]`` is the mass at integer ``offset + i``; ``truncation_mass``
    is the total mass outside the window (certified <= 1e-12 for windows
    chosen automatically).
    """

    offset: int
    masses: np.ndarray
    truncation_mass: float

    def at(self, k: int) -> float:
        i = k - self.offset
        if 0 <= i < len(self.masses):
            return float(self.masses[i])
        return 0.0

    def support(self) -> range:
        return range(self.offset, self.offset + len(self.masses))

    def total(self) -> float:
        return float(self.masses.sum()) + self.truncation_mass


def _nb_masses(r: float, p: float) -> np.ndarray:
    """NB(r,p) masses on [0, W] where the tail beyond W has mass <= TAIL_MASS."""
    if r == 0.0:
        return np.array([1.0])
    mean = r * (1.0 - p) / p
    std = math.sqrt(r * (1.0 - p)) / p
    hi = int(mean + 12.0 * std + 64)
    while True:
        k = np.arange(hi + 1)
        logm = (gammaln(k + r) - gammaln(k + 1) - gammaln(r)
                + k * math.log1p(-p) + r * math.log(p))
        masses = np.exp(logm)
        tail = 1.0 - masses.sum()
        if tail <= TAIL_MASS:
            break
        hi *= 2
        if hi > 200_000_000:
            raise RuntimeError("NB window exploded; parameters out of scope")
    need = np.searchsorted(np.cumsum(masses), 1.0 - TAIL_MASS) + 1
    return masses[: min(need, hi + 1)]


def _dlap_halfwidth(b: float) -> int:
    q = math.exp(-1.0 / b)
    # each tail: c * q^(W+1) / (1-q) with c = (1-q)/(1+q)
    w = math.log(TAIL_MASS * (1.0 + q)) / math.log(q) - 1.0
    return max(1, int(math.ceil(w)))


def _auto_pmf(dist: NoiseDist) -> Pmf:
    if isinstance(dist, PointMassZero):
        return Pmf(0, np.array([1.0]), 0.0)
    if isinstance(dist, DiscreteLaplace):
        W = _dlap_halfwidth(dist.b)
        q = math.exp(-1.0 / dist.b)
        k = np.abs(np.arange(-W, W + 1))
        masses = (1.0 - q) / (1.0 + q) * q ** k
        return Pmf(-W, masses, max(0.0, 1.0 - float(masses.sum())))
    if isinstance(dist, NegativeBinomial):
        masses = _nb_masses(dist.r, dist.p)
        return Pmf(0, masses, max(0.0, 1.0 - float(masses.sum())))
    if isinstance(dist, SymmetricNegativeBinomial):
        if dist.r == 0.0:
            return Pmf(0, np.array([1.0]), 0.0)
        nb = _nb_masses(dist.r, dist.p)
        masses = np.convolve(nb, nb[::-1])
        W = len(nb) - 1
        return Pmf(-W, masses, max(0.0, 1.0 - float(masses.sum())))
    raise TypeError(f"unsupported distribution {dist!r}")


def pmf(dist: NoiseDist, window: tuple[int, int] | None = None) -> Pmf:
    """Exact masses of ``dist`` on an integer window.

    With ``window=None`` the smallest certified window is chosen (per-tail
    truncation <= 1e-13).  An explicit ``window=(lo, hi)`` must contain the
    certified window, otherwise WindowTooSmallError reports the requirement;
    entries outside the certified support are zero-padded.
    """
    auto = _auto_pmf(dist)
    if window is None:
        return auto
    lo, hi = window
    req_lo, req_hi = auto.offset, auto.offset + len(auto.masses) - 1
    if lo > req_lo or hi < req_hi:
        raise WindowTooSmallError((lo, hi), (req_lo, req_hi))
    masses = np.zeros(hi - lo + 1)
    masses[req_lo - lo: req_lo - lo + len(auto.masses)] = auto.masses
    return Pmf(lo, masses, auto.truncation_mass)


def pmf_to_csv(p: Pmf, dest: str | Path | IO) -> None:
    """Dump (k, mass) rows; debugging aid."""
    lines = ["k,mass"]
    for i, m in enumerate(p.masses):
        lines.append(f"{p.offset + i},{m!r}")
    text = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text)


# ---------------------------------------------------------------------------
# Seeded sampling
# ---------------------------------------------------------------------------

def sample(dist: NoiseDist, rng: np.random.Generator, size: int | None = None):
    """Draw from ``dist`` using the caller's generator (no ambient randomness).

    NB with real r is drawn as Poisson with a Gamma(r, (1-p)/p) rate; sNB as
    the difference of two independent NB draws; DLap through its sNB identity.
    ``size=None`` returns a python int, otherwise an int64 array.
    """
    scalar = size is None
    n = 1 if scalar else size
    out = _sample_array(dist, rng, n)
    return int(out[0]) if scalar else out


def _sample_array(dist: NoiseDist, rng: np.random.Generator, n: int) -> np.ndarray:
    if isinstance(dist, PointMassZero):
        return np.zeros(n, dtype=np.int64)
    if isinstance(dist, DiscreteLaplace):
        return _sample_array(dist.as_snb(), rng, n)
    if isinstance(dist, NegativeBinomial):
        if dist.r == 0.0:
            return np.zeros(n, dtype=np.int64)
        lam = rng.gamma(dist.r, (1.0 - dist.p) / dist.p, size=n)
        return rng.poisson(lam).astype(np.int64)
    if isinstance(dist, SymmetricNegativeBinomial):
        nb = NegativeBinomial(dist.r, dist.p)
        return _sample_array(nb, rng, n) - _sample_array(nb, rng, n)
    raise TypeError(f"unsupported distribution {dist!r}")


# ---------------------------------------------------------------------------
# Numeric privacy certificate
# ---------------------------------------------------------------------------

SCAN_REL_TOL = 1e-9  # max relative truncation error for ratio-scan entries


def log_masses(dist: NoiseDist) -> tuple[int, np.ndarray]:
    """(offset, log-pmf) restricted to entries accurate enough for ratio scans.

    DLap and NB log-masses come from exact formulas and are valid across the
    whole certified window.  sNB masses come from a windowed convolution whose
    outermost entries are *relatively* inaccurate (their defining sums are
    truncated); any entry whose truncation bound exceeds SCAN_REL_TOL of its
    value is reported as -inf so ratio scans skip it.
    """
    if isinstance(dist, PointMassZero):
        return 0, np.array([0.0])
    if isinstance(dist, DiscreteLaplace):
        W = _dlap_halfwidth(dist.b)
        q = math.exp(-1.0 / dist.b)
        k = np.abs(np.arange(-W, W + 1))
        return -W, math.log1p(-q) - math.log1p(q) - k / dist.b
    if isinstance(dist, NegativeBinomial):
        masses = _nb_masses(dist.r, dist.p)
        k = np.arange(len(masses))
        logm = (gammaln(k + dist.r) - gammaln(k + 1) - gammaln(dist.r)
                + k * math.log1p(-dist.p) + dist.r * math.log(dist.p))
        return 0, logm
    if isinstance(dist, SymmetricNegativeBinomial):
        if dist.r == 0.0:
            return 0, np.array([0.0])
        nb = _nb_masses(dist.r, dist.p)
        L = len(nb)
        conv = np.convolve(nb, nb[::-1])           # support -(L-1) .. (L-1)
        # upper bound on the NB mass at or beyond index m (suffix + window tail)
        suffix = np.concatenate([np.cumsum(nb[::-1])[::-1], [0.0]]) + TAIL_MASS
        k_abs = np.abs(np.arange(-(L - 1), L))
        trunc_bound = suffix[L - k_abs]
        with np.errstate(divide="ignore"):
            logm = np.log(conv)
        logm[trunc_bound > SCAN_REL_TOL * conv] = -np.inf
        return -(L - 1), logm
    raise TypeError(f"unsupported distribution {dist!r}")


def privacy_ratio(r: float, eps: float, delta_sens: int) -> float:
    """Max log-ratio of sNB(r, 1-e^(-eps/delta_sens)) shifted by x vs x'.

    Scans all shift pairs x, x' in {0..delta_sens} and every k in the
    certified window.  Requires r >= 1: the distributed-noise privacy
    guarantee decomposes the sum into a unit part plus sNB(r-1, .), which
    has no meaning for r < 1.
    """
    if r < 1.0:
        raise ValueError(f"privacy certificate needs r >= 1, got {r}")
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if delta_sens < 1:
        raise ValueError(f"delta_sens must be >= 1, got {delta_sens}")
    p = 1.0 - math.exp(-eps / delta_sens)
    _off, logm = log_masses(SymmetricNegativeBinomial(float(r), p))
    return max_shift_log_ratio(logm, delta_sens)


def max_shift_log_ratio(logm: np.ndarray, max_shift: int) -> float:
    """Max over d in 1..max_shift and k of logm[k] - logm[k+d].

    For a symmetric distribution this equals the max over all ordered shift
    pairs at distance <= max_shift.  Entries where either mass underflowed
    are skipped (they lie beyond the certified window's usable interior).
    """
    best = 0.0
    for d in range(1, max_shift + 1):
        a, b = logm[:-d], logm[d:]
        ok = np.isfinite(a) & np.isfinite(b)
        if ok.any():
            diff = np.abs(a[ok] - b[ok])
            best = max(best, float(diff.max()))
    return best

"""Seeded simulation of the multi-party aggregation protocols.

Three integer protocols (dominating-set routing with discrete Laplace noise,
input-splitting with per-vertex negative-binomial noise allocated by a
fractional cover, and its robust variant) plus Gaussian vector summation and
real-valued aggregation via randomized rounding.

A single run produces a Transcript: the full ordered message record, the
noise actually drawn, and the decoded estimate.  Batch simulators produce
estimates only, vectorized across trials, for Monte-Carlo measurement.
All randomness comes from a caller-supplied seeded generator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import TrustGraph, clamp_thresholds
from .lp import FractionalCover, cover_infeasibility
from .noise import DiscreteLaplace, SymmetricNegativeBinomial, sample

BROADCAST = -1

COVER_CHECK_SLACK = 1e-6  # feasibility slack below which a cover is rejected


class ProtocolError(ValueError):
    pass


class InfeasibleCoverError(ProtocolError):
    """The supplied cover does not satisfy its LP; privacy would be void."""


# ---------------------------------------------------------------------------
# Transcript model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Message:
    round: int
    source: int
    dest: int                      # vertex id, or BROADCAST
    payload: int | tuple[float, ...]

    def to_json_dict(self) -> dict:
        payload = self.payload
        if isinstance(payload, tuple):
            payload = list(payload)
        return {"round": self.round, "source": self.source,
                "dest": self.dest, "payload": payload}


@dataclass(frozen=True)
class Transcript:
    protocol: str
    inputs: tuple
    estimate: int | float | tuple[float, ...]
    truth: int | float | tuple[float, ...]
    params: dict
    messages: tuple[Message, ...]
    noise: tuple                   # z per broadcaster, broadcaster-id order
    noise_disabled: bool = False

    def to_json_dict(self) -> dict:
        def plain(v):
            if isinstance(v, tuple):
                return list(v)
            return v
        params = dict(self.params)
        if self.noise_disabled:
            params["noise"] = "DISABLED (debug mode, no privacy)"
        return {
            "protocol": self.protocol,
            "inputs": plain(self.inputs),
            "estimate": plain(self.estimate),
            "truth": plain(self.truth),
            "params": params,
            "messages": [m.to_json_dict() for m in self.messages],
            "noise": plain(self.noise),
            "noise_disabled": self.noise_disabled,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


@dataclass(frozen=True)
class View:
    """Restriction of a transcript to a subject set: inputs plus every
    message each subject sent or received (broadcasts reach everyone)."""

    subjects: frozenset[int]
    vertices: dict

    def all_messages(self) -> set[Message]:
        out: set[Message] = set()
        for rec in self.vertices.values():
            out.update(rec["sent"])
            out.update(rec["received"])
        return out


def extract_view(tr: Transcript, subjects: Sequence[int]) -> View:
    subj = frozenset(subjects)
    vertices = {}
    for v in subj:
        sent = tuple(m for m in tr.messages if m.source == v)
        received = tuple(
            m for m in tr.messages
            if m.dest == v or (m.dest == BROADCAST and m.source != v))
        vertices[v] = {"input": tr.inputs[v], "sent": sent, "received": received}
    return View(subj, vertices)


# ---------------------------------------------------------------------------
# Primitive operations
# ---------------------------------------------------------------------------

def _as_rng(rng) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(int(rng)), int(rng)
    return rng, None


def split_input(x: int, share_count: int, q: int, rng) -> list[int]:
    """Additive shares mod q: first k-1 uniform, last completes the sum."""
    rng, _ = _as_rng(rng)
    if share_count < 1:
        raise ProtocolError(f"share_count must be >= 1, got {share_count}")
    if not 0 <= x < q:
        raise ProtocolError(f"value {x} outside [0,{q})")
    head = rng.integers(0, q, size=share_count - 1, dtype=np.int64)
    last = (x - int(head.sum())) % q
    return [int(s) for s in head] + [last]


def decode_mod(a_prime: int, q: int) -> int:
    """Center a residue into (-q/2, q/2]."""
    if not 0 <= a_prime < q:
        raise ProtocolError(f"residue {a_prime} outside [0,{q})")
    return a_prime if 2 * a_prime <= q else a_prime - q


def zcdp_to_dp(rho: float, delta: float) -> float:
    """Pure zCDP budget converted to an (eps, delta) guarantee."""
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must be in (0, 1/2), got {delta}")
    return rho + 2.0 * math.sqrt(rho * math.log(1.0 / delta))


def randomized_round(value: float, rng) -> int:
    """Round to floor or floor+1 with probability matching the fraction."""
    rng, _ = _as_rng(rng)
    base = math.floor(value)
    frac = value - base
    return base + (1 if rng.random() < frac else 0)


def _check_inputs(x: Sequence[int], delta_sens: int, n: int) -> None:
    if len(x) != n:
        raise ProtocolError(f"expected {n} inputs, got {len(x)}")
    for v, xv in enumerate(x):
        if not 0 <= xv <= delta_sens:
            raise ProtocolError(f"input x[{v}]={xv} outside [0,{delta_sens}]")


def _check_dominating(g: TrustGraph, dom: Sequence[int]) -> list[int]:
    T = sorted(set(dom))
    for u in T:
        g._check_vertex(u)
    tset = set(T)
    for v in range(g.n):
        if not tset.intersection(g.closed_neighborhood(v)):
            raise ProtocolError(f"set is not dominating: vertex {v} uncovered")
    return T


def _require_cover(g: TrustGraph, cover: FractionalCover,
                   t: Sequence[int] | None = None) -> None:
    worst, v = cover_infeasibility(g, cover.y, t)
    if worst < 1.0 - COVER_CHECK_SLACK:
        raise InfeasibleCoverError(
            f"cover mass {worst:.6f} < 1 at vertex {v}; privacy would be void")


# ---------------------------------------------------------------------------
# Single-run protocols (full transcripts)
# ---------------------------------------------------------------------------

def run_domset_protocol(g: TrustGraph, dominating_set: Sequence[int],
                        x: Sequence[int], eps: float, delta_sens: int, rng,
                        *, noise_disabled: bool = False) -> Transcript:
    """Route every input to its lowest-id dominator, which broadcasts the sum
    plus discrete Laplace noise; the estimate adds up the broadcasts."""
    rng, seed = _as_rng(rng)
    _check_inputs(x, delta_sens, g.n)
    T = _check_dominating(g, dominating_set)
    tset = set(T)

    messages = []
    sums = {u: 0 for u in T}
    for v in range(g.n):
        u_v = min(tset.intersection(g.closed_neighborhood(v)))
        messages.append(Message(1, v, u_v, int(x[v])))
        sums[u_v] += int(x[v])

    dlap = DiscreteLaplace(delta_sens / eps)
    noise = []
    estimate = 0
    for u in T:
        z = 0 if noise_disabled else sample(dlap, rng)
        noise.append(z)
        a_u = sums[u] + z
        messages.append(Message(2, u, BROADCAST, a_u))
        estimate += a_u

    params = {"protocol": "domset", "eps": eps, "delta_sens": delta_sens,
              "dominating_set": T, "seed": seed}
    return Transcript("domset", tuple(int(v) for v in x), estimate,
                      int(sum(x)), params, tuple(messages), tuple(noise),
                      noise_disabled)


def _lp_style_run(kind: str, g: TrustGraph, cover: FractionalCover,
                  x: Sequence[int], eps: float, delta_sens: int, rng,
                  noise_disabled: bool) -> Transcript:
    rng, seed = _as_rng(rng)
    _check_inputs(x, delta_sens, g.n)
    q = 2 * g.n * delta_sens
    p = 1.0 - math.exp(-eps / delta_sens)

    messages = []
    recv = [0] * g.n
    for v in range(g.n):
        nb = g.closed_neighborhood(v)
        shares = split_input(int(x[v]), len(nb), q, rng)
        for u, s in zip(nb, shares):
            messages.append(Message(1, v, u, s))
            recv[u] = (recv[u] + s) % q

    noise = []
    total = 0
    for u in range(g.n):
        y_u = cover.y[u]
        if noise_disabled or y_u <= 0.0:
            z = 0
        else:
            z = sample(SymmetricNegativeBinomial(y_u, p), rng)
        noise.append(z)
        a_u = (recv[u] + z) % q
        messages.append(Message(2, u, BROADCAST, a_u))
        total = (total + a_u) % q

    estimate = decode_mod(total, q)
    params = {"protocol": kind, "eps": eps, "delta_sens": delta_sens,
              "q": q, "seed": seed}
    if cover.robust_thresholds is not None:
        params["robust_t"] = list(cover.robust_thresholds)
    return Transcript(kind, tuple(int(v) for v in x), estimate, int(sum(x)),
                      params, tuple(messages), tuple(noise), noise_disabled)


def run_lp_protocol(g: TrustGraph, cover: FractionalCover, x: Sequence[int],
                    eps: float, delta_sens: int, rng,
                    *, noise_disabled: bool = False) -> Transcript:
    """Input splitting over closed neighborhoods with sNB(y_u, .) noise."""
    _require_cover(g, cover, None)
    return _lp_style_run("lp", g, cover, x, eps, delta_sens, rng, noise_disabled)


def run_robust_protocol(g: TrustGraph, cover: FractionalCover, x: Sequence[int],
                        eps: float, delta_sens: int, rng,
                        *, noise_disabled: bool = False) -> Transcript:
    """Identical mechanics to the LP protocol; the cover must satisfy the
    robust constraints for its recorded thresholds (checked via the worst
    exclusion sets)."""
    if cover.robust_thresholds is None:
        raise ProtocolError("robust protocol needs a cover with thresholds")
    _require_cover(g, cover, cover.robust_thresholds)
    return _lp_style_run("robust", g, cover, x, eps, delta_sens, rng,
                         noise_disabled)


def run_vecsum_protocol(g: TrustGraph, dominating_set: Sequence[int],
                        x: np.ndarray, norm_bound: float, rho: float, rng,
                        *, noise_disabled: bool = False) -> Transcript:
    """Dominating-set routing with real-vector payloads and Gaussian noise
    calibrated to the zCDP budget; unbiased."""
    rng, seed = _as_rng(rng)
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != g.n:
        raise ProtocolError(f"expected (n, d) input array, got {x.shape}")
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms > norm_bound * (1 + 1e-12)):
        v = int(np.argmax(norms))
        raise ProtocolError(f"||x[{v}]|| = {norms[v]:.6g} exceeds bound {norm_bound}")
    T = _check_dominating(g, dominating_set)
    tset = set(T)
    d = x.shape[1]
    sigma = norm_bound * math.sqrt(1.0 / (2.0 * rho))

    messages = []
    sums = {u: np.zeros(d) for u in T}
    for v in range(g.n):
        u_v = min(tset.intersection(g.closed_neighborhood(v)))
        messages.append(Message(1, v, u_v, tuple(x[v].tolist())))
        sums[u_v] += x[v]

    noise = []
    estimate = np.zeros(d)
    for u in T:
        z = np.zeros(d) if noise_disabled else rng.normal(0.0, sigma, size=d)
        noise.append(tuple(z.tolist()))
        a_u = sums[u] + z
        messages.append(Message(2, u, BROADCAST, tuple(a_u.tolist())))
        estimate += a_u

    params = {"protocol": "vecsum", "rho": rho, "norm_bound": norm_bound,
              "d": d, "sigma": sigma, "dominating_set": T, "seed": seed}
    return Transcript("vecsum", tuple(map(tuple, x.tolist())),
                      tuple(estimate.tolist()), tuple(x.sum(axis=0).tolist()),
                      params, tuple(messages), tuple(noise), noise_disabled)


def real_aggregate(g: TrustGraph, cover: FractionalCover, x: Sequence[float],
                   eps: float, grid: int, rng,
                   *, noise_disabled: bool = False) -> Transcript:
    """Aggregate reals in [0,1]: randomized-round each input onto a 1/grid
    lattice, run the integer LP protocol at sensitivity ``grid``, and scale
    the decoded sum back down.  Unbiased."""
    rng, seed = _as_rng(rng)
    if grid < 1:
        raise ValueError(f"grid must be >= 1, got {grid}")
    for v, xv in enumerate(x):
        if not 0.0 <= xv <= 1.0:
            raise ProtocolError(f"input x[{v}]={xv} outside [0,1]")
    rounded = [randomized_round(grid * float(xv), rng) for xv in x]
    _require_cover(g, cover, None)
    sub = _lp_style_run("real", g, cover, rounded, eps, grid, rng,
                        noise_disabled)
    params = dict(sub.params)
    params.update({"grid": grid, "seed": seed, "rounded_inputs": rounded})
    return Transcript("real", tuple(float(v) for v in x),
                      sub.estimate / grid, float(sum(x)), params,
                      sub.messages, sub.noise, noise_disabled)


# ---------------------------------------------------------------------------
# Batch simulators (trial-vectorized; estimates only)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BatchRun:
    estimates: np.ndarray          # (trials,) or (trials, d)
    truth: np.ndarray              # scalar-ish array or (trials,)
    noise_sums: np.ndarray         # sum of z per trial (same shape as estimates)
    broadcasts: np.ndarray | None = None  # (trials, n) residues, if requested


def simulate_lp_batch(g: TrustGraph, cover: FractionalCover,
                      x, eps: float, delta_sens: int, trials: int, rng,
                      *, noise_disabled: bool = False,
                      keep_broadcasts: bool = False,
                      check_cover: bool = True) -> BatchRun:
    """Vectorized LP-protocol runs: same wire mechanics, no Message objects.

    ``x`` is either a length-n input vector shared by every trial or a
    (trials, n) array of per-trial inputs.
    """
    rng, _ = _as_rng(rng)
    if check_cover:
        _require_cover(g, cover, cover.robust_thresholds)
    n = g.n
    q = 2 * n * delta_sens
    p = 1.0 - math.exp(-eps / delta_sens)
    x = np.asarray(x, dtype=np.int64)
    per_trial_inputs = x.ndim == 2
    if np.any(x < 0) or np.any(x > delta_sens):
        raise ProtocolError(f"inputs outside [0,{delta_sens}]")

    recv = np.zeros((trials, n), dtype=np.int64)
    for v in range(n):
        nb = g.closed_neighborhood(v)
        k = len(nb)
        head = rng.integers(0, q, size=(trials, k - 1), dtype=np.int64)
        xv = x[:, v] if per_trial_inputs else x[v]
        last = (xv - head.sum(axis=1)) % q
        for i, u in enumerate(nb[:-1]):
            recv[:, u] = (recv[:, u] + head[:, i]) % q
        recv[:, nb[-1]] = (recv[:, nb[-1]] + last) % q

    zsum = np.zeros(trials, dtype=np.int64)
    for u in range(n):
        y_u = cover.y[u]
        if noise_disabled or y_u <= 0.0:
            continue
        lam = rng.gamma(y_u, (1.0 - p) / p, size=trials)
        pos = rng.poisson(lam).astype(np.int64)
        lam = rng.gamma(y_u, (1.0 - p) / p, size=trials)
        neg = rng.poisson(lam).astype(np.int64)
        z = pos - neg
        recv[:, u] = (recv[:, u] + z) % q
        zsum += z

    total = recv.sum(axis=1) % q
    estimates = np.where(2 * total <= q, total, total - q)
    truth = x.sum(axis=1) if per_trial_inputs else np.full(trials, int(x.sum()))
    return BatchRun(estimates, truth, zsum,
                    broadcasts=recv if keep_broadcasts else None)


def simulate_domset_batch(g: TrustGraph, dominating_set: Sequence[int],
                          x: Sequence[int], eps: float, delta_sens: int,
                          trials: int, rng,
                          *, noise_disabled: bool = False) -> BatchRun:
    rng, _ = _as_rng(rng)
    _check_inputs(x, delta_sens, g.n)
    T = _check_dominating(g, dominating_set)
    truth = int(sum(x))
    p = 1.0 - math.exp(-eps / delta_sens)
    zsum = np.zeros(trials, dtype=np.int64)
    if not noise_disabled:
        for _u in T:
            lam = rng.gamma(1.0, (1.0 - p) / p, size=trials)
            pos = rng.poisson(lam).astype(np.int64)
            lam = rng.gamma(1.0, (1.0 - p) / p, size=trials)
            neg = rng.poisson(lam).astype(np.int64)
            zsum += pos - neg
    estimates = truth + zsum
    return BatchRun(estimates, np.full(trials, truth), zsum)


def simulate_vecsum_batch(g: TrustGraph, dominating_set: Sequence[int],
                          x: np.ndarray, norm_bound: float, rho: float,
                          trials: int, rng,
                          *, noise_disabled: bool = False) -> BatchRun:
    rng, _ = _as_rng(rng)
    T = _check_dominating(g, dominating_set)
    x = np.asarray(x, dtype=float)
    d = x.shape[1]
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms > norm_bound * (1 + 1e-12)):
        raise ProtocolError("input norm exceeds bound")
    sigma = norm_bound * math.sqrt(1.0 / (2.0 * rho))
    truth = x.sum(axis=0)
    zsum = np.zeros((trials, d))
    if not noise_disabled:
        for _u in T:
            zsum += rng.normal(0.0, sigma, size=(trials, d))
    estimates = truth[None, :] + zsum
    return BatchRun(estimates, np.tile(truth, (trials, 1)), zsum)


def simulate_real_batch(g: TrustGraph, cover: FractionalCover,
                        x: Sequence[float], eps: float, grid: int,
                        trials: int, rng,
                        *, noise_disabled: bool = False) -> BatchRun:
    rng, _ = _as_rng(rng)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 1):
        raise ProtocolError("inputs outside [0,1]")
    base = np.floor(grid * x)
    frac = grid * x - base
    rounded = (base[None, :]
               + (rng.random(size=(trials, g.n)) < frac[None, :])).astype(np.int64)
    sub = simulate_lp_batch(g, cover, rounded, eps, grid, trials, rng,
                            noise_disabled=noise_disabled)
    return BatchRun(sub.estimates / grid, np.full(trials, float(x.sum())),
                    sub.noise_sums)

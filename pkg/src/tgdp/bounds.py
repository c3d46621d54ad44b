"""Combinatorial witnesses for the aggregation error bounds.

Packings (pairwise-disjoint closed neighborhoods) witness lower bounds on the
achievable MSE; dominating sets and the covering-LP optimum witness upper
bounds.  This module provides greedy and capped-exact solvers for both, the
min-degree greedy whose output provably reaches OPT_LP / sqrt(n), robust
packings with per-vertex exclusion sets, and the randomized rounding that
turns robust dual weights into a bi-criteria robust packing.

Note on lower bounds: the MSE lower bounds carry unspecified constants, so
packing sizes are reported as witness sizes, never as absolute MSE floors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .graph import TrustGraph, clamp_thresholds, _as_fraction
from .lp import DualPacking, solve_cover, solve_robust_cover


class CapExceededError(ValueError):
    """Exact solver invoked above its vertex cap without an override."""


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PackingCertificate:
    """A (robust) packing: chosen vertices plus per-vertex exclusion sets."""

    vertices: tuple[int, ...]
    exclusions: dict
    thresholds: tuple[int, ...] | None = None
    exact: bool = False

    @property
    def size(self) -> int:
        return len(self.vertices)

    def to_json_dict(self) -> dict:
        return {"U": list(self.vertices),
                "T": {str(u): list(self.exclusions.get(u, ())) for u in self.vertices},
                "thresholds": list(self.thresholds) if self.thresholds else None}

    @classmethod
    def from_json_dict(cls, d: dict) -> "PackingCertificate":
        return cls(vertices=tuple(d["U"]),
                   exclusions={int(u): tuple(t) for u, t in d["T"].items()},
                   thresholds=tuple(d["thresholds"]) if d.get("thresholds") else None)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True))


@dataclass(frozen=True)
class DominatingSetCertificate:
    vertices: tuple[int, ...]
    exact: bool = False

    @property
    def size(self) -> int:
        return len(self.vertices)


def validate_packing(g: TrustGraph, cert: PackingCertificate) -> bool:
    return validate_robust_packing(g, (0,) * g.n, PackingCertificate(
        cert.vertices, {u: () for u in cert.vertices}))


def validate_robust_packing(g: TrustGraph, t: Sequence[int],
                            cert: PackingCertificate) -> bool:
    """True iff every exclusion set fits inside N(u) within its budget and
    the leftover closed neighborhoods are pairwise disjoint."""
    masks = g.closed_masks()
    used = 0
    for u in cert.vertices:
        if not 0 <= u < g.n:
            return False
        T_u = set(cert.exclusions.get(u, ()))
        if len(T_u) > t[u]:
            return False
        if not T_u <= set(g.neighbors(u)):
            return False
        left = masks[u]
        for w in T_u:
            left &= ~(1 << w)
        if left & used:
            return False
        used |= left
    return True


def validate_dominating_set(g: TrustGraph, vertices: Sequence[int]) -> bool:
    masks = g.closed_masks()
    covered = 0
    for u in set(vertices):
        covered |= masks[u]
    return covered == (1 << g.n) - 1 if g.n else True


# ---------------------------------------------------------------------------
# Greedy constructions
# ---------------------------------------------------------------------------

def _vertex_order(g: TrustGraph, order) -> list[int]:
    if order == "degree":
        return sorted(range(g.n), key=lambda v: (g.degree(v), v))
    if order == "id":
        return list(range(g.n))
    seq = list(order)
    if sorted(seq) != list(range(g.n)):
        raise ValueError("order must be a permutation of the vertices")
    return seq


def maximal_packing(g: TrustGraph, order="degree") -> PackingCertificate:
    """Greedy maximal packing in the given scan order.

    Default order is ascending degree (ties by id), which empirically yields
    larger packings; "id" or an explicit permutation probes order sensitivity.
    """
    masks = g.closed_masks()
    used = 0
    chosen = []
    for v in _vertex_order(g, order):
        if masks[v] & used == 0:
            chosen.append(v)
            used |= masks[v]
    # maximality: no remaining vertex is addable
    assert all(masks[v] & used for v in range(g.n)), "packing not maximal"
    chosen.sort()
    return PackingCertificate(tuple(chosen), {u: () for u in chosen},
                              thresholds=(0,) * g.n)


def greedy_sqrt_packing(g: TrustGraph) -> PackingCertificate:
    """Min-degree greedy packing.

    Repeatedly pick the lowest-degree active vertex (ties by id) and retire
    every active vertex whose closed neighborhood touches the pick's.  The
    output size is at least OPT_LP / sqrt(n).
    """
    masks = g.closed_masks()
    degs = g.degree_vector()
    active = (1 << g.n) - 1
    chosen = []
    while active:
        v = min((u for u in range(g.n) if active >> u & 1),
                key=lambda u: (degs[u], u))
        chosen.append(v)
        conflict = 0
        for w in g.closed_neighborhood(v):
            conflict |= masks[w]
        active &= ~conflict
    chosen.sort()
    return PackingCertificate(tuple(chosen), {u: () for u in chosen},
                              thresholds=(0,) * g.n)


def greedy_dominating_set(g: TrustGraph) -> DominatingSetCertificate:
    """Classic greedy: repeatedly add the vertex covering the most uncovered
    closed neighborhoods (ties by id); size is within 1+ln(n) of OPT_LP."""
    masks = g.closed_masks()
    uncovered = (1 << g.n) - 1
    chosen = []
    while uncovered:
        v = max(range(g.n), key=lambda u: ((masks[u] & uncovered).bit_count(), -u))
        chosen.append(v)
        uncovered &= ~masks[v]
    chosen.sort()
    return DominatingSetCertificate(tuple(chosen), exact=False)


# ---------------------------------------------------------------------------
# Capped exact solvers (branch and bound)
# ---------------------------------------------------------------------------

def exact_max_packing(g: TrustGraph, cap: int = 32) -> PackingCertificate:
    """Exact packing number via branch and bound on the conflict structure.

    Vertices conflict when their closed neighborhoods intersect; a packing is
    an independent set of the conflict relation.  Pruning uses the greedy
    packing as incumbent and the LP optimum as a global upper bound.
    """
    if g.n > cap:
        raise CapExceededError(
            f"n={g.n} exceeds cap={cap}; pass a larger cap to override")
    if g.n == 0:
        return PackingCertificate((), {}, thresholds=(), exact=True)
    masks = g.closed_masks()
    conf = []
    for u in range(g.n):
        c = 0
        for w in g.closed_neighborhood(u):
            c |= masks[w]
        conf.append(c)

    greedy = maximal_packing(g)
    best_set = list(greedy.vertices)
    best = len(best_set)
    ub_root = int(math.floor(solve_cover(g).objective + 1e-6))

    def recurse(cand: int, chosen: list[int]) -> None:
        nonlocal best, best_set
        if best >= ub_root:
            return
        k = cand.bit_count()
        if len(chosen) + k <= best:
            return
        if cand == 0:
            if len(chosen) > best:
                best, best_set = len(chosen), chosen[:]
            return
        v = max((u for u in range(g.n) if cand >> u & 1),
                key=lambda u: ((conf[u] & cand).bit_count(), -u))
        recurse(cand & ~conf[v], chosen + [v])
        rest = cand & ~(1 << v)
        if len(chosen) + rest.bit_count() > best:
            recurse(rest, chosen)

    recurse((1 << g.n) - 1, [])
    best_set.sort()
    return PackingCertificate(tuple(best_set), {u: () for u in best_set},
                              thresholds=(0,) * g.n, exact=True)


def exact_min_dominating_set(g: TrustGraph, cap: int = 64) -> DominatingSetCertificate:
    """Exact domination number via branch and bound with the LP lower bound."""
    if g.n > cap:
        raise CapExceededError(
            f"n={g.n} exceeds cap={cap}; pass a larger cap to override")
    if g.n == 0:
        return DominatingSetCertificate((), exact=True)
    masks = g.closed_masks()
    greedy = greedy_dominating_set(g)
    best_set = list(greedy.vertices)
    best = len(best_set)
    lb_root = int(math.ceil(solve_cover(g).objective - 1e-6))

    def recurse(uncovered: int, chosen: list[int]) -> None:
        nonlocal best, best_set
        if best <= lb_root:
            return
        if uncovered == 0:
            if len(chosen) < best:
                best, best_set = len(chosen), chosen[:]
            return
        maxcover = max((masks[u] & uncovered).bit_count() for u in range(g.n))
        if len(chosen) + math.ceil(uncovered.bit_count() / maxcover) >= best:
            return
        # branch on the uncovered vertex with the fewest dominators
        v = min((u for u in range(g.n) if uncovered >> u & 1),
                key=lambda u: (len(g.closed_neighborhood(u)), u))
        for u in sorted(g.closed_neighborhood(v),
                        key=lambda w: (-(masks[w] & uncovered).bit_count(), w)):
            recurse(uncovered & ~masks[u], chosen + [u])

    recurse((1 << g.n) - 1, [])
    best_set.sort()
    return DominatingSetCertificate(tuple(best_set), exact=True)


# ---------------------------------------------------------------------------
# Randomized rounding of robust dual weights (bi-criteria)
# ---------------------------------------------------------------------------

def _ceil_scaled(alpha, k: int) -> int:
    return int(math.ceil(_as_fraction(alpha) * k))


def rounded_robust_packing(g: TrustGraph, t: Sequence[int], alpha,
                           dual: DualPacking, rng) -> PackingCertificate:
    """One randomized-rounding trial on the robust dual weights.

    Stage one includes each weighted pair (v, T) with probability
    (alpha/4) * w_{v,T}.  Stage two keeps a pair only if no other included
    pair's leftover neighborhood contains v and the foreign coverage inside
    N(v) is at most alpha*deg(v).  Stage three enlarges each survivor's
    exclusion set by that foreign coverage, which makes the leftover
    neighborhoods disjoint by construction.

    The result always validates for thresholds t_v + ceil(alpha*deg(v)); its
    expected size is at least (alpha/8) * (sum of dual weights).
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    frac_alpha = _as_fraction(alpha)
    if not 0 < frac_alpha < 1:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    t_eff = clamp_thresholds(g, t)
    gamma = float(frac_alpha) / 8.0

    pairs = [(v, T, w) for (v, T), w in dual.entries if w > 0.0]
    supports = []
    for v, T, _w in pairs:
        excl = set(T)
        supports.append([u for u in g.closed_neighborhood(v) if u not in excl])

    probs = np.minimum(1.0, np.array([2.0 * gamma * w for _v, _T, w in pairs]))
    draws = rng.random(len(pairs)) if pairs else np.zeros(0)
    r0 = [i for i in range(len(pairs)) if draws[i] < probs[i]]

    counts = np.zeros(g.n, dtype=np.int64)
    for i in r0:
        counts[supports[i]] += 1

    r1 = []
    for i in r0:
        v, T, _w = pairs[i]
        if counts[v] - 1 != 0:   # own support always contains v
            continue
        excl = set(T)
        # foreign coverage of u: total count minus own support membership
        foreign = [u for u in g.neighbors(v)
                   if counts[u] - (1 if u not in excl else 0) > 0]
        if len(foreign) > frac_alpha * g.degree(v):
            continue
        r1.append(i)

    counts1 = np.zeros(g.n, dtype=np.int64)
    for i in r1:
        counts1[supports[i]] += 1

    vertices = []
    exclusions = {}
    for i in r1:
        v, T, _w = pairs[i]
        excl = set(T)
        addition = {u for u in g.neighbors(v)
                    if counts1[u] - (1 if u not in excl else 0) > 0}
        vertices.append(v)
        exclusions[v] = tuple(sorted(excl | addition))
    vertices.sort()

    new_t = tuple(t_eff[v] + _ceil_scaled(alpha, g.degree(v)) for v in range(g.n))
    cert = PackingCertificate(tuple(vertices), exclusions, thresholds=new_t)
    assert validate_robust_packing(g, new_t, cert), "rounded packing invalid"
    return cert


# ---------------------------------------------------------------------------
# Gap reporting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapReport:
    n: int
    thresholds: tuple[int, ...] | None
    opt_lp: float
    packing_size: int
    packing_exact: bool
    domset_size: int
    domset_exact: bool
    ratio_opt_to_n: float
    ratio_packing_to_opt: float
    ratio_domset_to_opt: float
    notes: str

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "thresholds": list(self.thresholds) if self.thresholds else None,
            "opt_lp": self.opt_lp,
            "packing": {"size": self.packing_size, "exact": self.packing_exact,
                        "kind": "lower-bound witness"},
            "dominating_set": {"size": self.domset_size, "exact": self.domset_exact},
            "ratio_opt_to_n": self.ratio_opt_to_n,
            "ratio_packing_to_opt": self.ratio_packing_to_opt,
            "ratio_domset_to_opt": self.ratio_domset_to_opt,
            "notes": self.notes,
        }


def gap_report(g: TrustGraph, t: Sequence[int] | None = None, *,
               exact: bool = False, packing_cap: int = 32,
               domset_cap: int = 64, order="degree") -> GapReport:
    """Assemble the LP optimum with packing/dominating-set witnesses.

    Lower-bound witnesses are reported as sizes only: the matching MSE lower
    bounds have unspecified constants, so no absolute MSE floor is claimed.
    """
    if t is not None:
        cover = solve_robust_cover(g, t)
        thresholds = cover.robust_thresholds
    else:
        cover = solve_cover(g)
        thresholds = None

    if exact and g.n <= packing_cap:
        pack = exact_max_packing(g, cap=packing_cap)
    else:
        pack = maximal_packing(g, order=order)
    if exact and g.n <= domset_cap:
        dom = exact_min_dominating_set(g, cap=domset_cap)
    else:
        dom = greedy_dominating_set(g)

    opt = cover.objective
    return GapReport(
        n=g.n, thresholds=thresholds, opt_lp=opt,
        packing_size=pack.size, packing_exact=pack.exact,
        domset_size=dom.size, domset_exact=dom.exact,
        ratio_opt_to_n=opt / g.n if g.n else 0.0,
        ratio_packing_to_opt=pack.size / opt if opt else 0.0,
        ratio_domset_to_opt=dom.size / opt if opt else 0.0,
        notes=("packing sizes are lower-bound witnesses; the corresponding "
               "MSE lower bounds have unspecified constants and are not "
               "reported as absolute MSE floors"),
    )

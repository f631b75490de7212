"""Pools, empirical cdf, mid-rank NAQ, bucketing, pool stability and DKW bands.

All cdf and quantile arithmetic is exact (``Fraction``); floats only appear
in the DKW exponentials. Pool values may be any totally ordered type, e.g.
ints for M or ``LevinValue`` for the time-penalised M_T.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np

from .bitcode import InvalidArgument

INF = math.inf


def is_infinite(v) -> bool:
    return v is None or (isinstance(v, float) and math.isinf(v))


@dataclass(frozen=True)
class PoolEntry:
    id: str
    m: Any
    method: str = "exact_bounded"
    caps: dict = field(default_factory=dict, compare=False, hash=False)
    status: str = "exact"


class Pool:
    """A finite multiset of M values; infinite entries are set aside."""

    def __init__(self, entries: Iterable):
        self.entries: list[PoolEntry] = []
        for i, e in enumerate(entries):
            if not isinstance(e, PoolEntry):
                e = PoolEntry(str(i), e)
            self.entries.append(e)
        self.finite = [e for e in self.entries if not is_infinite(e.m)]
        self.infinite = [e for e in self.entries if is_infinite(e.m)]
        self.values = sorted(e.m for e in self.finite)

    @classmethod
    def of(cls, values: Iterable) -> Pool:
        return cls(list(values))

    @property
    def size(self) -> int:
        return len(self.values)

    def by_id(self, ident: str) -> PoolEntry:
        for e in self.entries:
            if e.id == ident:
                return e
        raise KeyError(ident)

    def _require(self):
        if not self.values:
            raise InvalidArgument("pool has no finite entries")

    def count_le(self, z) -> int:
        return sum(1 for v in self.values if v <= z)

    def count_lt(self, z) -> int:
        return sum(1 for v in self.values if v < z)

    def is_submultiset_of(self, other: Pool) -> bool:
        return not (Counter(self.values) - Counter(other.values))


def empirical_cdf(pool: Pool, z) -> Fraction:
    """Fraction of finite pool values ``<= z``."""
    pool._require()
    if is_infinite(z):
        return Fraction(1) if z == INF else Fraction(0)
    return Fraction(pool.count_le(z), pool.size)


def naq_midrank(m, pool: Pool) -> Fraction:
    """(#below + half of #tied) / |pool|."""
    if is_infinite(m):
        raise InvalidArgument("an infinite M lies outside the validity domain and has no quantile")
    pool._require()
    below = pool.count_lt(m)
    tied = pool.count_le(m) - below
    return Fraction(2 * below + tied, 2 * pool.size)


def naq_of(ident: str, pool: Pool) -> Fraction:
    return naq_midrank(pool.by_id(ident).m, pool)


def midrank_vs_cdf_gap(pool: Pool) -> dict:
    """Largest |mid-rank - cdf| over pool members.

    The gap at a value of multiplicity k is exactly k / (2n); the tie-free
    bound 1/(2n) therefore only holds when there are no ties.
    """
    pool._require()
    n = pool.size
    counts = Counter(pool.values)
    gaps = {v: abs(naq_midrank(v, pool) - empirical_cdf(pool, v)) for v in counts}
    worst = max(gaps.values())
    k = max(counts.values())
    return {
        "max_gap": worst,
        "tie_free_bound": Fraction(1, 2 * n),
        "within_tie_free_bound": worst <= Fraction(1, 2 * n),
        "max_tie_multiplicity": k,
        "tie_adjusted_bound": Fraction(k, 2 * n),
        "within_tie_adjusted_bound": all(g == Fraction(counts[v], 2 * n) for v, g in gaps.items()),
    }


def bucketize(values: Sequence[int], width: int) -> list[int]:
    if width < 1:
        raise InvalidArgument("bucket width must be >= 1")
    return [math.floor(v) // width for v in values]


def weak_order(keys: Sequence) -> list[list[int]]:
    """Positions grouped into tie classes, ordered by key."""
    classes: dict = {}
    for i, k in enumerate(keys):
        classes.setdefault(k, []).append(i)
    return [classes[k] for k in sorted(classes)]


def bucket_audit(values_a: Sequence[int], values_b: Sequence[int], width: int,
                 perturbation: int) -> dict:
    """Compare the bucketed weak orders induced by two value vectors.

    ``near_boundary`` lists entries of ``values_a`` within ``perturbation`` of
    a bucket edge; only when it is empty (and the vectors really differ by at
    most ``perturbation``) are the orders guaranteed to agree.
    """
    if len(values_a) != len(values_b):
        raise InvalidArgument("value vectors differ in length")
    ba, bb = bucketize(values_a, width), bucketize(values_b, width)
    crossed = [i for i, (x, y) in enumerate(zip(ba, bb)) if x != y]
    near = [i for i, v in enumerate(values_a)
            if v % width < perturbation or width - v % width <= perturbation]
    within = all(abs(x - y) <= perturbation for x, y in zip(values_a, values_b))
    return {
        "width": width,
        "perturbation": perturbation,
        "buckets_a": ba,
        "buckets_b": bb,
        "crossed": crossed,
        "boundary_crossed": bool(crossed),
        "orders_coincide": weak_order(ba) == weak_order(bb),
        "near_boundary": near,
        "perturbation_respected": within,
        "guaranteed": within and not near,
    }


def pool_stability_check(T: Pool, T_prime: Pool, z_grid: Iterable) -> dict:
    """Verify  |T|/|T'| F_T(z) <= F_T'(z) <= F_T(z) + (|T'|-|T|)/|T'|  on a grid."""
    if not T.is_submultiset_of(T_prime):
        raise InvalidArgument("pools are not nested")
    n, n2 = T.size, T_prime.size
    worst = None
    violations = []
    for z in z_grid:
        f, f2 = empirical_cdf(T, z), empirical_cdf(T_prime, z)
        lo = Fraction(n, n2) * f
        hi = f + Fraction(n2 - n, n2)
        slack = min(f2 - lo, hi - f2)
        if worst is None or slack < worst:
            worst = slack
        if slack < 0:
            violations.append(z)
    return {"passed": not violations, "violations": violations, "worst_slack": worst,
            "sizes": (n, n2)}


def dkw_band(n: int, epsilon: float) -> float:
    """P(sup |F_n - F| > eps) <= min(1, 2 exp(-2 n eps^2))."""
    if n < 1 or not epsilon > 0:
        raise InvalidArgument("need n >= 1 and epsilon > 0")
    return min(1.0, 2.0 * math.exp(-2.0 * n * epsilon * epsilon))


def dkw_epsilon(n: int, delta: float) -> float:
    if n < 1 or not 0 < delta < 1:
        raise InvalidArgument("need n >= 1 and 0 < delta < 1")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n))


def sup_cdf_gap(sample: Sequence[int], atoms: Sequence[int], cdf: Sequence[float]) -> float:
    """sup_z |F_n(z) - F(z)| for a distribution on ``atoms`` (sorted).

    Both functions are right-continuous steps that only jump at the atoms,
    so the supremum is attained at an atom.
    """
    n = len(sample)
    counts = Counter(sample)
    acc = 0
    worst = 0.0
    for a, f in zip(atoms, cdf):
        acc += counts.get(a, 0)
        worst = max(worst, abs(acc / n - f))
    return worst


def dkw_monte_carlo(probs: Sequence[float], n: int, reps: int, epsilon: float, seed: int) -> dict:
    """Frequency of sup-gap > epsilon over ``reps`` samples of size n.

    Each replication draws the atom counts of n i.i.d. draws (a multinomial
    vector), which is all the empirical cdf depends on.
    """
    if reps < 1:
        raise InvalidArgument("reps must be >= 1")
    probs = np.asarray(probs, dtype=float)
    if abs(probs.sum() - 1.0) > 1e-12 or (probs < 0).any():
        raise InvalidArgument("probs must form a distribution")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    counts = rng.multinomial(n, probs, size=reps)
    gaps = np.abs(np.cumsum(counts, axis=1) / n - np.cumsum(probs)).max(axis=1)
    exceed = int((gaps > epsilon).sum())
    bound = dkw_band(n, epsilon)
    sigma = math.sqrt(bound * (1 - bound) / reps)
    freq = exceed / reps
    return {"n": n, "reps": reps, "epsilon": epsilon, "seed": seed, "atoms": len(probs),
            "exceedances": exceed, "frequency": freq, "bound": bound, "sigma": sigma,
            "limit": bound + 3 * sigma, "max_gap": float(gaps.max()),
            "passed": freq <= bound + 3 * sigma}


def naq_t(ident: str, pool: Pool) -> Fraction:
    """Mid-rank quantile of a time-penalised M_T value within a pool of them."""
    return naq_of(ident, pool)


@dataclass
class NaqReport:
    rows: list
    size: int
    infinite: list
    bucket_width: int
    confidence: float
    epsilon: float

    def as_dict(self) -> dict:
        return {"size": self.size, "infinite": self.infinite, "bucket_width": self.bucket_width,
                "band": {"confidence": self.confidence, "epsilon": self.epsilon},
                "rows": self.rows}


def rank_pool(pool: Pool, bucket_width: int = 1, confidence: float = 0.95) -> NaqReport:
    pool._require()
    rows = []
    for e in pool.finite:
        q = naq_midrank(e.m, pool)
        rows.append({"id": e.id, "m": _jsonable(e.m), "naq": q,
                     "bucket": math.floor(float(e.m)) // bucket_width})
    eps = dkw_epsilon(pool.size, 1 - confidence)
    return NaqReport(rows, pool.size, [e.id for e in pool.infinite], bucket_width, confidence, eps)


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if hasattr(v, "bits"):
        return v.bits
    return v


# --- JSON Lines pools -----------------------------------------------------------

def read_pool(lines: Iterable[str]) -> Pool:
    entries = []
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
            m = rec.get("m")
            m = INF if m in (None, "inf", "Infinity") else m
            entries.append(PoolEntry(str(rec["id"]), m, rec.get("method", "exact_bounded"),
                                     rec.get("caps", {}), rec.get("status", "exact")))
        except (ValueError, KeyError, TypeError) as exc:
            raise InvalidArgument(f"line {lineno}: bad pool record ({exc})") from exc
    return Pool(entries)


def pool_record(e: PoolEntry) -> dict:
    m = None if is_infinite(e.m) else _jsonable(e.m)
    return {"id": e.id, "m": m, "method": e.method, "caps": e.caps, "status": e.status}

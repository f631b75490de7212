"""Closed-form converses and counting lower bounds.

Entropy and code lengths are in bits. ``gc_required`` is the one place a
natural log appears: the bound (1/p) ln(1/eps) comes from
(1 - p)^n <= exp(-p n), so the base is part of the formula.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bitcode import BitString, InvalidArgument, encode_nat, length_lex, length_lex_unrank
from .complexity import Caps, m_exact, program_table
from .descsel import LENGTH_LEX, FeatureSystem, RealizerEnumeration, ceil_log2, selection_index
from .executor import Executor
from .naq import Pool, PoolEntry, naq_midrank
from .validity import ValidityPredicate

# Any injective map from 2^n identifiers into advice strings needs one string
# of length >= n, since only 2^n - 1 strings are shorter.
C_ID = 0
# Distinct panel members need distinct prefix-free programs; Kraft forbids
# |S| of them all shorter than ceil(log2 |S|).
C_VP = 0

GC_CHUNK = 1000


@dataclass(frozen=True)
class DiscreteDistribution:
    atoms: tuple

    def __init__(self, atoms: Iterable):
        atoms = tuple((label, float(p)) for label, p in atoms)
        if not atoms:
            raise InvalidArgument("distribution needs at least one atom")
        if any(p < 0 for _, p in atoms):
            raise InvalidArgument("negative probability")
        if abs(math.fsum(p for _, p in atoms) - 1.0) > 1e-12:
            raise InvalidArgument("probabilities do not sum to 1")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def uniform(cls, k: int) -> DiscreteDistribution:
        return cls((i, 1.0 / k) for i in range(k))

    @property
    def support_size(self) -> int:
        return len(self.atoms)

    def cdf(self) -> list[float]:
        return list(np.cumsum([p for _, p in self.atoms]))


def entropy(d: DiscreteDistribution) -> float:
    return -math.fsum(p * math.log2(p) for _, p in d.atoms if p > 0)


def binary_entropy(eps: float) -> float:
    if not 0 <= eps <= 1:
        raise InvalidArgument("eps must lie in [0, 1]")
    if eps in (0, 1):
        return 0.0
    return -eps * math.log2(eps) - (1 - eps) * math.log2(1 - eps)


def fano_lower_bound(H: float, epsilon: float, support: int, kraft_slack: float = 1.0) -> float:
    """max(0, H - h(eps) - eps log2(|Y| - 1) - slack): expected message length
    needed to recover Y* with error probability eps."""
    if not 0 <= epsilon < 1:
        raise InvalidArgument("epsilon must lie in [0, 1)")
    if support < 2:
        raise InvalidArgument("support must have at least 2 elements")
    if H < 0 or H > math.log2(support) + 1e-12:
        raise InvalidArgument(f"entropy {H} is impossible on {support} outcomes")
    value = H - binary_entropy(epsilon) - epsilon * math.log2(support - 1) - kraft_slack
    return max(0.0, value)


# --- identity family ----------------------------------------------------------

@dataclass(frozen=True)
class IdentityFamily:
    """x_s = encode_nat(n) + s; the only valid response at x_s is s + "1" (s, ok)."""

    n: int

    def identifiers(self) -> list[BitString]:
        return list(length_lex(self.n, self.n))

    def instance(self, s: BitString) -> BitString:
        return encode_nat(self.n) + s

    def identifier(self, x: BitString) -> BitString:
        head = encode_nat(self.n)
        if not x.startswith(head) or len(x) != len(head) + self.n:
            raise InvalidArgument(f"{x!r} is not an instance of the n={self.n} family")
        return x[len(head):]

    @staticmethod
    def target(s: BitString) -> BitString:
        return s + "1"

    @property
    def predicate(self) -> ValidityPredicate:
        return ValidityPredicate(f"identity({self.n})",
                                 lambda x, r: r == self.target(self.identifier(x)))


def first_advice(E: Executor, max_len: int) -> dict[BitString, BitString]:
    """Output -> least advice (length, then lex) producing it.

    For singleton feasible sets this is exactly the advice burden search,
    done once for all instances.
    """
    first: dict[BitString, BitString] = {}
    for w in E.domain(max_len):
        first.setdefault(E(w), w)
    return first


def collision_certificate(n: int, c: int = C_ID) -> dict:
    """Pigeonhole witness: fewer short strings than identifiers.

    Under the canonical assignment "identifier of rank k -> short string of
    rank k mod #short", the two listed identifiers share advice.
    """
    ids = 1 << n
    short = (1 << max(n - c, 0)) - 1
    cert = {"n": n, "c": c, "identifiers": ids, "short_advice": short,
            "rule": "rank(s) mod short_advice"}
    if short == 0:
        cert["collision"] = None
        return cert
    s1 = format(0, f"0{n}b")
    s2 = format(short, f"0{n}b")
    cert["collision"] = {"s1": s1, "s2": s2, "advice": length_lex_unrank(0)}
    return cert


def verify_collision_certificate(cert: dict) -> bool:
    """Recheck a certificate from its numbers alone."""
    n, c = cert["n"], cert["c"]
    ids = 1 << n
    short = sum(1 << k for k in range(max(n - c, 0)))
    if cert["identifiers"] != ids or cert["short_advice"] != short or not short < ids:
        return False
    col = cert["collision"]
    if col is None:
        return short == 0
    r1, r2 = int(col["s1"], 2), int(col["s2"], 2)
    return (col["s1"] != col["s2"] and r1 % short == r2 % short
            and length_lex_unrank(r1 % short) == col["advice"])


def identity_family_bound(n: int, E: Executor, max_len: int) -> dict:
    if not 1 <= n <= 12:
        raise InvalidArgument("identity family is exhaustive only for 1 <= n <= 12")
    if max_len < n:
        raise InvalidArgument("max_len must be >= n")
    fam = IdentityFamily(n)
    first = first_advice(E, max_len)
    rows = []
    for s in fam.identifiers():
        w = first.get(fam.target(s))
        rows.append({"s": s, "x": fam.instance(s), "burden": len(w) if w is not None else math.inf,
                     "witness": w})
    finite = [r["burden"] for r in rows if r["burden"] != math.inf]
    sup = max(r["burden"] for r in rows)
    arg = next(r["s"] for r in rows if r["burden"] == sup)
    # disjoint feasible sets force distinct witnesses
    witnesses = [r["witness"] for r in rows if r["witness"] is not None]
    pool = Pool(PoolEntry(r["s"], r["burden"]) for r in rows)
    top = max(rows, key=lambda r: (naq_midrank(r["burden"], pool) if r["burden"] != math.inf
                                   else Fraction(2), r["s"]))
    cert = collision_certificate(n)
    return {
        "n": n, "executor": E.id, "max_len": max_len, "c_id": C_ID,
        "sup_burden": sup, "argmax": arg, "unresolved": len(rows) - len(finite),
        "holds": sup >= n - C_ID and sum(1 for b in finite if b < n - C_ID) <= cert["short_advice"],
        "witnesses_distinct": len(set(witnesses)) == len(witnesses),
        "certificate": cert, "certificate_valid": verify_collision_certificate(cert),
        "below_n_minus_c": sum(1 for b in finite if b < n - C_ID),
        "top_quantile": {"s": top["s"], "burden": top["burden"],
                         "naq": (str(naq_midrank(top["burden"], pool))
                                 if top["burden"] != math.inf else None),
                         "burden_at_least_n_minus_c": top["burden"] >= n - C_ID},
        "rows": rows,
    }


# --- variant panels -------------------------------------------------------------

def panel_overlap(feasibility: Mapping[BitString, Iterable[BitString]]) -> int:
    """Delta(S): the most panel members any single response is feasible for."""
    counts: dict[BitString, int] = {}
    for resp in feasibility.values():
        for r in set(resp):
            counts[r] = counts.get(r, 0) + 1
    return max(counts.values(), default=0)


def separated_panel(size: int, caps=None) -> dict[BitString, set]:
    """``size`` members whose singleton targets are the cheapest U_B outputs,
    the hardest case for the bound."""
    caps = caps or Caps(20)
    outs = program_table(caps.length_cap, caps.step_budget).outputs_by_complexity()
    if size > len(outs):
        raise InvalidArgument("panel larger than the output table")
    return {encode_nat(j + 1): {outs[j]} for j in range(size)}


def overlapping_panel(size: int) -> dict[BitString, set]:
    return {encode_nat(j + 1): {"", format(j, "b")} for j in range(size)}


def variant_panel_bound(feasibility: Mapping[BitString, Iterable[BitString]], caps=None) -> dict:
    caps = caps or Caps(20)
    feas = {x: frozenset(v) for x, v in feasibility.items()}
    size = len(feas)
    delta = panel_overlap(feas)
    need = ceil_log2(size) - C_VP if size else 0
    if delta > 1:
        return {"size": size, "overlap": delta, "status": "precondition-violated",
                "passed": False, "c_vp": C_VP}
    V = ValidityPredicate("panel", lambda x, r: r in feas[x])
    rows = []
    for x in sorted(feas):
        est = m_exact(x, V, caps)
        rows.append({"x": x, "m": est.value, "witness": est.witness, "status": est.status})
    top = max((r["m"] for r in rows), default=0)
    return {"size": size, "overlap": delta, "status": "ok", "c_vp": C_VP,
            "required": max(need, 0), "max_m": top, "passed": top >= need, "rows": rows}


# --- selection model ----------------------------------------------------------

def _check_p(p: float):
    if not 0 < p <= 1:
        raise InvalidArgument("p must lie in (0, 1]")


def gc_success(p: float, n: int) -> float:
    """Pr(at least one of n i.i.d. candidates succeeds) = 1 - (1 - p)^n."""
    _check_p(p)
    if n < 0:
        raise InvalidArgument("n must be >= 0")
    return 1.0 - (1.0 - p) ** n


def gc_required(p: float, eps: float) -> int:
    """ceil((1/p) ln(1/eps)) candidates keep the failure rate below eps."""
    _check_p(p)
    if not 0 < eps < 1:
        raise InvalidArgument("eps must lie in (0, 1)")
    return math.ceil(math.log(1.0 / eps) / p)


@dataclass(frozen=True)
class SelectionModel:
    p: float
    n: int
    epsilon: float = 0.05

    def __post_init__(self):
        _check_p(self.p)
        if not 0 < self.epsilon < 1:
            raise InvalidArgument("epsilon must lie in (0, 1)")
        if self.n < 0:
            raise InvalidArgument("candidate count must be >= 0")


def _gc_chunk(args) -> int:
    seed_seq, trials, p, n = args
    rng = np.random.default_rng(seed_seq)
    if n == 0:
        return 0
    hits = rng.random((trials, n)) < p
    return int(hits.any(axis=1).sum())


def gc_simulate(model: SelectionModel, trials: int, seed: int, workers: int = 1) -> dict:
    """Draw n Bernoulli(p) candidates per trial; count trials with a success.

    Trials are cut into fixed chunks, each with its own child seed, so the
    result depends only on (seed, trials), not on ``workers``.
    """
    if trials < 1:
        raise InvalidArgument("trials must be >= 1")
    sizes = [min(GC_CHUNK, trials - k) for k in range(0, trials, GC_CHUNK)]
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(c, t, model.p, model.n) for c, t in zip(children, sizes)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(_gc_chunk, jobs))
    else:
        counts = [_gc_chunk(j) for j in jobs]
    hits = sum(counts)
    q = gc_success(model.p, model.n)
    freq = hits / trials
    sigma = math.sqrt(q * (1 - q) / trials)
    return {"p": model.p, "n": model.n, "trials": trials, "seed": seed,
            "successes": hits, "frequency": freq, "closed_form": q, "sigma": sigma,
            "interval": [q - 3 * sigma, q + 3 * sigma],
            "within_3sigma": abs(freq - q) <= 3 * sigma + 1e-15}


def gc_index_vs_p(x, y: BitString, fs: FeatureSystem, en: RealizerEnumeration = LENGTH_LEX,
                  caps=None, response_cap: int = 12) -> dict:
    """Compare ceil(log2 i_y(x)) with ceil(log2 1/p_y(x)).

    p_y(x) is the mass 2^-K(r) of the fiber over all responses of length
    <= ``response_cap``, renormalized: a truncation of the universal
    semimeasure, which cannot be computed.
    """
    caps = caps or Caps(20)
    table = program_table(caps.length_cap, caps.step_budget)
    total = Fraction(0)
    fiber = Fraction(0)
    for r in length_lex(response_cap):
        hit = table.best.get(r)
        if hit is None:
            continue
        mass = Fraction(1, 1 << hit[0])
        total += mass
        if fs.phi(x, r) == y:
            fiber += mass
    i = selection_index(x, y, fs, en, 1 << (response_cap + 1))
    report = {"x": x, "y": y, "system": fs.id, "enumeration": en.id,
              "semimeasure": f"2^-K truncated to |r| <= {response_cap}, renormalized",
              "index": i, "p": None, "log_index": None, "log_inv_p": None, "gap": None,
              "complete": fiber > 0 and i != math.inf}
    if fiber > 0:
        p = fiber / total
        report["p"] = float(p)
        report["log_inv_p"] = ceil_log2(1 / p)
    if i != math.inf:
        report["log_index"] = ceil_log2(i)
    if report["complete"]:
        report["gap"] = report["log_index"] - report["log_inv_p"]
    return report


def gc_sweep(cases: Sequence[tuple], trials: int, seed: int, workers: int = 1) -> list[dict]:
    """One simulation per (p, n); child seeds derive from ``seed`` by position."""
    seeds = np.random.SeedSequence(seed).generate_state(len(cases))
    return [gc_simulate(SelectionModel(p, n), trials, int(s), workers)
            for (p, n), s in zip(cases, seeds)]

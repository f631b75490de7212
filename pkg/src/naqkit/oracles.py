"""Slow reference implementations written straight from the definitions.

These share no search code with the estimators they check: they walk every
bit string, parse framing by hand and compare floats with a tolerance
instead of the integer keys used by the fast paths. Only the machine
interpreter itself is shared, since it *is* the definition.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

from .machine import run_machine

TOL = 1e-9


def all_strings(max_len: int, min_len: int = 0):
    for n in range(min_len, max_len + 1):
        for v in range(2 ** n):
            yield bin(v)[2:].zfill(n) if n else ""


def _gamma(s: str, pos: int = 0):
    zeros = 0
    while pos + zeros < len(s) and s[pos + zeros] == "0":
        zeros += 1
    end = pos + 2 * zeros + 1
    if end > len(s):
        return None
    return int(s[pos + zeros:end], 2), end


def is_program(p: str) -> bool:
    got = _gamma(p)
    return got is not None and len(p) - got[1] == got[0] - 1


def in_universal_domain(w: str) -> bool:
    """Membership in the universal executor's advice domain, by hand."""
    if w.startswith("1"):
        return is_program(w[1:])
    if w.startswith("010"):
        got = _gamma(w, 3)
        return got is not None and len(w) - got[1] == got[0] - 1
    return w == "011"


def khat_brute(r: str, length_cap: int, budget: int = 1 << 16, aux: str = "") -> float:
    """Run every bit string up to the cap; the shortest halting printer of r."""
    for p in all_strings(length_cap):
        if is_program(p):
            out = run_machine(p, budget, aux)
            if out.halted and out.output == r:
                return len(p)
    return math.inf


def m_brute(x, V, length_cap: int, budget: int = 1 << 16) -> float:
    for p in all_strings(length_cap):
        if is_program(p):
            out = run_machine(p, budget)
            if out.halted and V(x, out.output):
                return len(p)
    return math.inf


def levin_brute(x, E, V, B: int, budget: int = 1 << 16) -> float:
    """min |w| + log2(1 + tau) over the whole domain, runs untruncated.

    Values above B are reported as inf, since no truncated search can see them.
    """
    best = math.inf
    for w in all_strings(B):
        if not in_universal_domain(w):
            continue
        out = E.run(w, budget)
        if not out.halted or not V(x, out.output):
            continue
        best = min(best, len(w) + math.log2(1 + out.steps))
    return best if best <= B + TOL else math.inf


def survives(B: int, advice_len: int, steps: float) -> bool:
    """|w| + log2(1 + tau) <= B, in floating point."""
    return steps != math.inf and advice_len + math.log2(1 + steps) <= B + TOL


def argmin_brute(x, V, L, rank, candidates: Iterable[str]) -> str | None:
    best = None
    for r in candidates:
        if V(x, r):
            key = (L(x, r), rank(r))
            if best is None or key < best[0]:
                best = (key, r)
    return None if best is None else best[1]


def cdf_direct(values: Sequence, z) -> Fraction:
    hits = 0
    for v in values:
        if v <= z:
            hits += 1
    return Fraction(hits, len(values))


def naq_direct(m, values: Sequence) -> Fraction:
    score = Fraction(0)
    for v in values:
        if v < m:
            score += 1
        elif v == m:
            score += Fraction(1, 2)
    return score / len(values)


def dovetail_literal(x, V, L, element, fuel: int):
    """The stage-by-stage (j, k) scan exactly as written, pair by pair."""
    for s in range(fuel):
        for j in range(s + 1):
            for k in range(s + 1):
                if max(j, k) < s:
                    continue  # scanned (and failed) at an earlier stage
                r = element(k)
                if V(x, r) and L(x, r) <= L.level(j):
                    return r
    return None

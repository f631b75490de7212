"""Complexity estimators relative to the bounded reference machine.

* exact bounded search: ``khat_exact`` / ``m_exact`` minimise over every
  U_B program up to a length cap, run at a fixed step budget;
* the truncated advice+time (Levin) search with its exact integer cutoff;
* compressor proxies;
* the empirical realizer-identity audit.

Estimates always carry their method and caps, so a bounded minimum is never
mistaken for the true (uncomputable) prefix complexity.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .bitcode import BitString
from .compress import VERSIONS, compressed_bits
from .executor import A_HEADER, B_WRAPPER, Executor, UniversalExecutor, advice_burden
from .machine import DEFAULT_BUDGET, programs_of_length, run_machine

HARD_CAP = 24
DEFAULT_CAP = 16
CI_CAP = 20

EXACT = "exact_bounded"
LEVIN = "levin"
COMPRESSOR = "compressor"

INF = math.inf


@dataclass(frozen=True)
class Caps:
    length_cap: int = DEFAULT_CAP
    step_budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not 0 <= self.length_cap <= HARD_CAP:
            raise ValueError(f"length_cap must be in [0, {HARD_CAP}]")
        if self.step_budget < 1:
            raise ValueError("step_budget must be >= 1")

    def as_dict(self) -> dict:
        return {"length_cap": self.length_cap, "step_budget": self.step_budget}


@dataclass(frozen=True)
class ComplexityEstimate:
    value: float
    method: str
    length_cap: int = 0
    step_budget: int = 0
    compressor_id: str | None = None
    witness: BitString | None = None
    steps: int | None = None
    response: BitString | None = None
    status: str = "exact"

    @property
    def finite(self) -> bool:
        return self.value != INF


# --- exhaustive program table -------------------------------------------------

def _stratum(args) -> list[tuple[BitString, BitString, int]]:
    n, budget, aux = args
    rows = []
    for p in programs_of_length(n):
        out = run_machine(p, budget, aux)
        if out.halted:
            rows.append((p, out.output, out.steps))
    return rows


@dataclass
class ProgramTable:
    """Every halting program up to ``length_cap`` and its output.

    ``best[r] = (length, steps, program)``: the shortest programs for r, then
    fewest steps, then lexicographically least -- the tie-break for tau*(r).
    ``first[r]`` is the (length, lex)-least program printing r.
    """

    caps: Caps
    aux: BitString = ""
    rows: list = field(default_factory=list)
    best: dict = field(default_factory=dict)
    first: dict = field(default_factory=dict)

    @classmethod
    def build(cls, caps: Caps, aux: BitString = "", workers: int = 1) -> ProgramTable:
        jobs = [(n, caps.step_budget, aux) for n in range(caps.length_cap + 1)]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                strata = list(pool.map(_stratum, jobs))
        else:
            strata = [_stratum(j) for j in jobs]
        table = cls(caps, aux)
        for rows in strata:  # strata arrive in length order regardless of scheduling
            for p, r, steps in rows:
                table.rows.append((p, r, steps))
                key = (len(p), steps, p)
                if r not in table.best or key < table.best[r]:
                    table.best[r] = key
                if r not in table.first:
                    table.first[r] = p
        return table

    def outputs_by_complexity(self) -> list[BitString]:
        return sorted(self.first, key=lambda r: (len(self.first[r]), self.first[r]))


@lru_cache(maxsize=64)
def program_table(length_cap: int = DEFAULT_CAP, step_budget: int = DEFAULT_BUDGET,
                  aux: BitString = "") -> ProgramTable:
    return ProgramTable.build(Caps(length_cap, step_budget), aux)


def _caps(caps) -> Caps:
    if caps is None:
        return Caps()
    if isinstance(caps, Caps):
        return caps
    return Caps(*caps)


def khat_exact(r: BitString, length_cap: int = DEFAULT_CAP, step_budget: int = DEFAULT_BUDGET,
               aux: BitString = "") -> ComplexityEstimate:
    """Shortest U_B program printing ``r`` within the caps; ``aux`` conditions."""
    caps = Caps(length_cap, step_budget)
    table = program_table(caps.length_cap, caps.step_budget, aux)
    hit = table.best.get(r)
    if hit is None:
        return ComplexityEstimate(INF, EXACT, length_cap, step_budget, response=r,
                                  status="infinite")
    n, steps, p = hit
    return ComplexityEstimate(n, EXACT, length_cap, step_budget, witness=p, steps=steps, response=r)


def khat_conditional(y: BitString, x: BitString, length_cap: int = DEFAULT_CAP,
                     step_budget: int = DEFAULT_BUDGET) -> ComplexityEstimate:
    """K_B(y | x): the machine reads x through its read-only auxiliary channel."""
    return khat_exact(y, length_cap, step_budget, aux=x)


def m_exact(x, V, caps=None) -> ComplexityEstimate:
    """Least program length whose output is valid at x, within the caps.

    A staged predicate is evaluated at its default stage; if some shorter
    output is still undecided there the result is marked ``unknown``.
    """
    caps = _caps(caps)
    table = program_table(caps.length_cap, caps.step_budget)
    undecided = False
    for r in table.outputs_by_complexity():
        verdict = V.evaluate(x, r)
        if verdict is True:
            p = table.first[r]
            return ComplexityEstimate(len(p), EXACT, caps.length_cap, caps.step_budget,
                                      witness=p, response=r,
                                      status="unknown" if undecided else "exact")
        if verdict is None:
            undecided = True
    return ComplexityEstimate(INF, EXACT, caps.length_cap, caps.step_budget,
                              status="unknown" if undecided else "infinite")


def m_time(x, V, caps=None) -> LevinValue | None:
    """min over valid r of K_B(r) + log2(1 + tau*(r)), compared exactly."""
    caps = _caps(caps)
    table = program_table(caps.length_cap, caps.step_budget)
    best = None
    for r, (n, steps, p) in table.best.items():
        if V.evaluate(x, r) is True:
            cand = LevinValue(n, steps, p, r)
            if best is None or cand.order_key < best.order_key:
                best = cand
    return best


# --- truncated advice + time search --------------------------------------------

@dataclass(frozen=True)
class LevinValue:
    """``length + log2(1 + steps)``, ordered exactly by ``(1 + steps) * 2**length``."""

    length: int
    steps: int
    witness: BitString | None = None
    response: BitString | None = None

    @property
    def exact_key(self) -> int:
        return (1 + self.steps) << self.length

    @property
    def order_key(self):
        return (self.exact_key, self.length, self.witness or "")

    @property
    def bits(self) -> float:
        return self.length + math.log2(1 + self.steps)

    def __lt__(self, other):
        return self.exact_key < other.exact_key

    def __le__(self, other):
        return self.exact_key <= other.exact_key

    def __gt__(self, other):
        return self.exact_key > other.exact_key

    def __ge__(self, other):
        return self.exact_key >= other.exact_key

    def __eq__(self, other):
        return isinstance(other, LevinValue) and self.exact_key == other.exact_key

    def __hash__(self):
        return hash(self.exact_key)

    def __float__(self):
        return self.bits


def cutoff(B: int, advice_len: int) -> int:
    """Steps granted to advice of this length: 2**(B - |w|) - 1."""
    if advice_len > B:
        raise ValueError("advice longer than the budget")
    return (1 << (B - advice_len)) - 1


def keep(B: int, advice_len: int, steps: int) -> bool:
    """Whether a run of ``steps`` survives the cutoff (integer test only)."""
    return steps <= cutoff(B, advice_len)


@dataclass(frozen=True)
class LevinResult:
    value: float
    witness: BitString | None
    best: LevinValue | None
    B: int
    runs: int


def levin_value(x, E: Executor, V_T, B: int) -> LevinResult:
    """Run every advice ``|w| <= B`` for exactly 2**(B-|w|) - 1 steps.

    Among runs that halt inside their cutoff with a valid output, minimise
    ``|w| + log2(1 + tau)``; ties go to shorter, then lexicographically
    smaller advice.
    """
    best = None
    runs = 0
    for w in E.domain(B):
        theta = cutoff(B, len(w))
        out = E.run(w, max(theta, 1))
        runs += 1
        if not out.halted or out.steps > theta:
            continue
        if V_T.evaluate(x, out.output) is not True:
            continue
        cand = LevinValue(len(w), out.steps, w, out.output)
        if best is None or cand.order_key < best.order_key:
            best = cand
    if best is None:
        return LevinResult(INF, None, None, B, runs)
    return LevinResult(best.bits, best.witness, best, B, runs)


# --- compressor proxies -------------------------------------------------------

def khat_compressor(r: BitString, compressor_id: str = "lz78") -> ComplexityEstimate:
    return ComplexityEstimate(compressed_bits(r, compressor_id), COMPRESSOR,
                              compressor_id=f"{compressor_id}:{VERSIONS.get(compressor_id, '?')}",
                              response=r)


def m_compressor(x, V, candidates: Iterable[BitString], compressor_id: str = "lz78") -> ComplexityEstimate:
    """Proxy M: least compressed size over an explicit candidate set."""
    best = None
    for r in candidates:
        if V(x, r):
            est = khat_compressor(r, compressor_id)
            if best is None or (est.value, r) < (best.value, best.response):
                best = est
    if best is None:
        return ComplexityEstimate(INF, COMPRESSOR, compressor_id=compressor_id, status="infinite")
    return best


def concatenation_report(corpus: Sequence[BitString], compressor_id: str = "lz78",
                         c_cat: int = 8) -> dict:
    """Check K(rr) <= 2 K(r) + c_cat on a corpus; violations are listed, not raised."""
    rows = []
    for r in corpus:
        single = compressed_bits(r, compressor_id)
        double = compressed_bits(r + r, compressor_id)
        rows.append({"r": r, "k": single, "kk": double, "ok": double <= 2 * single + c_cat})
    return {"compressor": compressor_id, "c_cat": c_cat, "rows": rows,
            "violations": sum(not row["ok"] for row in rows)}


# --- realizer identity ----------------------------------------------------------

@dataclass
class GapReport:
    rows: list
    a: int
    b: int
    max_gap: float
    excluded: list
    passed: bool

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "max_abs_gap": self.max_gap, "passed": self.passed,
                "excluded": self.excluded, "rows": self.rows}


def realizer_identity_audit(corpus: Iterable, caps=None) -> GapReport:
    """Compare advice burden under E_univ with m_exact on each (id, x, V).

    Passes iff every instance resolves within the caps and the largest
    absolute gap is at most a + b.
    """
    caps = _caps(caps)
    E = UniversalExecutor(caps.step_budget)
    rows, excluded = [], []
    for item in corpus:
        ident, x, V = item if len(item) == 3 else (str(item[0]), *item)
        m = m_exact(x, V, caps)
        if not m.finite or m.status != "exact":
            excluded.append({"id": ident, "reason": f"m_exact {m.status}"})
            continue
        burden = advice_burden(E, V, x, caps.length_cap + A_HEADER)
        if not burden.finite or burden.status != "exact":
            excluded.append({"id": ident, "reason": f"burden {burden.status}"})
            continue
        gap = burden.value - m.value
        rows.append({"id": ident, "x": x, "predicate": V.id, "burden": burden.value,
                     "m": m.value, "gap": gap,
                     "upper_ok": burden.value <= m.value + A_HEADER,
                     "lower_ok": m.value <= burden.value + B_WRAPPER,
                     "burden_witness": burden.witness, "m_witness": m.witness})
    max_gap = max((abs(r["gap"]) for r in rows), default=0)
    passed = bool(rows) and not excluded and max_gap <= A_HEADER + B_WRAPPER
    return GapReport(rows, A_HEADER, B_WRAPPER, max_gap, excluded, passed)

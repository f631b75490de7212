"""Validity predicates, discrete losses, tie orders and the dovetail argmin.

Also builds the budgeted-halting fixture families: the halting oracle of the
classical constructions is replaced by "program p_n halts within a step
budget", which keeps every fixture decidable while preserving how the
optimizer's choice encodes the halting bit.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterator

from .bitcode import BitString, InvalidArgument, encode_nat, length_lex_rank, length_lex_unrank
from .machine import programs, run_machine

DECIDABLE = "decidable"
CE_STAGED = "ce_staged"
COMPUTABLE = "computable"
USC_STAGED = "usc_staged"


class Unresolved(RuntimeError):
    """The dovetail ran out of fuel before any pair fired."""

    def __init__(self, fuel: int):
        super().__init__(f"unresolved at fuel {fuel}")
        self.fuel = fuel


@dataclass(frozen=True)
class ValidityPredicate:
    """``fn(x, r)`` for decidable predicates, ``fn(x, r, stage)`` for staged.

    A staged predicate answers True (accepted by ``stage``), False (rejected
    for good) or None (not yet accepted). Acceptance never gets revoked as the
    stage grows.
    """

    id: str
    fn: Callable
    mode: str = DECIDABLE
    default_stage: int = 0

    def evaluate(self, x, r, stage: int | None = None) -> bool | None:
        if self.mode == DECIDABLE:
            return bool(self.fn(x, r))
        return self.fn(x, r, self.default_stage if stage is None else stage)

    def __call__(self, x, r) -> bool:
        return self.evaluate(x, r) is True

    def at_stage(self, stage: int) -> ValidityPredicate:
        """Freeze a staged predicate into a decidable one (undecided -> reject)."""
        if self.mode == DECIDABLE:
            return self
        return ValidityPredicate(f"{self.id}@{stage}", lambda x, r: self.fn(x, r, stage) is True)


@dataclass(frozen=True)
class DiscreteLoss:
    """A loss whose values all lie in the increasing enumeration ``level(j)``.

    ``staged(x, r, s)`` is only meaningful for ``usc_staged`` losses: a
    nonincreasing sequence in ``s`` that settles at ``fn(x, r)``.
    """

    id: str
    fn: Callable
    level: Callable[[int], Fraction] = lambda j: Fraction(j)
    mode: str = COMPUTABLE
    staged_fn: Callable | None = None

    def __call__(self, x, r) -> Fraction:
        return Fraction(self.fn(x, r))

    def staged(self, x, r, s: int) -> Fraction:
        if self.staged_fn is None:
            return self(x, r)
        return Fraction(self.staged_fn(x, r, s))


@dataclass(frozen=True)
class TieOrder:
    """A computable total order on responses given by an enumeration (e_k).

    Defaults to length-lex; ``swaps`` exchanges the positions of listed pairs.
    """

    swaps: tuple[tuple[str, str], ...] = ()

    def _swap(self, r: str) -> str:
        for a, b in self.swaps:
            if r == a:
                return b
            if r == b:
                return a
        return r

    def element(self, k: int) -> BitString:
        return self._swap(length_lex_unrank(k))

    def rank(self, r: BitString) -> int:
        return length_lex_rank(self._swap(r))

    def key(self, r: BitString) -> int:
        return self.rank(r)


LENGTH_LEX = TieOrder()


def _new_pairs(s: int) -> Iterator[tuple[int, int]]:
    # Pairs with max(j, k) == s, in lexicographic (j, k) order.
    for j in range(s):
        yield j, s
    for k in range(s + 1):
        yield s, k


def argmin_dovetail(x, V: ValidityPredicate, L: DiscreteLoss, order: TieOrder = LENGTH_LEX,
                    fuel: int = 4096) -> BitString:
    """Dovetail over (loss level j, enumeration index k) and return the first hit.

    At stage s every pair with j, k <= s is scanned in lexicographic order
    and the first pair with ``V(x, e_k)`` and ``L(x, e_k) <= level(j)`` is
    returned. Pairs from earlier stages already failed, so only the 2s + 1
    new pairs matter, and among them the first hit can be found without
    visiting each: (j, s) with j < s fires iff e_s's loss is within
    level(s - 1); otherwise (s, k) fires for the least k within level(s).

    The result is the order-least minimizer only when no valid response of
    higher loss but smaller index fires first, i.e. when the levels are dense
    relative to the minimizer's index. The fixture families choose their
    level enumerations so this holds. ``fuel`` is the number of stages.
    """
    valid: list[bool] = []
    loss: list[Fraction] = []
    best = None  # least loss among valid e_k seen so far
    for s in range(fuel):
        r = order.element(s)
        valid.append(V(x, r))
        loss.append(L(x, r) if valid[s] else Fraction(0))
        if valid[s] and s > 0 and loss[s] <= L.level(s - 1):
            return r
        if valid[s] and (best is None or loss[s] < best):
            best = loss[s]
        level = L.level(s)
        if best is not None and best <= level:
            for k in range(s + 1):
                if valid[k] and loss[k] <= level:
                    return order.element(k)
    raise Unresolved(fuel)


def level_density(length_bound: int) -> int:
    """Levels j / D with D above the index of every response shorter than
    ``length_bound``."""
    return 1 << length_bound


# --- predicate registry -------------------------------------------------------

def _parity(s: str) -> int:
    return s.count("1") % 2


PREDICATES: dict[str, Callable[..., Callable]] = {
    "always": lambda: lambda x, r: True,
    "never": lambda: lambda x, r: False,
    "empty": lambda: lambda x, r: r == "",
    "nonempty": lambda: lambda x, r: len(r) >= 1,
    "ends-in-1": lambda: lambda x, r: r.endswith("1"),
    "equals": lambda target: lambda x, r: r == target,
    "min-length": lambda n: lambda x, r: len(r) >= n,
    "equals-x": lambda: lambda x, r: r == x,
    "reverse-x": lambda: lambda x, r: r == x[::-1],
    "complement-x": lambda: lambda x, r: r == x.translate(str.maketrans("01", "10")),
    "prefix-x": lambda: lambda x, r: r.startswith(x),
    "contains-x": lambda: lambda x, r: x in r,
    "same-parity-length-x": lambda: lambda x, r: len(r) == len(x) and _parity(r) == _parity(x),
}


def predicate(name: str, **params) -> ValidityPredicate:
    try:
        make = PREDICATES[name]
    except KeyError:
        raise InvalidArgument(f"unknown predicate {name!r}") from None
    suffix = ",".join(f"{k}={v}" for k, v in sorted(params.items()))
    return ValidityPredicate(f"{name}({suffix})" if suffix else name, make(**params))


def length_loss() -> DiscreteLoss:
    return DiscreteLoss("length", lambda x, r: len(r))


# --- budgeted-halting fixtures -----------------------------------------------

def enc(n: int, b: int) -> BitString:
    """Prefix-free code of the pair (n, b)."""
    return encode_nat(n) + str(b)


def parse_promise(x: BitString) -> int:
    """n from an instance of the promised shape ``0^n 1 u``."""
    n = x.find("1")
    if n < 1:
        raise InvalidArgument(f"instance {x!r} is not of the form 0^n 1 u with n >= 1")
    return n


def nth_program(n: int) -> BitString:
    """p_n: the n-th well-framed U_B program (1-based) in (length, lex) order."""
    if n < 1:
        raise InvalidArgument("program index starts at 1")
    return next(itertools.islice(programs(64), n - 1, None))


def halts_within(n: int, budget: int) -> bool:
    return run_machine(nth_program(n), budget).halted


def halting_step(n: int, budget: int) -> int | None:
    out = run_machine(nth_program(n), budget)
    return out.steps if out.halted else None


@dataclass(frozen=True)
class Fixture:
    kind: str
    n: int
    halting_budget: int
    x: BitString
    V: ValidityPredicate
    L: DiscreteLoss
    order: TieOrder
    expected: BitString
    halts: bool
    length_bound: int = field(default=0)


def make_fixture_usc(n: int, halting_budget: int, u: BitString = "") -> Fixture:
    """Trivial validity, upper-semicomputable loss whose optimum is the halting bit.

    Loss table at x = 0^n 1 u:  r_{n,1} -> 2n+1 - [p_n halts],
    r_{n,0} -> 2n, anything else -> 2n+2+|r|. At equal loss r_{n,1} wins.
    """
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    r0, r1 = enc(n, 0), enc(n, 1)
    p_n = nth_program(n)

    def staged(x, r, s):
        m = parse_promise(x)
        if r == enc(m, 1):
            halted = run_machine(nth_program(m), max(1, min(s, halting_budget))).halted
            return 2 * m + 1 - int(halted and s >= 1)
        if r == enc(m, 0):
            return 2 * m
        return 2 * m + 2 + len(r)

    D = level_density(len(r0) + 1)
    L = DiscreteLoss(f"usc-loss(B={halting_budget})", lambda x, r: staged(x, r, halting_budget),
                     level=lambda j: Fraction(j, D), mode=USC_STAGED, staged_fn=staged)
    V = predicate("always")
    halts = run_machine(p_n, halting_budget).halted
    return Fixture("usc", n, halting_budget, "0" * n + "1" + u, V, L,
                   TieOrder(((r0, r1),)), r1 if halts else r0, halts, len(r0) + 1)


def make_fixture_ce(n: int, halting_budget: int, u: BitString = "") -> Fixture:
    """Staged (c.e.) validity with a computable loss.

    r_{n,0} is always valid, r_{n,1} is valid once p_n is seen to halt
    (stage = step count), everything else is invalid. Loss 0 / 1 / 2+|r|.
    """
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    r0, r1 = enc(n, 0), enc(n, 1)

    def staged(x, r, s):
        m = parse_promise(x)
        if r == enc(m, 0):
            return True
        if r == enc(m, 1):
            if s >= 1 and run_machine(nth_program(m), max(1, min(s, halting_budget))).halted:
                return True
            return False if s >= halting_budget else None
        return False

    def loss(x, r):
        m = parse_promise(x)
        if r == enc(m, 1):
            return 0
        if r == enc(m, 0):
            return 1
        return 2 + len(r)

    V = ValidityPredicate(f"ce-valid(B={halting_budget})", staged, CE_STAGED, halting_budget)
    halts = run_machine(nth_program(n), halting_budget).halted
    D = level_density(len(r0) + 1)
    return Fixture("ce", n, halting_budget, "0" * n + "1" + u, V,
                   DiscreteLoss("ce-loss", loss, level=lambda j: Fraction(j, D)), LENGTH_LEX,
                   r1 if halts else r0, halts, len(r0) + 1)


def fixture_from_dict(d: dict[str, Any]) -> Fixture | ValidityPredicate:
    """Build a fixture or predicate from its declarative JSON form.

    ``{"kind": "usc"|"ce", "n": 3, "halting_budget": 50}`` or
    ``{"kind": "predicate", "name": "equals", "params": {"target": "101"}}``.
    """
    kind = d.get("kind")
    if kind == "usc":
        return make_fixture_usc(int(d["n"]), int(d["halting_budget"]), d.get("u", ""))
    if kind == "ce":
        return make_fixture_ce(int(d["n"]), int(d["halting_budget"]), d.get("u", ""))
    if kind == "predicate":
        return predicate(d["name"], **d.get("params", {}))
    raise InvalidArgument(f"unknown fixture kind {kind!r}")


def fixtures_from_json(text: str) -> list:
    data = json.loads(text)
    return [fixture_from_dict(s) for s in (data if isinstance(data, list) else [data])]


def solve_fixture(f: Fixture, fuel: int | None = None) -> BitString:
    if fuel is None:
        # every fixture loss is at most 2n + 2 + (bound) at a response within the bound
        fuel = (2 * f.n + 3 + f.length_bound) * level_density(f.length_bound) + 1
    V = f.V.at_stage(f.halting_budget)
    return argmin_dovetail(f.x, V, f.L, f.order, fuel)


def selector_witness_report(fixtures, length_cap: int = 20, step_budget: int = 1 << 16) -> dict:
    """K_B(r* | x) for each fixture's selected response; the max is the
    empirical stand-in for the machine-relative constant bounding it."""
    from .complexity import khat_conditional

    rows = []
    for f in fixtures:
        r = solve_fixture(f)
        k = khat_conditional(r, f.x, length_cap, step_budget).value
        rows.append({"kind": f.kind, "n": f.n, "x": f.x, "rstar": r, "k_given_x": k})
    finite = [r["k_given_x"] for r in rows if r["k_given_x"] != float("inf")]
    return {"rows": rows, "max": max(finite, default=None),
            "unresolved": len(rows) - len(finite), "length_cap": length_cap}

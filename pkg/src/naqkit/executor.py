"""Input-blind executors and the universal header-dispatch executor.

An executor only ever sees the advice ``w``; nothing in its call signature
can carry the instance. Every executor is total: malformed advice maps to
the empty response.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterator

from .bitcode import (
    PAIR_OVERHEAD,
    BitString,
    HeaderTable,
    decode_nat,
    encode_nat,
    gamma_length,
)
from .machine import (
    DEFAULT_BUDGET,
    HALTED,
    MACHINE_VERSION,
    RunOutcome,
    programs_of_length,
    run_machine,
)

REGISTRY_VERSION = "headers-1"

H_MACHINE = "1"
H_REFERENCE = "010"
H_NULL = "011"
# "00" is reserved: advice starting with it hits no executor.

HEADERS = HeaderTable({"machine": H_MACHINE, "reference": H_REFERENCE, "null": H_NULL})


class Executor:
    """A total, input-blind map from advice to responses.

    ``run`` reports the halting time as well; ``domain_len(n)`` lists the
    prefix-free advice domain at length ``n`` in lexicographic order.
    """

    id: str = "executor"

    def run(self, w: BitString, budget: int = DEFAULT_BUDGET) -> RunOutcome:
        raise NotImplementedError

    def domain_len(self, n: int) -> Iterator[BitString]:
        raise NotImplementedError

    def __call__(self, w: BitString) -> BitString:
        out = self.run(w)
        return out.output if out.halted else ""

    def domain(self, max_len: int) -> Iterator[BitString]:
        for n in range(max_len + 1):
            yield from self.domain_len(n)

    def __repr__(self):
        return f"<{type(self).__name__} {self.id}>"


def _parse_literal(w: BitString) -> BitString | None:
    got = decode_nat(w)
    if got is None:
        return None
    n, pos = got
    if len(w) < pos + n - 1:
        return None
    return w[pos:pos + n - 1]


class ReferenceExecutor(Executor):
    """``encode_nat(l + 1)`` followed by ``l`` literal output bits."""

    id = "reference"

    def run(self, w, budget=DEFAULT_BUDGET):
        r = _parse_literal(w)
        if r is None:
            return RunOutcome(HALTED, "", 0)
        if len(r) > budget:
            return RunOutcome("timeout", None, budget)
        return RunOutcome(HALTED, r, len(r))

    def domain_len(self, n):
        for l in range(n + 1):
            if gamma_length(l + 1) + l == n:
                head = encode_nat(l + 1)
                if l == 0:
                    yield head
                else:
                    for v in range(1 << l):
                        yield head + format(v, f"0{l}b")
                return


class MachineExecutor(Executor):
    """Advice is a U_B program, run at a fixed step budget."""

    id = "machine"

    def __init__(self, budget: int = DEFAULT_BUDGET):
        self.budget = budget

    def run(self, w, budget=None):
        return run_machine(w, min(budget or self.budget, self.budget))

    def domain_len(self, n):
        return programs_of_length(n)


class NullExecutor(Executor):
    id = "null"

    def run(self, w, budget=DEFAULT_BUDGET):
        return RunOutcome(HALTED, "", 0)

    def domain_len(self, n):
        if n == 0:
            yield ""


class UniversalExecutor(Executor):
    """Strip a registered header and dispatch the rest to that executor."""

    id = "universal"

    def __init__(self, budget: int = DEFAULT_BUDGET):
        self.table = HEADERS
        self.targets: dict[BitString, Executor] = {
            H_MACHINE: MachineExecutor(budget),
            H_REFERENCE: ReferenceExecutor(),
            H_NULL: NullExecutor(),
        }

    def run(self, w, budget=DEFAULT_BUDGET):
        h = self.table.match(w)
        if h is None:
            return RunOutcome(HALTED, "", 0)
        return self.targets[h].run(w[len(h):], budget)

    def domain_len(self, n):
        found = []
        for h, F in self.targets.items():
            if len(h) <= n:
                found.extend(h + v for v in F.domain_len(n - len(h)))
        return iter(sorted(found))


REFERENCE = ReferenceExecutor()
UNIVERSAL = UniversalExecutor()
MACHINE = MachineExecutor()

# Translation constants between the two executors, relative to the reference coding:
#   (i)  burden via E_univ <= K_B(r) + A_HEADER     (prefix the machine header)
#   (ii) K_B(E_univ(w)) <= |w| + B_WRAPPER
# (ii): a reference-branch output of length l costs 3 + gamma(l+1) + l bits
# of advice, while the literal-mode program costs gamma(l+2) + l + 1 and
# gamma(l+2) <= gamma(l+1) + 2. Machine-branch outputs cost at most the
# program itself. Every other branch yields "", whose K_B is 1, and the only
# advice shorter than 1 bit is the empty string -- hence B_WRAPPER = 1.
A_HEADER = len(H_MACHINE) + PAIR_OVERHEAD
B_WRAPPER = 1


def executor_by_name(name: str) -> Executor:
    return {"reference": REFERENCE, "universal": UNIVERSAL, "machine": MACHINE,
            "null": NullExecutor()}[name]


def registry_document() -> dict:
    return {
        "version": REGISTRY_VERSION,
        "machine_version": MACHINE_VERSION,
        "headers": dict(sorted(HEADERS.by_name.items())),
        "reserved": ["00"],
        "kraft_sum": str(HEADERS.kraft_sum),
        "constants": {"c_pair": PAIR_OVERHEAD, "a": A_HEADER, "b": B_WRAPPER},
        "default_step_budget": DEFAULT_BUDGET,
    }


def registry_json() -> str:
    return json.dumps(registry_document(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class Burden:
    """Result of a bounded advice search.

    ``status`` is ``exact`` (least length found), ``infinite`` (nothing valid
    up to ``max_len``) or ``unknown`` (a staged predicate was still undecided
    on some candidate; ``value`` is then only an upper bound, possibly inf).
    """

    value: float
    status: str
    witness: BitString | None = None
    response: BitString | None = None
    max_len: int = 0

    @property
    def finite(self) -> bool:
        return self.value != math.inf


def advice_burden(E: Executor, V, x, max_len: int, stage: int | None = None) -> Burden:
    """Least ``|w| <= max_len`` over E's advice domain with ``V(x, E(w))``."""
    undecided = False
    for n in range(max_len + 1):
        for w in E.domain_len(n):
            r = E(w)
            verdict = V.evaluate(x, r, stage)
            if verdict is True:
                return Burden(n, "unknown" if undecided else "exact", w, r, max_len)
            if verdict is None:
                undecided = True
    return Burden(math.inf, "unknown" if undecided else "infinite", None, None, max_len)


def exhaustive_totality(E: Callable[[BitString], BitString], max_len: int) -> int:
    """Evaluate E on every bit string up to ``max_len``; returns the count."""
    count = 0
    for n in range(max_len + 1):
        for v in range(1 << n):
            r = E(format(v, f"0{n}b") if n else "")
            assert isinstance(r, str)
            count += 1
    return count

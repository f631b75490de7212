"""The bounded reference machine U_B.

A program is ``encode_nat(L + 1) + body`` with ``|body| == L``; the gamma
header makes the program set prefix-free. The first body bit picks a mode:

* ``0`` -- literal mode: the remaining ``L - 1`` bits are the output, one
  step per bit.
* ``1`` -- instruction mode: the remaining bits are 3-bit opcodes, a trailing
  1- or 2-bit fragment is ignored. Falling off the end halts.

Instruction mode runs over a cyclic tape of ``TAPE_WIDTH`` cells (all zero at
start) and may read a read-only auxiliary string (the conditional input).
See docs/machine.md for the bit-exact table.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .bitcode import BitString, decode_nat, encode_nat, gamma_length

MACHINE_VERSION = "UB-1"
TAPE_WIDTH = 16
DEFAULT_BUDGET = 1 << 16

HALT, EMIT0, EMIT1, EMITC, FLIP, RIGHT, EMITX, JZ = range(8)
OPCODES = ("HALT", "EMIT0", "EMIT1", "EMITC", "FLIP", "RIGHT", "EMITX", "JZ")

HALTED = "halted"
TIMEOUT = "timeout"


@dataclass(frozen=True)
class RunOutcome:
    status: str
    output: BitString | None
    steps: int

    @property
    def halted(self) -> bool:
        return self.status == HALTED


def parse_program(p: BitString) -> BitString | None:
    """Return the body of a well-framed program, else ``None``."""
    got = decode_nat(p)
    if got is None:
        return None
    n, pos = got
    if len(p) != pos + n - 1:
        return None
    return p[pos:]


def frame(body: BitString) -> BitString:
    return encode_nat(len(body) + 1) + body


def framed_length(body_len: int) -> int:
    return gamma_length(body_len + 1) + body_len


def body_length_for(total: int) -> int | None:
    """The body length whose framed program has exactly ``total`` bits."""
    L = 0
    while framed_length(L) < total:
        L += 1
    return L if framed_length(L) == total else None


def programs_of_length(n: int) -> Iterator[BitString]:
    """Every well-framed program of exactly ``n`` bits, lexicographically."""
    L = body_length_for(n)
    if L is None:
        return
    head = encode_nat(L + 1)
    if L == 0:
        yield head
        return
    for v in range(1 << L):
        yield head + format(v, f"0{L}b")


def programs(max_len: int) -> Iterator[BitString]:
    """All well-framed programs up to ``max_len`` bits in (length, lex) order."""
    for n in range(max_len + 1):
        yield from programs_of_length(n)


def assemble(*ops: str, literal: BitString | None = None) -> BitString:
    """Build a framed program from opcode names, or a literal-mode program."""
    if literal is not None:
        return frame("0" + literal)
    return frame("1" + "".join(format(OPCODES.index(op), "03b") for op in ops))


@lru_cache(maxsize=1 << 20)
def run_machine(p: BitString, budget: int = DEFAULT_BUDGET, aux: BitString = "") -> RunOutcome:
    if budget < 1:
        raise ValueError("budget must be >= 1")
    body = parse_program(p) if p else ""
    if not body:
        # empty program or not a program at all
        return RunOutcome(HALTED, "", 0)
    if body[0] == "0":
        steps = len(body) - 1
        if steps > budget:
            return RunOutcome(TIMEOUT, None, budget)
        return RunOutcome(HALTED, body[1:], steps)
    return _run_instructions(body[1:], budget, aux)


def _run_instructions(code: BitString, budget: int, aux: BitString) -> RunOutcome:
    ops = [int(code[i:i + 3], 2) for i in range(0, len(code) - 2, 3)]
    n = len(ops)
    width = TAPE_WIDTH
    tape = 0
    head = 0
    pc = 0
    steps = 0
    out: list[str] = []
    seen = {(0, 0)}
    while pc < n:
        op = ops[pc]
        steps += 1
        if steps > budget:
            return RunOutcome(TIMEOUT, None, budget)
        pc += 1
        if op == HALT:
            break
        if op == EMIT0:
            out.append("0")
        elif op == EMIT1:
            out.append("1")
        elif op == EMITC:
            out.append("1" if tape >> head & 1 else "0")
        elif op == FLIP:
            tape ^= 1 << head
        elif op == RIGHT:
            head = (head + 1) % width
        elif op == EMITX:
            out.append(aux[head] if head < len(aux) else "0")
        elif not tape >> head & 1:  # JZ
            # Control never depends on output, so a repeated (head, tape) at
            # pc 0 means the run can never halt, at any budget.
            if (head, tape) in seen:
                return RunOutcome(TIMEOUT, None, budget)
            seen.add((head, tape))
            pc = 0
    return RunOutcome(HALTED, "".join(out), steps)


def disassemble(p: BitString) -> str:
    body = parse_program(p)
    if body is None:
        return "<not a program>"
    if not body:
        return "<empty>"
    if body[0] == "0":
        return f"LIT {body[1:]!r}"
    code = body[1:]
    ops = [OPCODES[int(code[i:i + 3], 2)] for i in range(0, len(code) - 2, 3)]
    return " ".join(ops) if ops else "<no-op>"

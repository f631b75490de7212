"""Bit strings, Elias-gamma integers, prefix-free sets and header pairing.

Bit strings are plain ``str`` objects over ``'0'``/``'1'``, most significant
bit first. They are immutable, hashable and cheap to slice, which is all the
search code needs.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

BitString = str

# pair() is plain concatenation behind a prefix-free header: zero extra bits.
PAIR_OVERHEAD = 0


class InvalidArgument(ValueError):
    pass


class InvalidHeader(ValueError):
    pass


def check_bits(s: str) -> BitString:
    if any(c not in "01" for c in s):
        raise InvalidArgument(f"not a bit string: {s!r}")
    return s


def encode_nat(n: int) -> BitString:
    """Elias-gamma code of ``n >= 1``: ``len-1`` zeros, then ``n`` in binary."""
    if n < 1:
        raise InvalidArgument(f"Elias gamma is undefined for n={n}")
    body = bin(n)[2:]
    return "0" * (len(body) - 1) + body


def gamma_length(n: int) -> int:
    return 2 * (n.bit_length() - 1) + 1


def decode_nat(s: BitString, pos: int = 0) -> tuple[int, int] | None:
    """Read one gamma code starting at ``pos``.

    Returns ``(n, next_pos)`` or ``None`` when the code is truncated.
    """
    zeros = 0
    end = len(s)
    while pos + zeros < end and s[pos + zeros] == "0":
        zeros += 1
    start = pos + zeros
    stop = start + zeros + 1
    if stop > end:
        return None
    return int(s[start:stop], 2), stop


def length_lex(max_len: int, min_len: int = 0) -> Iterator[BitString]:
    """All bit strings with ``min_len <= len <= max_len`` in length-lex order."""
    for n in range(min_len, max_len + 1):
        if n == 0:
            yield ""
            continue
        for v in range(1 << n):
            yield format(v, f"0{n}b")


def length_lex_rank(s: BitString) -> int:
    """0-based position of ``s`` in length-lex order."""
    return int("1" + s, 2) - 1


def length_lex_unrank(k: int) -> BitString:
    return bin(k + 1)[3:]


@dataclass(frozen=True)
class PrefixCodeSet:
    members: frozenset

    def __init__(self, members: Iterable[str] = ()):
        object.__setattr__(self, "members", frozenset(check_bits(m) for m in members))

    @property
    def kraft_sum(self) -> Fraction:
        return sum((Fraction(1, 1 << len(m)) for m in self.members), Fraction(0))


def check_prefix_free(s: PrefixCodeSet | Iterable[str]) -> tuple[bool, Fraction]:
    """Return ``(is_prefix_free, kraft_sum)``; the sum is an exact rational.

    After sorting, any prefix pair implies some *adjacent* prefix pair, so one
    linear pass over the sorted members suffices.
    """
    if not isinstance(s, PrefixCodeSet):
        s = PrefixCodeSet(s)
    ordered = sorted(s.members)
    ok = all(not b.startswith(a) for a, b in zip(ordered, ordered[1:]))
    return ok, s.kraft_sum


class HeaderTable:
    """A registered prefix-free table of executor headers."""

    def __init__(self, headers: dict[str, BitString]):
        ok, kraft = check_prefix_free(headers.values())
        if not ok or len(set(headers.values())) != len(headers):
            raise InvalidArgument("header table is not prefix-free")
        self.by_name = dict(headers)
        self.by_code = {code: name for name, code in headers.items()}
        self.kraft_sum = kraft

    def __contains__(self, header: str) -> bool:
        return header in self.by_code

    def match(self, w: BitString) -> str | None:
        """The unique registered header that prefixes ``w``, if any."""
        for code in self.by_code:
            if w.startswith(code):
                return code
        return None


def pair_header_payload(header: BitString, payload: BitString, table: HeaderTable) -> BitString:
    if header not in table:
        raise InvalidHeader(f"header {header!r} is not registered")
    return header + check_bits(payload)


def unpair(w: BitString, table: HeaderTable) -> tuple[BitString, BitString]:
    h = table.match(w)
    if h is None:
        raise InvalidHeader(f"no registered header prefixes {w!r}")
    return h, w[len(h):]


# Binary form: 4-byte big-endian bit count, then MSB-first packed bytes,
# zero-padded on the right.

def to_bytes(s: BitString) -> bytes:
    check_bits(s)
    n = len(s)
    padded = s + "0" * (-n % 8)
    body = int(padded, 2).to_bytes(len(padded) // 8, "big") if padded else b""
    return struct.pack(">I", n) + body


def from_bytes(data: bytes) -> BitString:
    if len(data) < 4:
        raise InvalidArgument("binary bit string shorter than its length prefix")
    (n,) = struct.unpack(">I", data[:4])
    body = data[4:]
    if len(body) != (n + 7) // 8:
        raise InvalidArgument(f"expected {(n + 7) // 8} payload bytes, got {len(body)}")
    if n == 0:
        return ""
    bits = format(int.from_bytes(body, "big"), f"0{len(body) * 8}b")
    if "1" in bits[n:]:
        raise InvalidArgument("nonzero padding bits")
    return bits[:n]


def to_hex(s: BitString) -> str:
    return to_bytes(s).hex()


class AlphabetCodec:
    """Bijection between strings over ``{0..k-1}`` and bit strings.

    A k-ary string is sent to its length-lex rank (bijective base-k
    numeration) and that rank back out as the binary string of equal rank.
    Symbols are passed as tuples of ints, or as digit strings when k <= 10.
    """

    def __init__(self, sigma_arity: int, gamma_arity: int = 2):
        if sigma_arity < 2 or gamma_arity < 2:
            raise InvalidArgument("alphabets need at least two symbols")
        self.sigma_arity = sigma_arity
        self.gamma_arity = gamma_arity

    @staticmethod
    def _rank(symbols: Iterable[int], k: int) -> int:
        n = 0
        for d in symbols:
            if not 0 <= d < k:
                raise InvalidArgument(f"symbol {d} outside alphabet of size {k}")
            n = n * k + d + 1
        return n

    @staticmethod
    def _unrank(n: int, k: int) -> tuple[int, ...]:
        out = []
        while n > 0:
            n, d = divmod(n - 1, k)
            out.append(d)
        return tuple(reversed(out))

    @staticmethod
    def _symbols(s) -> tuple[int, ...]:
        return tuple(int(c) for c in s) if isinstance(s, str) else tuple(s)

    def encode(self, s) -> BitString:
        return length_lex_unrank(self._rank(self._symbols(s), self.sigma_arity))

    def decode(self, bits: BitString) -> tuple[int, ...]:
        return self._unrank(length_lex_rank(check_bits(bits)), self.sigma_arity)

    def encode_response(self, s) -> BitString:
        return length_lex_unrank(self._rank(self._symbols(s), self.gamma_arity))

    def decode_response(self, bits: BitString) -> tuple[int, ...]:
        return self._unrank(length_lex_rank(check_bits(bits)), self.gamma_arity)

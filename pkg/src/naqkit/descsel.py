"""Feature description + selection: fibers, selection indices and two-part bounds.

A feature system maps (x, r) to an m-bit vector y and accepts through a
circuit on y alone. The selection index of y at x is the first position, in
a fixed enumeration of responses, whose feature vector is y.

Constants below are relative to U_B at ``length_cap = 20``, where every
response of length 1..12 has K_B equal to its literal-mode cost
``gamma(l + 2) + l + 1`` (checked exhaustively in the test suite).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .bitcode import BitString, InvalidArgument, gamma_length, length_lex
from .complexity import Caps, khat_conditional, khat_exact, m_exact
from .validity import ValidityPredicate

INF = math.inf

# M <= K(pi(i)) <= literal cost of a |pi(i)| = floor(log2 i) bit string, and
# K(y) >= 1, so M - (K(y) + ceil(log2 i)) <= gamma(l + 2) <= 7 for l <= 13.
C_DSEL = 7
# prefix-flag fibers: K("1" + r) - K(r) is 1, or 3 when gamma(l + 2) grows.
C_FA = 3
# ceil(log2 i') <= ceil(log2 i) + ceil(log2 D) whenever i' <= D * i.
C_EN = 0


def c_cond(m: int) -> int:
    """Constant for the conditional lower bound on U_B.

    U_B cannot evaluate a feature map, so the only machine-independent route
    from r to y is to print y outright: K(y|x) <= gamma(m + 2) + m + 1 while
    any fiber member costs >= 1 bit.
    """
    return gamma_length(m + 2) + m


def ceil_log2(i) -> int:
    """Exact ceil(log2 i) for a positive int or Fraction."""
    i = Fraction(i)
    if i <= 0:
        raise InvalidArgument("log of a non-positive number")
    k = 0
    while Fraction(2) ** k < i:
        k += 1
    while Fraction(2) ** (k - 1) >= i:
        k -= 1
    return k


def _parity(s: str) -> str:
    return str(s.count("1") % 2)


@dataclass(frozen=True)
class FeatureSystem:
    id: str
    m: int
    phi: Callable[[BitString, BitString], BitString]
    circuit: Callable[[BitString], bool]
    prototypes: Callable[[BitString], Sequence[BitString]] | None = None

    def __post_init__(self):
        if not 1 <= self.m <= 12:
            raise InvalidArgument("feature vectors are limited to 1..12 bits")

    def feasible_vectors(self) -> list[BitString]:
        return [y for y in length_lex(self.m, self.m) if self.circuit(y)]

    @property
    def predicate(self) -> ValidityPredicate:
        return ValidityPredicate(self.id, lambda x, r: self.circuit(self.phi(x, r)))


def _pad(m):
    return "0" * m


def parity_system(odd: bool = True) -> FeatureSystem:
    want = "1" if odd else "0"
    return FeatureSystem(f"parity({want})", 1, lambda x, r: _parity(r), lambda y: y == want)


def prefix_flag_system(k: int) -> FeatureSystem:
    """y = [r starts with x] + r for |r| == k; singleton fibers."""
    def phi(x, r):
        if len(r) != k:
            return _pad(k + 1)
        return ("1" if r.startswith(x) else "0") + r
    return FeatureSystem(f"prefix-flag({k})", k + 1, phi, lambda y: y[0] == "1",
                         prototypes=lambda y: [y[1:]])


def prefix_pair_system(k: int) -> FeatureSystem:
    """y = [r starts with x] + r[:-1] for |r| == k; two-element fibers."""
    def phi(x, r):
        if len(r) != k:
            return _pad(k)
        return ("1" if r.startswith(x) else "0") + r[:-1]
    return FeatureSystem(f"prefix-pair({k})", k, phi, lambda y: y[0] == "1",
                         prototypes=lambda y: [y[1:] + "0", y[1:] + "1"])


def match_system() -> FeatureSystem:
    """y = [|r| == |x|] + [parity r == parity x] + [r ends like x]."""
    def phi(x, r):
        return ("1" if len(r) == len(x) else "0") + \
               ("1" if _parity(r) == _parity(x) else "0") + \
               ("1" if x and r.endswith(x[-1]) else "0")
    return FeatureSystem("match", 3, phi, lambda y: y[:2] == "11")


def first_bit_system() -> FeatureSystem:
    """y = x[0] + [r ends with x[0]]: the description part is read off x."""
    def phi(x, r):
        b = x[:1] or "0"
        return b + ("1" if r.endswith(b) else "0")
    return FeatureSystem("first-bit", 2, phi, lambda y: y[1] == "1")


def planted_system(length: int = 16) -> FeatureSystem:
    """Feasible iff |r| == length and r has exactly two 1s or is all ones.

    The all-ones string is a compressed realizer planted at the very end of
    its length block.
    """
    def phi(x, r):
        return "1" if len(r) == length and r.count("1") in (2, length) else "0"
    return FeatureSystem(f"planted({length})", 1, phi, lambda y: y == "1")


FEATURE_SYSTEMS = {
    "parity": parity_system,
    "prefix-flag": prefix_flag_system,
    "prefix-pair": prefix_pair_system,
    "match": match_system,
    "first-bit": first_bit_system,
    "planted": planted_system,
}


def feature_system(name: str, **params) -> FeatureSystem:
    try:
        return FEATURE_SYSTEMS[name](**params)
    except KeyError:
        raise InvalidArgument(f"unknown feature system {name!r}") from None


# --- enumerations ---------------------------------------------------------------

@dataclass(frozen=True)
class RealizerEnumeration:
    """A bijection from indices >= 1 onto responses, with its inverse."""

    id: str
    pi: Callable[[int], BitString]
    index: Callable[[BitString], int]


def _ll(i: int) -> BitString:
    if i < 1:
        raise InvalidArgument("enumeration indices start at 1")
    return bin(i)[3:]


def _ll_index(r: BitString) -> int:
    return int("1" + r, 2)


def _swap(i: int) -> int:
    return i if i == 1 else i ^ 1


def _flip(r: str) -> str:
    return r.translate(str.maketrans("01", "10"))


LENGTH_LEX = RealizerEnumeration("length-lex", _ll, _ll_index)
# swap positions 2t and 2t+1 inside each length block
ADJACENT_SWAP = RealizerEnumeration("adjacent-swap", lambda i: _ll(_swap(i)),
                                    lambda r: _swap(_ll_index(r)))
# reverse each length block; position q -> 2^l - 1 - q is bitwise complement
BLOCK_REVERSE = RealizerEnumeration("block-reverse", lambda i: _flip(_ll(i)),
                                    lambda r: _ll_index(_flip(r)))

ENUMERATIONS = {e.id: e for e in (LENGTH_LEX, ADJACENT_SWAP, BLOCK_REVERSE)}


def check_bijective(en: RealizerEnumeration, n: int = 1 << 16) -> bool:
    seen = set()
    for i in range(1, n + 1):
        r = en.pi(i)
        if en.index(r) != i or r in seen:
            return False
        seen.add(r)
    return True


# --- operations -------------------------------------------------------------

def selection_index(x, y: BitString, fs: FeatureSystem, en: RealizerEnumeration = LENGTH_LEX,
                    cap: int = 1 << 14) -> float:
    for i in range(1, cap + 1):
        if fs.phi(x, en.pi(i)) == y:
            return i
    return INF


def feasible_at(x, fs: FeatureSystem, en: RealizerEnumeration = LENGTH_LEX,
                cap: int = 1 << 14) -> dict[BitString, int]:
    """Feasible vectors realised at x within ``cap`` indices -> their index."""
    found: dict[BitString, int] = {}
    for i in range(1, cap + 1):
        y = fs.phi(x, en.pi(i))
        if y not in found and fs.circuit(y):
            found[y] = i
    return found


def _caps(caps) -> Caps:
    return caps if isinstance(caps, Caps) else Caps(*caps) if caps else Caps(20)


@dataclass
class TwoPartResult:
    bound: float
    argmin_y: BitString | None
    table: list
    m: float
    holds: bool


def two_part_bound(x, fs: FeatureSystem, en: RealizerEnumeration = LENGTH_LEX, caps=None,
                   index_cap: int = 1 << 14) -> TwoPartResult:
    """min over feasible y of K_B(y) + ceil(log2 i_y(x)), audited against m_exact."""
    caps = _caps(caps)
    table = []
    best, arg = INF, None
    for y in fs.feasible_vectors():
        i = selection_index(x, y, fs, en, index_cap)
        k = khat_exact(y, caps.length_cap, caps.step_budget).value
        row = {"y": y, "index": i, "k_y": k}
        if i == INF or k == INF:
            row["excluded"] = "index beyond cap" if i == INF else "K(y) beyond caps"
        else:
            row["bound"] = k + ceil_log2(i)
            if row["bound"] < best:
                best, arg = row["bound"], y
        table.append(row)
    m = m_exact(x, fs.predicate, caps).value
    holds = best != INF and m != INF and m <= best + C_DSEL
    return TwoPartResult(best, arg, table, m, holds)


def conditional_lb_audit(x, y: BitString, fs: FeatureSystem, caps=None,
                         index_cap: int = 1 << 12) -> dict:
    """Fiber minimum of K_B(r) against K_B(y | x)."""
    caps = _caps(caps)
    cond = khat_conditional(y, x, caps.length_cap, caps.step_budget).value
    fiber_min = INF
    witness = None
    for i in range(1, index_cap + 1):
        r = LENGTH_LEX.pi(i)
        if fs.phi(x, r) == y:
            k = khat_exact(r, caps.length_cap, caps.step_budget).value
            if k < fiber_min:
                fiber_min, witness = k, r
    complete = fiber_min != INF and cond != INF
    c = c_cond(fs.m)
    return {"x": x, "y": y, "k_y_given_x": cond, "fiber_min": fiber_min, "witness": witness,
            "slack": fiber_min - cond if complete else None, "c_cond": c,
            "complete": complete,
            "passed": complete and fiber_min >= cond - c}


def finite_ambiguity_check(xs: Iterable, fs: FeatureSystem, caps=None,
                           index_cap: int = 1 << 14, prototypes=None) -> dict:
    """Prototype coverage plus the collapse |M - min_y K(y)| <= C_FA."""
    caps = _caps(caps)
    protos = prototypes or fs.prototypes
    if protos is None:
        raise InvalidArgument(f"{fs.id} declares no prototype sets")
    rows, coverage_errors, excluded = [], [], []
    for x in xs:
        feas = feasible_at(x, fs, LENGTH_LEX, index_cap)
        if not feas:
            excluded.append(x)
            continue
        for y in feas:
            if not any(fs.phi(x, r) == y for r in protos(y)):
                coverage_errors.append({"x": x, "y": y})
        m = m_exact(x, fs.predicate, caps).value
        ky = min(khat_exact(y, caps.length_cap, caps.step_budget).value for y in feas)
        rows.append({"x": x, "m": m, "min_k_y": ky, "diff": abs(m - ky)})
    observed = max((r["diff"] for r in rows), default=0)
    return {"system": fs.id, "rows": rows, "excluded": excluded,
            "coverage_errors": coverage_errors, "fixture_valid": not coverage_errors,
            "observed_c_fa": observed, "c_fa": C_FA,
            "passed": not coverage_errors and bool(rows) and observed <= C_FA}


def fiber_genericity_audit(x, fs: FeatureSystem, en: RealizerEnumeration = LENGTH_LEX, caps=None,
                           c: int = 1, alpha: float = 1.0, index_cap: int = 1 << 17) -> dict:
    """Count compressed outliers in every feasible fiber at x.

    The allowance ``i ** -alpha`` is a count, so it is read literally as
    ``floor(i ** -alpha)``: one outlier when i == 1, none otherwise.
    """
    caps = _caps(caps)
    feas = feasible_at(x, fs, en, index_cap)
    pairs = []
    for y, i in sorted(feas.items()):
        ky = khat_exact(y, caps.length_cap, caps.step_budget).value
        threshold = ky + ceil_log2(i) - c
        count = 0
        outliers = []
        for j in range(i, index_cap + 1):
            r = en.pi(j)
            if fs.phi(x, r) != y:
                continue
            k = khat_exact(r, caps.length_cap, caps.step_budget).value
            if k <= threshold:
                count += 1
                outliers.append(r)
        allowed = math.floor(i ** -alpha)
        pairs.append({"y": y, "index": i, "k_y": ky, "threshold": threshold, "count": count,
                      "allowed": allowed, "generic": count <= allowed,
                      "outliers": outliers[:8],
                      "complete": threshold <= caps.length_cap})
    all_generic = bool(pairs) and all(p["generic"] for p in pairs)
    report = {"x": x, "system": fs.id, "enumeration": en.id, "c": c, "alpha": alpha,
              "reading": "count <= floor(i^-alpha)", "pairs": pairs, "all_generic": all_generic}
    if all_generic:
        bound = min(p["k_y"] + ceil_log2(p["index"]) for p in pairs)
        m = m_exact(x, fs.predicate, caps).value
        c_tight = max(c, C_DSEL)
        report["tightness"] = {"m": m, "bound": bound, "gap": m - bound, "c_tight": c_tight,
                               "holds": abs(m - bound) <= c_tight}
    return report


def enumeration_distortion(en: RealizerEnumeration, en2: RealizerEnumeration, fs: FeatureSystem,
                           pairs: Sequence[tuple], caps=None, cap: int = 1 << 14) -> dict:
    """Largest index ratio D between two enumerations, and the induced shift
    of min_y [K(y) + ceil(log2 i)] per instance."""
    caps = _caps(caps)
    D = Fraction(1)
    per_x: dict = {}
    excluded = []
    for x, y in pairs:
        i = selection_index(x, y, fs, en, cap)
        j = selection_index(x, y, fs, en2, cap)
        if i == INF or j == INF:
            excluded.append((x, y))
            continue
        D = max(D, Fraction(j, i), Fraction(i, j))
        k = khat_exact(y, caps.length_cap, caps.step_budget).value
        if k == INF:
            excluded.append((x, y))
            continue
        a, b = per_x.get(x, (INF, INF))
        per_x[x] = (min(a, k + ceil_log2(i)), min(b, k + ceil_log2(j)))
    allowed = ceil_log2(D) + C_EN
    rows = [{"x": x, "min_pi": a, "min_pi2": b, "diff": abs(a - b)} for x, (a, b) in per_x.items()]
    return {"D": D, "ceil_log2_D": ceil_log2(D), "c_en": C_EN, "rows": rows, "excluded": excluded,
            "passed": all(r["diff"] <= allowed for r in rows)}

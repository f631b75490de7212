"""Audit suites and report serialization.

Every report carries a manifest (command, parameters, caps, seeds and all
version strings) plus a snapshot of the exported constants. Reports hold no
timestamps or timings and are dumped with sorted keys, so rerunning a
manifest reproduces the same bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Callable

import numpy as np

from . import __version__
from .bitcode import InvalidArgument
from .bounds import (
    C_ID,
    C_VP,
    fano_lower_bound,
    gc_required,
    gc_sweep,
    identity_family_bound,
    overlapping_panel,
    separated_panel,
    variant_panel_bound,
)
from .complexity import CI_CAP, Caps, cutoff, keep, levin_value, realizer_identity_audit
from .descsel import (
    C_DSEL,
    C_EN,
    C_FA,
    feature_system,
    finite_ambiguity_check,
    two_part_bound,
)
from .executor import A_HEADER, B_WRAPPER, REFERENCE, REGISTRY_VERSION, UNIVERSAL, UniversalExecutor
from .machine import DEFAULT_BUDGET, MACHINE_VERSION
from .naq import Pool, dkw_monte_carlo, empirical_cdf, naq_midrank, pool_stability_check
from .oracles import all_strings, cdf_direct, levin_brute, naq_direct, survives
from .validity import predicate

SCHEMA_VERSION = "report-1"


@dataclass
class RunManifest:
    command: str
    parameters: dict = field(default_factory=dict)
    caps: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    artifact_version: str = __version__
    machine_version: str = MACHINE_VERSION
    registry_version: str = REGISTRY_VERSION
    schema_version: str = SCHEMA_VERSION


def constants_snapshot() -> dict:
    return {"a": A_HEADER, "b": B_WRAPPER, "c_dsel": C_DSEL, "c_fa": C_FA, "c_en": C_EN,
            "c_id": C_ID, "c_vp": C_VP, "c_cond": "gamma_length(m + 2) + m",
            "default_step_budget": DEFAULT_BUDGET}


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [jsonable(v) for v in obj]
        return sorted(items, key=repr) if isinstance(obj, (set, frozenset)) else items
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if hasattr(obj, "as_dict"):
        return jsonable(obj.as_dict())
    return obj


def render_report(manifest: RunManifest, body: dict) -> str:
    doc = {"manifest": asdict(manifest), "constants": constants_snapshot(), **body}
    return json.dumps(jsonable(doc), indent=2, sort_keys=True) + "\n"


def load_fixture(name: str) -> list[dict]:
    text = resources.files("naqkit.fixtures").joinpath(name).read_text()
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def corpus_instances(records: list[dict]) -> list[tuple]:
    out = []
    for rec in records:
        p = rec["predicate"]
        out.append((rec["id"], rec["x"], predicate(p["name"], **p.get("params", {}))))
    return out


def _rng(seed: int, suite: str) -> np.random.Generator:
    salt = sum(ord(ch) << (8 * (i % 4)) for i, ch in enumerate(suite))
    return np.random.default_rng(np.random.SeedSequence([seed, salt]))


# --- suites ---------------------------------------------------------------------

def suite_realizer(seed: int) -> dict:
    report = realizer_identity_audit(corpus_instances(load_fixture("realizer20.jsonl")), Caps(CI_CAP))
    return {"passed": report.passed, **report.as_dict()}


LEVIN_FIXTURES = [("equals-x", "101", {}), ("prefix-x", "11", {}), ("always", "", {}),
                  ("min-length", "", {"n": 3}), ("ends-in-1", "", {}),
                  ("equals", "", {"target": "0110"}), ("contains-x", "00", {})]


def suite_levin(seed: int, max_advice: int = 12, Bs=range(8, 15)) -> dict:
    """Keep/discard biconditional on every advice string, then value equality."""
    E = UniversalExecutor()
    exceptions = []
    checked = 0
    for w in all_strings(max_advice):
        out = E.run(w, DEFAULT_BUDGET)
        tau = out.steps if out.halted else math.inf
        for B in Bs:
            if len(w) > B:
                continue
            kept = out.halted and keep(B, len(w), tau)
            checked += 1
            if kept != survives(B, len(w), tau):
                exceptions.append({"w": w, "B": B, "steps": tau, "cutoff": cutoff(B, len(w))})
    rows = []
    for name, x, params in LEVIN_FIXTURES:
        V = predicate(name, **params)
        for B in Bs:
            got = levin_value(x, E, V, B)
            want = levin_brute(x, E, V, B)
            rows.append({"predicate": V.id, "x": x, "B": B, "levin": got.value, "oracle": want,
                         "witness": got.witness, "equal": got.value == want})
    unequal = [r for r in rows if not r["equal"]]
    return {"passed": not exceptions and not unequal, "keep_checks": checked,
            "keep_exceptions": exceptions, "value_rows": rows, "value_mismatches": len(unequal)}


def suite_naq(seed: int, pools: int = 100) -> dict:
    hand = Pool.of([3, 5, 5, 8])
    expected = {3: Fraction(1, 8), 5: Fraction(1, 2), 8: Fraction(7, 8), 9: Fraction(1),
                2: Fraction(0)}
    hand_rows = [{"m": m, "naq": naq_midrank(m, hand), "expected": q, "ok": naq_midrank(m, hand) == q}
                 for m, q in sorted(expected.items())]
    hand_ok = all(r["ok"] for r in hand_rows) and empirical_cdf(hand, 5) == Fraction(3, 4)
    rng = _rng(seed, "naq")
    mismatches = 0
    queries = 0
    for _ in range(pools):
        size = int(rng.integers(1, 40))
        values = [int(v) for v in rng.integers(0, 20, size)]
        pool = Pool.of(values)
        for m in range(-1, 22):
            queries += 1
            if naq_midrank(m, pool) != naq_direct(m, values) or \
                    empirical_cdf(pool, m) != cdf_direct(values, m):
                mismatches += 1
    return {"passed": hand_ok and mismatches == 0, "hand": hand_rows, "random_pools": pools,
            "queries": queries, "mismatches": mismatches}


def suite_pool(seed: int, trials: int = 1000) -> dict:
    rng = _rng(seed, "pool")
    violations = 0
    worst = None
    for _ in range(trials):
        big = [int(v) for v in rng.integers(0, 16, int(rng.integers(1, 30)))]
        keep_mask = rng.random(len(big)) < rng.random()
        if not keep_mask.any():
            keep_mask[int(rng.integers(0, len(big)))] = True
        small = [v for v, k in zip(big, keep_mask) if k]
        grid = [Fraction(z, 2) for z in range(-2, 34)]
        rep = pool_stability_check(Pool.of(small), Pool.of(big), grid)
        violations += len(rep["violations"])
        if worst is None or rep["worst_slack"] < worst:
            worst = rep["worst_slack"]
    return {"passed": violations == 0, "trials": trials, "violations": violations,
            "worst_slack": worst}


DKW_PROBS = [0.05, 0.1, 0.2, 0.15, 0.1, 0.25, 0.1, 0.05]


def suite_dkw(seed: int) -> dict:
    return dkw_monte_carlo(DKW_PROBS, 1000, 2000, 0.05, int(_rng(seed, "dkw").integers(1 << 32)))


DESCSEL_FIXTURES = [
    ("parity", {}, ["", "0", "101"]),
    ("match", {}, ["0110", "1", "111"]),
    ("first-bit", {}, ["0", "1", "10"]),
    ("prefix-flag", {"k": 4}, ["1", "01", "110"]),
    ("prefix-pair", {"k": 4}, ["1", "01", "110"]),
    ("planted", {"length": 16}, [""]),
]
AMBIGUITY_FIXTURES = [("prefix-flag", {"k": 4}, ["1", "01", "110", "0000"]),
                      ("prefix-pair", {"k": 4}, ["1", "01", "110", "000"])]


def suite_descsel(seed: int) -> dict:
    caps = Caps(CI_CAP)
    rows = []
    for name, params, xs in DESCSEL_FIXTURES:
        fs = feature_system(name, **params)
        for x in xs:
            res = two_part_bound(x, fs, caps=caps, index_cap=1 << 17)
            rows.append({"system": fs.id, "x": x, "m": res.m, "bound": res.bound,
                         "argmin_y": res.argmin_y, "holds": res.holds})
    ambiguity = [finite_ambiguity_check(xs, feature_system(name, **params), caps)
                 for name, params, xs in AMBIGUITY_FIXTURES]
    ok = all(r["holds"] for r in rows) and all(a["passed"] for a in ambiguity)
    return {"passed": ok, "c_dsel": C_DSEL, "two_part": rows,
            "finite_ambiguity": [{k: a[k] for k in ("system", "observed_c_fa", "c_fa",
                                                   "fixture_valid", "passed", "rows")}
                                 for a in ambiguity]}


def suite_pigeonhole(seed: int) -> dict:
    rows = []
    for n in (2, 4, 8):
        for E, slack in ((REFERENCE, 10), (UNIVERSAL, 12)):
            rep = identity_family_bound(n, E, n + slack)
            rows.append({k: rep[k] for k in ("n", "executor", "sup_burden", "argmax", "holds",
                                              "unresolved", "witnesses_distinct", "certificate",
                                              "certificate_valid", "below_n_minus_c",
                                              "top_quantile")})
    ok = all(r["holds"] and r["certificate_valid"] and r["witnesses_distinct"] and not r["unresolved"]
             for r in rows)
    return {"passed": ok, "c_id": C_ID, "rows": rows}


def suite_panel(seed: int) -> dict:
    caps = Caps(CI_CAP)
    rows = [variant_panel_bound(separated_panel(k, caps), caps) for k in (1, 2, 4, 8)]
    bad = variant_panel_bound(overlapping_panel(4), caps)
    ok = all(r["passed"] for r in rows) and bad["status"] == "precondition-violated"
    return {"passed": ok, "c_vp": C_VP, "panels": rows, "overlapping": bad}


GC_CASES = [(p, n) for p in (0.5, 0.1, 0.01) for n in (1, 10, 100)]


def suite_gc(seed: int, trials: int = 10_000) -> dict:
    sims = gc_sweep(GC_CASES, trials, int(_rng(seed, "gc").integers(1 << 32)))
    req = gc_required(0.01, 0.05)
    return {"passed": all(s["within_3sigma"] for s in sims) and req == 300,
            "simulations": sims, "gc_required_0.01_0.05": req}


def suite_fano(seed: int) -> dict:
    a = fano_lower_bound(3, 0, 8, 1)
    b = fano_lower_bound(3, 0.1, 8, 1)
    c = fano_lower_bound(0, 0.1, 8, 1)
    ok = a == 2.0 and abs(b - 1.2503) <= 1e-3 and c == 0.0
    return {"passed": ok, "H3_eps0": a, "H3_eps0.1": b, "H0": c}


SUITES: dict[str, Callable[[int], dict]] = {
    "realizer": suite_realizer,
    "levin": suite_levin,
    "naq": suite_naq,
    "pool": suite_pool,
    "dkw": suite_dkw,
    "descsel": suite_descsel,
    "pigeonhole": suite_pigeonhole,
    "panel": suite_panel,
    "gc": suite_gc,
    "fano": suite_fano,
}


def run_suites(name: str, seed: int = 0) -> dict:
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise InvalidArgument(f"unknown suite {name!r}")
    results = {n: SUITES[n](seed) for n in names}
    summary = {n: "PASS" if r["passed"] else "FAIL" for n, r in results.items()}
    return {"summary": summary, "passed": all(r["passed"] for r in results.values()),
            "suites": results}


def verify_report(name: str, seed: int = 0) -> tuple[bool, str]:
    manifest = RunManifest(f"verify {name}", {"suite": name}, {"length_cap": CI_CAP,
                           "step_budget": DEFAULT_BUDGET}, {"seed": seed})
    body = run_suites(name, seed)
    return body["passed"], render_report(manifest, body)

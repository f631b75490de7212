"""Command-line front end.

Exit codes: 0 success / all checks pass, 1 some check failed, 2 usage
error, 3 data error (unreadable or malformed input).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

from .bitcode import AlphabetCodec, InvalidArgument, check_bits, from_bytes, length_lex, to_hex
from .bounds import (
    SelectionModel,
    fano_lower_bound,
    gc_required,
    gc_simulate,
    identity_family_bound,
    overlapping_panel,
    separated_panel,
    variant_panel_bound,
)
from .complexity import (
    DEFAULT_CAP,
    Caps,
    khat_compressor,
    khat_exact,
    levin_value,
    m_compressor,
    m_exact,
)
from .compress import CompressorError
from .executor import UniversalExecutor, executor_by_name, registry_json
from .machine import DEFAULT_BUDGET
from .naq import (
    INF,
    Pool,
    dkw_band,
    dkw_epsilon,
    naq_midrank,
    pool_stability_check,
    rank_pool,
    read_pool,
)
from .validity import predicate
from .verify import SUITES, RunManifest, jsonable, render_report, verify_report

log = logging.getLogger("naqkit")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3


class DataError(Exception):
    pass


# --- corpus ingestion -------------------------------------------------------------

def decode_instance(rec: dict) -> str:
    """Instance bits from ``x`` (bits), ``x_hex`` (binary form) or
    ``x_symbols`` + ``alphabet`` (AlphabetCodec)."""
    if "x" in rec:
        return check_bits(rec["x"])
    if "x_hex" in rec:
        return from_bytes(bytes.fromhex(rec["x_hex"]))
    if "x_symbols" in rec:
        return AlphabetCodec(int(rec.get("alphabet", 2))).encode(rec["x_symbols"])
    raise InvalidArgument("record has no x, x_hex or x_symbols")


def read_corpus(path: str) -> list[dict]:
    records, seen = [], set()
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise DataError(f"{path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            ident = str(rec["id"])
            rec["x"] = decode_instance(rec)
        except (ValueError, KeyError, TypeError) as exc:
            raise DataError(f"{path}:{lineno}: bad corpus record ({exc})") from exc
        if ident in seen:
            raise DataError(f"{path}:{lineno}: duplicate id {ident!r}")
        seen.add(ident)
        records.append(rec)
    return records


def _params(items) -> dict:
    out = {}
    for item in items or []:
        key, _, val = item.partition("=")
        out[key] = int(val) if val.lstrip("-").isdigit() else val
    return out


def _predicate_for(rec: dict, args):
    ref = rec.get("predicate")
    if isinstance(ref, dict):
        return predicate(ref["name"], **ref.get("params", {}))
    if isinstance(ref, str):
        return predicate(ref)
    if args.predicate is None:
        raise InvalidArgument(f"record {rec['id']!r} names no predicate and --predicate is unset")
    return predicate(args.predicate, **_params(args.param))


def _caps(args) -> Caps:
    return Caps(args.caps_len, args.caps_steps)


def _method(args) -> tuple[str, str | None]:
    m = args.method
    if m in ("exact", "levin"):
        return m, None
    if m.startswith("compressor:"):
        return "compressor", m.split(":", 1)[1]
    raise InvalidArgument(f"unknown method {m!r}")


def estimate(rec: dict, V, args) -> dict:
    method, comp = _method(args)
    caps = _caps(args)
    x = rec["x"]
    if method == "exact":
        est = m_exact(x, V, caps)
        status = {"exact": "exact", "infinite": "cap-exhausted"}.get(est.status, est.status)
        return {"m": est.value, "method": "exact_bounded", "caps": caps.as_dict(),
                "status": status, "witness": est.witness}
    if method == "levin":
        res = levin_value(x, UniversalExecutor(caps.step_budget), V, args.budget_B)
        return {"m": res.value, "method": "levin", "caps": {"B": args.budget_B},
                "status": "exact" if res.best else "cap-exhausted", "witness": res.witness}
    cands = list(length_lex(args.candidate_len)) + list(rec.get("candidates", []))
    est = m_compressor(x, V, cands, comp)
    return {"m": est.value, "method": f"compressor:{comp}",
            "caps": {"candidate_len": args.candidate_len},
            "status": "exact" if est.finite else "cap-exhausted", "witness": None}


# --- output -----------------------------------------------------------------------

def emit(text: str, args):
    out = getattr(args, "output", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def to_csv(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(jsonable(row))
    return buf.getvalue()


def _manifest(args, command: str, **params) -> RunManifest:
    caps = {}
    if hasattr(args, "caps_len"):
        caps = {"length_cap": args.caps_len, "step_budget": args.caps_steps}
    seeds = {"seed": args.seed} if getattr(args, "seed", None) is not None else {}
    return RunManifest(command, params, caps, seeds)


def report(args, command: str, body: dict, params: dict, csv_rows=None, csv_fields=None):
    if args.format == "csv" and csv_rows is not None:
        emit(to_csv(csv_rows, csv_fields), args)
    else:
        emit(render_report(_manifest(args, command, **params), body), args)


# --- commands -----------------------------------------------------------------------

def cmd_profile(args) -> int:
    records = read_corpus(args.corpus)
    if not records:
        log.warning("empty corpus: writing an empty pool")
    lines, rows = [], []
    for rec in records:
        V = _predicate_for(rec, args)
        est = estimate(rec, V, args)
        entry = {"id": rec["id"], "m": None if est["m"] == INF else est["m"],
                 "method": est["method"], "caps": est["caps"], "status": est["status"]}
        lines.append(json.dumps(jsonable(entry), sort_keys=True))
        rows.append({**entry, "predicate": V.id, "witness": est["witness"]})
    if args.format == "csv":
        emit(to_csv(rows, ["id", "predicate", "m", "method", "status", "witness"]), args)
    else:
        emit("".join(line + "\n" for line in lines), args)
    exhausted = sum(1 for r in rows if r["status"] != "exact")
    if exhausted:
        log.warning("%d instance(s) not resolved within the caps (kept, status marked)", exhausted)
    return EXIT_OK


def _load_pool(path: str) -> Pool:
    try:
        with open(path) as fh:
            return read_pool(fh)
    except OSError as exc:
        raise DataError(f"{path}: {exc}") from exc


def cmd_rank(args) -> int:
    pool = _load_pool(args.pool)
    rep = rank_pool(pool, args.bucket, args.confidence)
    body = {"ranking": rep.as_dict()}
    if args.id is not None or args.m is not None:
        if args.id is not None:
            try:
                m = pool.by_id(args.id).m
            except KeyError:
                raise InvalidArgument(f"unknown id {args.id!r}") from None
        else:
            m = INF if args.m in ("inf", "Infinity") else float(args.m)
            m = int(m) if m != INF and m == int(m) else m
        if m == INF:
            raise InvalidArgument("infinite M: the instance lies outside the validity domain "
                                  "and has no quantile")
        body["query"] = {"id": args.id, "m": m, "naq": naq_midrank(m, pool),
                         "bucket": math.floor(m) // args.bucket}
    report(args, "rank", body, {"pool": Path(args.pool).name, "id": args.id, "m": args.m,
                                "bucket": args.bucket, "confidence": args.confidence},
           rep.rows, ["id", "m", "naq", "bucket"])
    return EXIT_OK


def cmd_verify(args) -> int:
    ok, text = verify_report(args.suite, args.seed)
    if args.format == "csv":
        body = json.loads(text)
        text = to_csv([{"suite": k, "result": v} for k, v in sorted(body["summary"].items())],
                      ["suite", "result"])
    emit(text, args)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_band(args) -> int:
    if args.epsilon is not None:
        body = {"n": args.n, "epsilon": args.epsilon, "bound": dkw_band(args.n, args.epsilon)}
    else:
        body = {"n": args.n, "confidence": args.confidence,
                "epsilon": dkw_epsilon(args.n, 1 - args.confidence)}
    report(args, "naq band", body, {"n": args.n, "epsilon": args.epsilon,
                                     "confidence": args.confidence}, [body], list(body))
    return EXIT_OK


def cmd_stability(args) -> int:
    T, T2 = _load_pool(args.pool), _load_pool(args.superpool)
    grid = sorted(set(T2.values) | {v - 1 for v in T2.values})
    rep = pool_stability_check(T, T2, grid)
    report(args, "naq stability", rep, {"pool": Path(args.pool).name,
                                        "superpool": Path(args.superpool).name})
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def cmd_fano(args) -> int:
    v = fano_lower_bound(args.H, args.epsilon, args.support, args.slack)
    body = {"H": args.H, "epsilon": args.epsilon, "support": args.support,
            "kraft_slack": args.slack, "bound": v}
    report(args, "bounds fano", body, {k: body[k] for k in ("H", "epsilon", "support", "kraft_slack")},
           [body], list(body))
    return EXIT_OK


def cmd_identity(args) -> int:
    E = executor_by_name(args.executor)
    max_len = args.max_len if args.max_len is not None else args.n + 12
    rep = identity_family_bound(args.n, E, max_len)
    report(args, "bounds identity", rep, {"n": args.n, "executor": args.executor,
                                          "max_len": max_len},
           rep["rows"], ["s", "x", "burden", "witness"])
    return EXIT_OK if rep["holds"] and rep["certificate_valid"] else EXIT_FAIL


def cmd_panel(args) -> int:
    caps = _caps(args)
    panel = overlapping_panel(args.size) if args.overlapping else separated_panel(args.size, caps)
    rep = variant_panel_bound(panel, caps)
    report(args, "bounds panel", rep, {"size": args.size, "overlapping": args.overlapping},
           rep.get("rows", []), ["x", "m", "witness", "status"])
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def cmd_gc(args) -> int:
    body = {"required": gc_required(args.p, args.eps)}
    if args.n is not None:
        body["simulation"] = gc_simulate(SelectionModel(args.p, args.n, args.eps), args.trials,
                                         args.seed, args.workers)
    ok = body.get("simulation", {}).get("within_3sigma", True)
    report(args, "bounds gc", body, {"p": args.p, "n": args.n, "eps": args.eps,
                                     "trials": args.trials})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_khat(args) -> int:
    method, comp = _method(args)
    caps = _caps(args)
    inputs = []
    if args.corpus:
        inputs = [(r["id"], r["x"]) for r in read_corpus(args.corpus)]
    for i, bits in enumerate(args.bits or []):
        inputs.append((f"arg{i + 1}", check_bits(bits)))
    rows = []
    for ident, r in inputs:
        if method == "compressor":
            est = khat_compressor(r, comp)
            cap_text = est.compressor_id
        elif method == "exact":
            est = khat_exact(r, caps.length_cap, caps.step_budget)
            cap_text = f"len<={caps.length_cap};steps<={caps.step_budget}"
        else:
            raise InvalidArgument("khat supports --method exact or compressor:<id>")
        rows.append({"input-id": ident, "method": est.method, "caps": cap_text,
                     "value": "inf" if est.value == INF else est.value,
                     "witness-hex": to_hex(est.witness) if est.witness is not None else ""})
    report(args, "khat", {"rows": rows}, {"method": args.method},
           rows, ["input-id", "method", "caps", "value", "witness-hex"])
    return EXIT_OK


def cmd_registry(args) -> int:
    emit(registry_json() + "\n", args)
    return EXIT_OK


# --- parser -------------------------------------------------------------------------

def _common(p, caps=False, seed=False):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output", help="write here instead of stdout")
    if caps:
        p.add_argument("--caps-len", type=int, default=DEFAULT_CAP)
        p.add_argument("--caps-steps", type=int, default=DEFAULT_BUDGET)
    if seed:
        p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="naqkit", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="estimate M for every corpus instance; writes a JSONL pool")
    p.add_argument("corpus")
    p.add_argument("--predicate", help="predicate for records that name none")
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--method", default="exact", help="exact | levin | compressor:<id>")
    p.add_argument("--budget-B", type=int, default=16)
    p.add_argument("--candidate-len", type=int, default=10,
                   help="compressor method: candidate responses up to this length")
    _common(p, caps=True)
    p.set_defaults(func=cmd_profile)

    def rank_args(p):
        p.add_argument("pool")
        q = p.add_mutually_exclusive_group()
        q.add_argument("--id")
        q.add_argument("--m")
        p.add_argument("--bucket", type=int, default=1)
        p.add_argument("--confidence", type=float, default=0.95)
        _common(p)
        p.set_defaults(func=cmd_rank)

    rank_args(sub.add_parser("rank", help="mid-rank NAQ of a pool or a query"))

    p = sub.add_parser("verify", help="run audit suites")
    p.add_argument("suite", choices=sorted(SUITES) + ["all"])
    _common(p, seed=True)
    p.set_defaults(func=cmd_verify)

    naq = sub.add_parser("naq", help="pool statistics").add_subparsers(dest="naq_cmd", required=True)
    rank_args(naq.add_parser("rank"))
    p = naq.add_parser("band", help="DKW band or its inverse")
    p.add_argument("--n", type=int, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--epsilon", type=float)
    g.add_argument("--confidence", type=float, default=0.95)
    _common(p)
    p.set_defaults(func=cmd_band)
    p = naq.add_parser("stability", help="nested-pool cdf bounds")
    p.add_argument("pool")
    p.add_argument("superpool")
    _common(p)
    p.set_defaults(func=cmd_stability)

    bounds = sub.add_parser("bounds", help="lower bounds").add_subparsers(dest="bounds_cmd",
                                                                          required=True)
    p = bounds.add_parser("fano")
    p.add_argument("--H", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--support", type=int, required=True)
    p.add_argument("--slack", type=float, default=1.0)
    _common(p)
    p.set_defaults(func=cmd_fano)
    p = bounds.add_parser("identity")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--executor", choices=("reference", "universal", "machine"), default="reference")
    p.add_argument("--max-len", type=int)
    _common(p)
    p.set_defaults(func=cmd_identity)
    p = bounds.add_parser("panel")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--overlapping", action="store_true")
    _common(p, caps=True)
    p.set_defaults(func=cmd_panel)
    p = bounds.add_parser("gc")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)
    _common(p, seed=True)
    p.set_defaults(func=cmd_gc)

    p = sub.add_parser("khat", help="complexity estimates for bit strings")
    p.add_argument("bits", nargs="*")
    p.add_argument("--corpus")
    p.add_argument("--method", default="exact", help="exact | compressor:<id>")
    _common(p, caps=True)
    p.set_defaults(func=cmd_khat)

    p = sub.add_parser("registry", help="print the header registry")
    _common(p)
    p.set_defaults(func=cmd_registry)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except DataError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except (InvalidArgument, CompressorError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

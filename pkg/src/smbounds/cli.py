"""Command-line surface: compute bounds, sweep comparisons, run simulations,
and drive the verification suites.

Single results are emitted as JSON, sweeps as CSV with a fixed column set.
Every run can serialize its resolved parameters to a flat `key = value`
config file (`--save-config`) and be replayed byte-identically from it
(`--config`); explicit flags override config values.

Exit codes: 0 success, 1 invariant/verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Any, Callable, Optional

from . import bounds as bnd
from . import montecarlo as mc
from . import suites
from .processes import EventSpec, EventVariant, parse_law

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

CSV_COLUMNS = [
    "x", "v", "n", "b", "y", "bound_name", "log_value", "value", "branch",
    "p_hat", "ci_low", "ci_high", "verdict", "seed",
]

EVENT_NAMES = {
    "stopped": EventVariant.STOPPED_ANY_K,
    "max": EventVariant.MAX_WITH_FINAL_QC,
    "final": EventVariant.FINAL_ONLY,
    "truncated": EventVariant.TRUNCATED_ANY_K,
}


def fmt(value: Any) -> str:
    """Render one CSV cell; floats carry 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _json_safe(value: Any) -> Any:
    """Floats pass through untouched except non-finite ones, which JSON
    proper cannot carry."""
    if isinstance(value, float) and not math.isfinite(value):
        return fmt(value)
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class Param:
    name: str
    conv: Callable[[str], Any]
    default: Any = None
    help: str = ""
    required: bool = False
    flag: bool = False


PARAMS: dict[str, list[Param]] = {
    "bounds": [
        Param("x", float, help="deviation threshold", required=True),
        Param("v", float, help="square root of the variance budget", required=True),
        Param("n", int, help="horizon", required=True),
        Param("b", float, help="lower-range magnitude; adds the bounded-range bounds"),
        Param("y", float, help="truncation level; adds the truncation-family bounds"),
        Param("p_exceed", float, 0.0, "P(max increment > y), for the two-term bound"),
        Param("sum_exceed", float, 0.0, "sum of per-step exceedance probabilities"),
        Param("p_qc_exceed", float, 0.0, "P(variance budget exceeded)"),
        Param("supermartingale", _parse_bool, False,
              "flag the supermartingale regime for the bounded-range bound", flag=True),
        Param("format", str, "table", "table, json, or csv"),
        Param("out", str, help="write output to this path instead of stdout"),
    ],
    "compare": [
        Param("grid", str, help="grid file with x/v/n lists; defaults to the built-in grid"),
        Param("format", str, "csv", "csv or json"),
        Param("out", str),
    ],
    "simulate": [
        Param("law", str, help="extremal:S2 | bounded:B | drifted:B,D | cexp", required=True),
        Param("event", str, "stopped", "stopped, max, final, or truncated"),
        Param("x", float, required=True),
        Param("v", float, required=True),
        Param("n", int, required=True),
        Param("y", float, help="truncation level (required for truncated events)"),
        Param("trials", int, 10**5),
        Param("seed", int, 20240001),
        Param("gamma", float, 0.95, "confidence level for the exact interval"),
        Param("format", str, "json", "json or csv"),
        Param("out", str),
    ],
    "verify": [
        Param("suite", str, "all", "cumulant, chain, variational, oracle, mc, or all"),
        Param("trials", int, 10**6, "Monte Carlo trials per instance (mc suite)"),
        Param("out", str, help="also write the report to this path"),
    ],
}


def load_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    return values


def save_config(path: str, command: str, merged: dict[str, Any]) -> None:
    lines = [f"command = {command}"]
    for name in sorted(merged):
        if name == "out":
            continue
        value = merged[name]
        if value is None:
            continue
        lines.append(f"{name} = {fmt(value)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def resolve_params(command: str, args: argparse.Namespace) -> dict[str, Any]:
    config = load_config(args.config) if args.config else {}
    if "command" in config and config.pop("command") != command:
        raise ValueError(f"config file was saved for another command, not {command!r}")
    merged: dict[str, Any] = {}
    for p in PARAMS[command]:
        value = getattr(args, p.name)
        if value is None and p.name in config:
            value = p.conv(config[p.name])
        if value is None:
            value = p.default
        if value is None and p.required:
            raise ValueError(f"missing required parameter --{p.name.replace('_', '-')}")
        merged[p.name] = value
    unknown = set(config) - {p.name for p in PARAMS[command]}
    if unknown:
        raise ValueError(f"unknown config keys for {command}: {sorted(unknown)}")
    return merged


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(rows: list[dict[str, Any]]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(fmt(row.get(col)) for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def _json_text(doc: dict[str, Any]) -> str:
    return json.dumps(_json_safe(doc), indent=2) + "\n"


def _row(**kwargs: Any) -> dict[str, Any]:
    return kwargs


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------


def _bound_rows(p: dict[str, Any]) -> list[dict[str, Any]]:
    x, v, n = p["x"], p["v"], p["n"]
    q = bnd.TailQuery(x, v, n)
    base = dict(x=x, v=v, n=n)
    rows = [
        _row(**base, bound_name="hoeffding", log_value=bnd.hoeffding(q).log_value),
        _row(**base, bound_name="freedman", log_value=bnd.freedman(x, v).log_value),
        _row(**base, bound_name="bennett", log_value=bnd.bennett(x, v).log_value),
        _row(**base, bound_name="bernstein", log_value=bnd.bernstein(x, v).log_value),
        _row(**base, bound_name="prohorov", log_value=bnd.prohorov(x, v).log_value),
    ]
    if p["b"] is not None:
        b = p["b"]
        az = bnd.azuma_refined(x, n, b)
        rows.append(_row(**base, b=b, bound_name="azuma_refined",
                         log_value=az.bound.log_value, branch=az.branch))
        ho = bnd.hoeffding_bounded(x, n, b, supermartingale=p["supermartingale"])
        rows.append(_row(**base, b=b, bound_name="hoeffding_bounded", log_value=ho.log_value))
    if p["y"] is not None:
        y = p["y"]
        fn = bnd.fuk_nagaev(x, y, v, n, p["p_exceed"])
        rows.append(_row(**base, y=y, bound_name="fuk_nagaev_h_term",
                         log_value=fn.h_term.log_value))
        rows.append(_row(**base, y=y, bound_name="fuk_nagaev", log_value=fn.total.log_value))
        rows.append(_row(**base, y=y, bound_name="courbot",
                         log_value=bnd.courbot(x, y, v, p["sum_exceed"],
                                               p["p_qc_exceed"]).log_value))
        if x > 0:
            rows.append(_row(**base, y=y, bound_name="haeusler",
                             log_value=bnd.haeusler(x, y, v).log_value))
    for row in rows:
        row["value"] = math.exp(row["log_value"])
    return rows


def cmd_bounds(p: dict[str, Any]) -> int:
    rows = _bound_rows(p)
    if p["format"] == "csv":
        _emit(_csv_text(rows), p["out"])
    elif p["format"] == "json":
        doc = {"command": "bounds",
               "query": {"x": p["x"], "v": p["v"], "n": p["n"], "b": p["b"], "y": p["y"]},
               "bounds": [{k: r.get(k) for k in ("bound_name", "log_value", "value", "branch")}
                          for r in rows]}
        _emit(_json_text(doc), p["out"])
    elif p["format"] == "table":
        width = max(len(r["bound_name"]) for r in rows)
        lines = [f"query: x={fmt(p['x'])} v={fmt(p['v'])} n={p['n']}"]
        for r in rows:
            branch = f"  [{r['branch']}]" if r.get("branch") else ""
            lines.append(f"  {r['bound_name']:<{width}}  log={fmt(r['log_value'])}  "
                         f"value={fmt(r['value'])}{branch}")
        _emit("\n".join(lines) + "\n", p["out"])
    else:
        raise ValueError(f"unknown format {p['format']!r}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


def _parse_grid_file(path: str) -> list[bnd.TailQuery]:
    values = load_config(path)
    try:
        xs = [float(t) for t in values["x"].split(",")]
        vs = [float(t) for t in values["v"].split(",")]
        ns = [int(t) for t in values["n"].split(",")]
    except KeyError as exc:
        raise ValueError(f"grid file {path} must define x, v and n lists") from exc
    return [bnd.TailQuery(x, v, n) for n in ns for v in vs for x in xs]


def cmd_compare(p: dict[str, Any]) -> int:
    grid = _parse_grid_file(p["grid"]) if p["grid"] else bnd.default_grid()
    rows = []
    failures = 0
    for q in grid:
        named = [
            ("hoeffding", bnd.hoeffding(q).log_value),
            ("freedman", bnd.freedman(q.x, q.v).log_value),
            ("bennett", bnd.bennett(q.x, q.v).log_value),
            ("bernstein", bnd.bernstein(q.x, q.v).log_value),
            ("prohorov", bnd.prohorov(q.x, q.v).log_value),
        ]
        logs = dict(named)
        slack = suites.ORDER_SLACK
        ok = (logs["hoeffding"] <= logs["freedman"] + slack
              and logs["freedman"] <= logs["bennett"] + slack
              and logs["bennett"] <= logs["bernstein"] + slack
              and logs["hoeffding"] <= logs["prohorov"] + slack)
        if not ok:
            failures += 1
        verdict = "PASS" if ok else "FAIL"
        for name, lv in named:
            rows.append(_row(x=q.x, v=q.v, n=q.n, bound_name=name, log_value=lv,
                             value=math.exp(lv), verdict=verdict))
    if p["format"] == "json":
        doc = {"command": "compare", "points": len(grid), "ordering_failures": failures,
               "rows": rows}
        _emit(_json_text(doc), p["out"])
    else:
        _emit(_csv_text(rows), p["out"])
    if failures:
        sys.stderr.write(f"compare: ordering failed at {failures} grid points\n")
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def cmd_simulate(p: dict[str, Any]) -> int:
    law = parse_law(p["law"])
    if p["event"] not in EVENT_NAMES:
        raise ValueError(f"unknown event {p['event']!r}; choose from {sorted(EVENT_NAMES)}")
    variant = EVENT_NAMES[p["event"]]
    y = p["y"] if variant is EventVariant.TRUNCATED_ANY_K else None
    spec = EventSpec(p["x"], p["v"], variant, y=y)
    est = mc.estimate_event(law, spec, p["n"], p["trials"], p["seed"], p["gamma"])
    checks = []
    flagged = False
    for name, bound in suites.applicable_checks(law, spec, p["n"]):
        verdict = mc.verify_bound(est, bound).verdict
        flagged = flagged or verdict == "FLAG"
        checks.append({"bound_name": name, "log_value": bound.log_value,
                       "value": bound.value, "verdict": verdict})
    doc = {
        "command": "simulate",
        "law": law.label(),
        "event": p["event"],
        "x": p["x"], "v": p["v"], "n": p["n"], "y": y,
        "trials": p["trials"], "seed": p["seed"], "gamma": p["gamma"],
        "estimate": {"hits": est.hits, "p_hat": est.p_hat,
                     "ci_low": est.ci_low, "ci_high": est.ci_high},
        "checks": checks,
    }
    if est.p_hat == 0.0:
        doc["one_sided"] = f"p <= {fmt(est.ci_high)}"
    if p["format"] == "csv":
        rows = []
        base = dict(x=p["x"], v=p["v"], n=p["n"], y=y, p_hat=est.p_hat,
                    ci_low=est.ci_low, ci_high=est.ci_high, seed=p["seed"])
        if checks:
            for c in checks:
                rows.append(_row(**base, bound_name=c["bound_name"],
                                 log_value=c["log_value"], value=c["value"],
                                 verdict=c["verdict"]))
        else:
            rows.append(_row(**base))
        _emit(_csv_text(rows), p["out"])
    else:
        _emit(_json_text(doc), p["out"])
    return EXIT_FAIL if flagged else EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _use_color() -> bool:
    return sys.stdout.isatty() and not os.environ.get("NO_COLOR")


def cmd_verify(p: dict[str, Any]) -> int:
    names = list(suites.SUITES) if p["suite"] == "all" else [p["suite"]]
    reports = suites.run_suites(names, trials=p["trials"])
    color = _use_color()
    lines = []
    for rep in reports:
        for check in rep.checks:
            tag = "PASS" if check.passed else "FAIL"
            if color:
                tag = f"\x1b[32m{tag}\x1b[0m" if check.passed else f"\x1b[31m{tag}\x1b[0m"
            detail = f"  ({check.detail})" if check.detail else ""
            lines.append(f"[{rep.name}] {tag} {check.label}{detail}")
        lines.append(f"[{rep.name}] {'ok' if rep.passed else 'FAILED'}: "
                     f"{sum(c.passed for c in rep.checks)}/{len(rep.checks)} checks")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if p["out"]:
        with open(p["out"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smbounds",
        description="Tail bounds for supermartingales: closed forms, exact "
                    "oracles, and Monte Carlo verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, params in PARAMS.items():
        sp = sub.add_parser(command, help=f"{command} command")
        for p in params:
            flag = f"--{p.name.replace('_', '-')}"
            if p.flag:
                sp.add_argument(flag, action="store_const", const=True,
                                default=None, help=p.help)
            else:
                sp.add_argument(flag, type=p.conv, default=None, help=p.help)
        sp.add_argument("--config", default=None,
                        help="load parameters from a key = value file")
        sp.add_argument("--save-config", dest="save_config", default=None,
                        help="write the resolved parameters to this file")
    return parser


COMMANDS = {
    "bounds": cmd_bounds,
    "compare": cmd_compare,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        merged = resolve_params(args.command, args)
        if args.save_config:
            save_config(args.save_config, args.command, merged)
        return COMMANDS[args.command](merged)
    except ValueError as exc:
        sys.stderr.write(f"smbounds {args.command}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

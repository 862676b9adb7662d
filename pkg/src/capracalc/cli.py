"""Command-line front end.

Three commands:

* ``eval``    — evaluate conjugates, biconjugates, the hidden-convexity
  function, bounds, subdifferential membership, or aggregate norms at
  given points; emits JSON records plus a CSV projection.
* ``verify``  — run one randomized verification suite and emit a
  structured report; exit status 1 when any claim fails.
* ``report``  — aggregate prior JSON outputs into a summary table, and
  optionally tabulate the hidden-convexity value along a scaled ray.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 solver failure.  All randomness flows from ``--seed``; identical
configuration and seed produce byte-identical JSON apart from the
timestamp field.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import capra, variational, verify
from .capra import CapraContext
from .localnorms import AggregateNormSpec, aggregate_support_dual_norm, aggregate_top_dual_norm
from .norms import LpNorm, NormSpec, norm_from_config
from .setfunctions import SetFunction
from .subsets import INF, format_mask, support
from .verify import _jsonable

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3

EVAL_KINDS = (
    "conjugate",
    "biconjugate",
    "L0F",
    "bounds",
    "subdiff-membership",
    "aggregate-norm",
)


class ConfigError(ValueError):
    pass


def _load_json_arg(text: str):
    """Inline JSON, or the contents of a file (prefix @ optional)."""
    text = text.strip()
    if text.startswith("{") or text.startswith("["):
        return json.loads(text)
    path = text[1:] if text.startswith("@") else text
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read {path!r}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"invalid JSON in {path!r}: {err}") from err


def parse_norm(text: str) -> NormSpec:
    """'l2', 'l1.5', 'linf', inline JSON, or a JSON file path."""
    t = text.strip()
    if t.startswith("l") and not t.startswith("["):
        tail = t[1:]
        if tail == "inf":
            return LpNorm(INF)
        try:
            return LpNorm(float(tail))
        except ValueError:
            pass
    cfg = _load_json_arg(text)
    try:
        return norm_from_config(cfg)
    except (ValueError, KeyError, TypeError) as err:
        raise ConfigError(f"bad norm config: {err}") from err


def parse_set_function(text: str, d: int) -> SetFunction:
    t = text.strip()
    if t in ("cardinality", "sqrt-cardinality"):
        if d is None:
            raise ConfigError("named set functions need --d or points to fix the dimension")
        return SetFunction.from_config({"d": d, "name": t})
    cfg = _load_json_arg(text)
    try:
        return SetFunction.from_config(cfg)
    except (ValueError, KeyError, TypeError) as err:
        raise ConfigError(f"bad set-function config: {err}") from err


def load_points(path: str):
    data = _load_json_arg(path)
    if not isinstance(data, list) or not data:
        raise ConfigError("points file must be a nonempty JSON array")
    points = []
    for entry in data:
        if isinstance(entry, dict):
            points.append({k: np.asarray(v, dtype=float) for k, v in entry.items()})
        else:
            points.append({"x": np.asarray(entry, dtype=float)})
    return points


def _write_outputs(records, out: str):
    text = json.dumps(_jsonable(records), sort_keys=True, indent=2)
    if out:
        with open(out if out.endswith(".json") else out + ".json", "w") as fh:
            fh.write(text + "\n")
        csv_path = (out[:-5] if out.endswith(".json") else out) + ".csv"
        _write_csv(records, csv_path)
    else:
        print(text)


def _write_csv(records, path: str):
    rows = [r for r in records if isinstance(r, dict)]
    keys = []
    for r in rows:
        for k, v in r.items():
            if isinstance(v, (int, float, str, bool)) and k not in keys:
                keys.append(k)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in keys})


def cmd_eval(args) -> int:
    try:
        points = load_points(args.points)
        d = points[0]["x"].size
        norm = parse_norm(args.norm)
        F = parse_set_function(args.set_function, args.d or d)
        if F.d != d:
            raise ConfigError(f"set function d={F.d} does not match points d={d}")
        if norm.d is not None and norm.d != d:
            raise ConfigError(f"norm d={norm.d} does not match points d={d}")
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    ctx = CapraContext(norm, seed=args.seed)
    records = []
    try:
        for i, pt in enumerate(points):
            x = pt["x"]
            rec = {"index": i, "operation": None, "x": x}
            if args.what == "conjugate":
                rec["operation"] = "capra_conjugate_fsm"
                rec["value"] = capra.capra_conjugate_fsm(ctx, F, x)
            elif args.what == "biconjugate":
                rec["operation"] = "capra_biconjugate_fsm"
                rec["value"] = capra.capra_biconjugate_fsm(ctx, F, x)
                rec["fsm"] = F.value(support(x))
            elif args.what == "L0F":
                rec["operation"] = "eval_L0F"
                res = variational.eval_L0F(ctx, F, x)
                rec["value"] = res.value
                rec["lambda"] = {format_mask(k): v for k, v in res.state.lam.items()}
            elif args.what == "bounds":
                rec["operation"] = "bounds"
                rep = variational.bounds(ctx, F, x)
                rec.update({"lower": rep.lower, "value": rep.value,
                            "upper": rep.upper, "upper_variant": rep.upper_variant,
                            "upper_all_k": rep.upper_all_k})
            elif args.what == "subdiff-membership":
                rec["operation"] = "subdiff_membership"
                if "y" not in pt:
                    raise ConfigError(
                        "subdiff-membership points must be objects {\"x\": [...], \"y\": [...]}")
                y = pt["y"]
                res = (capra.subdiff_membership(ctx, F, x, y) if np.any(x)
                       else capra.subdiff_at_zero_membership(ctx, F, y))
                rec["member"] = res.member
                rec["certificate"] = res.certificate
            elif args.what == "aggregate-norm":
                rec["operation"] = "aggregate_norms"
                agg = AggregateNormSpec(ctx.family, F)
                rec["top_dual"] = aggregate_top_dual_norm(agg, x)
                rec["support_dual"] = aggregate_support_dual_norm(agg, x)
            records.append(rec)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, ValueError) as err:
        print(f"solver error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    _write_outputs(records, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        norm = parse_norm(args.norm)
        d = args.d or norm.d or 2
        kw = {}
        if args.tol is not None:
            kw["tol"] = args.tol
        report = verify.run_suite(args.suite, norm, d, args.trials, args.seed, **kw)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except RuntimeError as err:
        print(f"solver error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    text = json.dumps(_jsonable(report), sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK if report["passed"] else EXIT_VERIFY_FAIL


def cmd_report(args) -> int:
    if not args.inputs and not args.ray:
        print("error: no inputs given", file=sys.stderr)
        return EXIT_CONFIG
    buf = io.StringIO()
    for path in args.inputs:
        try:
            data = _load_json_arg(path)
        except ConfigError as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_CONFIG
        if isinstance(data, dict) and "suite" in data:
            buf.write(
                f"{data['suite']:<18} d={data['d']} trials={data['trials']} "
                f"checks={data['checks']} failures={data['failures']} "
                f"{'PASS' if data['passed'] else 'FAIL'}\n"
            )
        elif isinstance(data, list):
            for rec in data:
                op = rec.get("operation", "?")
                val = rec.get("value", rec.get("member", ""))
                buf.write(f"{op:<24} x={rec.get('x')} -> {val}\n")
        else:
            buf.write(f"{path}: unrecognized record shape\n")
    ray_rows = []
    if args.ray:
        try:
            norm = parse_norm(args.norm)
            spec = json.loads(args.ray) if args.ray.strip().startswith("{") else None
            if spec is None:
                raise ConfigError(
                    'expected --ray \'{"x0": [...], "scales": [lo, hi, n]}\'')
            x0 = np.asarray(spec["x0"], dtype=float)
            lo, hi, n = spec.get("scales", [0.1, 2.0, 20])
            F = parse_set_function(args.set_function, x0.size)
            ctx = CapraContext(norm, seed=args.seed)
            for t in np.linspace(lo, hi, int(n)):
                res = variational.eval_L0F(ctx, F, t * x0)
                ray_rows.append({"scale": float(t), "L0F": res.value})
        except (ConfigError, KeyError, ValueError) as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_CONFIG
    summary = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(summary)
        if ray_rows:
            with open(args.out + ".ray.csv", "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=["scale", "L0F"])
                w.writeheader()
                for row in ray_rows:
                    w.writerow({"scale": row["scale"],
                                "L0F": "inf" if row["L0F"] == INF else row["L0F"]})
    else:
        sys.stdout.write(summary)
        for row in ray_rows:
            print(f"{row['scale']:.6f},{row['L0F']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="capracalc",
        description="Conjugacy calculus for functions of the support mapping.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, norm_required=True):
        sp.add_argument("--norm", required=norm_required,
                        help="'l2', 'l1.5', 'linf', inline JSON, or a JSON file")
        sp.add_argument("--set-function", default="cardinality",
                        help="'cardinality', 'sqrt-cardinality', inline JSON, or a file")
        sp.add_argument("--d", type=int, default=None)
        sp.add_argument("--trials", type=int, default=50)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--out", default=None)

    pe = sub.add_parser("eval", help="evaluate the calculus at given points")
    pe.add_argument("what", choices=EVAL_KINDS)
    pe.add_argument("--points", required=True, help="JSON array of arrays (or {x, y} objects)")
    common(pe)
    pe.set_defaults(func=cmd_eval)

    pv = sub.add_parser("verify", help="run a randomized verification suite")
    pv.add_argument("suite", choices=sorted(verify.SUITES))
    common(pv)
    pv.set_defaults(func=cmd_verify)

    pr = sub.add_parser("report", help="aggregate prior JSON outputs")
    pr.add_argument("inputs", nargs="*", help="JSON files from eval/verify runs")
    pr.add_argument("--ray", default=None,
                    help='JSON {"x0": [...], "scales": [lo, hi, n]} for a ray table')
    common(pr, norm_required=False)
    pr.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

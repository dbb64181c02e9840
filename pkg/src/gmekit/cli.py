"""Command-line front end.

Exit codes: 0 success or consistent audit, 1 audited violation or failed
check, 2 usage or input error, 3 state-invariant failure. Every report is
JSON (``--pretty`` prints a plain table instead) and embeds a run manifest.
The seed comes from ``--seed``, then ``GMEKIT_SEED``, then 0.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .convex_roof import RoofConfig, biseparability_certificate, evaluate
from .errors import GmekitError, InvalidArgumentError, StateFormatError, StateInvariantError
from .fixtures import FIXTURES, fixture
from .genuine import delta_pure, gmc_with_cut
from .io import RunManifest, load_state, save_state
from .measures import Family, MeasureSpec, parse_family
from .monogamy import (
    audit_complete,
    audit_disentangling,
    audit_tight,
    campaign,
    default_alpha_grid,
)
from .partitions import Coarsen, Partition, all_bipartitions, all_partitions, is_coarser, xi_set
from .states import PureState, SystemShape, regroup

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2, 3
SEED_ENV = "GMEKIT_SEED"


class UsageError(GmekitError):
    pass


# --------------------------------------------------------------------------- #
# argument helpers

def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _load(text: str):
    """A state file path, or ``fixture:NAME`` for an embedded state."""
    if text.startswith("fixture:"):
        return fixture(text.split(":", 1)[1])
    return load_state(text)


def _spec(args) -> MeasureSpec:
    family, genuine = parse_family(args.family)
    inner = parse_family(args.inner)[0] if getattr(args, "inner", None) else None
    log_base = "e" if args.log_base in ("e", "E") else int(args.log_base)
    return MeasureSpec(
        family,
        genuine=genuine or args.genuine,
        q=args.q,
        alpha=args.alpha,
        log_base=log_base,
        mixed_strategy="direct" if getattr(args, "direct", False) else "convex_roof",
        inner=inner,
    )


def _cfg(args, seed: int) -> RoofConfig:
    base = RoofConfig()
    return RoofConfig(
        restarts=args.restarts if args.restarts is not None else base.restarts,
        max_iters=args.max_iters if args.max_iters is not None else base.max_iters,
        seed=seed,
    )


def _alpha_grid(text: str | None) -> np.ndarray:
    """``geom:LO:HI:N`` or a comma-separated list of exponents."""
    if text is None:
        return default_alpha_grid()
    try:
        if text.startswith("geom:"):
            lo, hi, n = text[5:].split(":")
            return np.geomspace(float(lo), float(hi), int(n))
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise UsageError(f"cannot parse alpha grid {text!r}") from None


def _partition(state, text: str | None) -> Partition | None:
    return None if text is None else state.shape.partition(text)


def _add_measure_flags(p: argparse.ArgumentParser, family_default: str | None = None) -> None:
    p.add_argument("--family", default=family_default, required=family_default is None,
                   help="measure family, e.g. ef, tau, concurrence, c_g, gmc, sum2")
    p.add_argument("--genuine", action="store_true", help="apply the biseparability gate")
    p.add_argument("--q", type=float, default=2.0, help="Tsallis parameter (> 1)")
    p.add_argument("--alpha", type=float, default=0.5, help="Renyi parameter in (0, 1)")
    p.add_argument("--log-base", default="2", choices=["2", "e"], help="von Neumann log base")
    p.add_argument("--inner", help="inner family for the sum measures")


def _add_roof_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--restarts", type=int, help="convex-roof restarts")
    p.add_argument("--max-iters", type=int, help="convex-roof iterations per restart")
    p.add_argument("--seed", type=int, help=f"RNG seed (fallback: ${SEED_ENV}, then 0)")


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", dest="pretty", action="store_false", help="JSON output (default)")
    g.add_argument("--pretty", dest="pretty", action="store_true", help="plain-text table")
    p.set_defaults(pretty=False)


# --------------------------------------------------------------------------- #
# output

def _flatten(d: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(d, dict):
        out = []
        for k, v in d.items():
            out.extend(_flatten(v, f"{prefix}.{k}" if prefix else str(k)))
        return out
    if isinstance(d, list) and len(d) > 8:
        return [(prefix, f"[{len(d)} items]")]
    return [(prefix, d)]


def _emit(report: dict, pretty: bool, out=None) -> None:
    out = out or sys.stdout
    if not pretty:
        out.write(json.dumps(report, indent=2) + "\n")
        return
    rows = _flatten(report)
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        out.write(f"{k.ljust(width)}  {v}\n")


def _manifest(args, command: str, inputs: Sequence[str], spec=None, cfg=None, seed=None,
              **options) -> RunManifest:
    return RunManifest(
        command=command,
        inputs=list(inputs),
        spec=None if spec is None else spec.to_dict(),
        roof_config=None if cfg is None else cfg.to_dict(),
        seed=seed,
        options=options,
    )


# --------------------------------------------------------------------------- #
# commands

def cmd_measure(args) -> int:
    seed = _seed(args)
    state = _load(args.state)
    spec = _spec(args)
    cfg = _cfg(args, seed)
    man = _manifest(args, "measure", [args.state], spec, cfg, seed, partition=args.partition)
    part = _partition(state, args.partition)
    ev = evaluate(spec, state, part, cfg)
    labels = state.shape.labels
    report = {
        "value": ev.value,
        "partition": part.format(labels) if part else "|".join(labels),
        "method": ev.method,
        "exact": ev.exact,
        "upper_bound": ev.method == "convex_roof",
        "spec": spec.to_dict(),
        "evaluation": ev.to_dict(),
        "manifest": man.finish().to_dict(),
    }
    _emit(report, args.pretty)
    return EXIT_OK


def cmd_gmc(args) -> int:
    seed = _seed(args)
    state = _load(args.state)
    cfg = _cfg(args, seed)
    spec = MeasureSpec(Family.GMC)
    man = _manifest(args, "gmc", [args.state], spec, cfg, seed, partition=args.partition)
    part = _partition(state, args.partition)
    full_view = part is None or part.covers(state.shape.m)
    if isinstance(state, PureState) and full_view:
        value, cut = gmc_with_cut(state, part)
        report = {"value": value, "cut": cut.format(state.shape.labels), "exact": True}
    else:
        ev = evaluate(spec, state, part, cfg)
        report = {"value": ev.value, "cut": None, "exact": ev.exact,
                  "upper_bound": ev.method == "convex_roof", "evaluation": ev.to_dict()}
    report["manifest"] = man.finish().to_dict()
    _emit(report, args.pretty)
    return EXIT_OK


def cmd_delta(args) -> int:
    seed = _seed(args)
    state = _load(args.state)
    cfg = _cfg(args, seed)
    man = _manifest(args, "delta", [args.state], None, cfg, seed, partition=args.partition,
                    tol=args.tol)
    part = _partition(state, args.partition)
    view = regroup(state, part) if part is not None else state
    if isinstance(view, PureState):
        verdict = delta_pure(view, args.tol)
        report = {"delta": verdict.value, **verdict.to_dict(view.shape.labels), "numerical": False}
    else:
        cert = biseparability_certificate(view, cfg)
        report = {"delta": 0 if cert.found else 1, **cert.to_dict()}
        if cert.found:
            report["ensemble"] = cert.roof.to_dict()["ensemble"]
    report["manifest"] = man.finish().to_dict()
    _emit(report, args.pretty)
    return EXIT_OK


def cmd_audit(args) -> int:
    seed = _seed(args)
    state = _load(args.state)
    spec = _spec(args)
    cfg = _cfg(args, seed)
    grid = _alpha_grid(args.alpha_grid)
    man = _manifest(args, "audit", [args.state], spec, cfg, seed, mode=args.mode,
                    alpha_grid=args.alpha_grid, partition=args.partition)
    if args.mode == "disentangling":
        order = [state.shape.labels.index(ch) for ch in args.order] if args.order else (0, 1, 2)
        rep = audit_disentangling(spec, state, args.condition, cfg, order, state_id=args.state)
        report = rep.to_dict()
        violated = rep.verdict == "violated"
    else:
        audit = audit_complete if args.mode == "complete" else audit_tight
        rep = audit(spec, state, grid, cfg, _partition(state, args.partition), state_id=args.state)
        report = rep.to_dict()
        violated = rep.verdict == "violated"
    report["manifest"] = man.finish().to_dict()
    _emit(report, args.pretty)
    return EXIT_VIOLATION if violated else EXIT_OK


def cmd_partitions(args) -> int:
    labels = args.labels
    if args.action in ("bipartitions", "all"):
        if args.parties is None:
            raise UsageError(f"partitions {args.action} needs --parties")
        if args.parties > len(labels):
            raise UsageError("more parties than labels")
        parts = (all_bipartitions(args.parties) if args.action == "bipartitions"
                 else all_partitions(range(args.parties)))
        report = {"count": len(parts), "partitions": [p.format(labels) for p in parts]}
    else:
        if args.x is None or args.y is None:
            raise UsageError(f"partitions {args.action} needs two partitions")
        x, y = Partition.parse(args.x, labels), Partition.parse(args.y, labels)
        inner = not args.no_inner_discard
        if args.action == "coarser":
            mode = Coarsen[args.mode.upper()]
            report = {"x": x.format(labels), "y": y.format(labels), "mode": args.mode,
                      "inner_discard": inner, "coarser": is_coarser(x, y, mode, inner)}
        else:
            xs = xi_set(x, y, Coarsen[args.mode.upper()], inner)
            report = {"x": x.format(labels), "y": y.format(labels), "mode": args.mode,
                      "inner_discard": inner, "count": len(xs),
                      "xi": [z.format(labels) for z in xs]}
    report["manifest"] = _manifest(args, "partitions", [], action=args.action).finish().to_dict()
    _emit(report, args.pretty)
    return EXIT_OK


def _shape(args) -> SystemShape:
    if args.dims:
        try:
            dims = [int(d) for d in args.dims.split(",")]
        except ValueError:
            raise UsageError(f"cannot parse --dims {args.dims!r}") from None
        return SystemShape(dims)
    return SystemShape.qubits(args.qubits)


def cmd_campaign(args) -> int:
    seed = _seed(args)
    spec = _spec(args)
    shape = _shape(args)
    base = RoofConfig(restarts=1, max_iters=100)
    cfg = RoofConfig(
        restarts=args.restarts if args.restarts is not None else base.restarts,
        max_iters=args.max_iters if args.max_iters is not None else base.max_iters,
        seed=seed,
    )
    grid = _alpha_grid(args.alpha_grid)
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir is not None:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            probe = out_dir / ".write-test"
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            raise UsageError(f"output directory {out_dir} is not writable: {exc.strerror}") from None
    man = _manifest(args, "campaign", [], spec, cfg, seed, mode=args.mode, n=args.n,
                    dims=list(shape.dims), alpha_grid=args.alpha_grid)
    result = campaign(spec, shape, args.n, seed, grid, args.mode, cfg)
    aggregate = result.to_dict()
    files = {}
    if out_dir is not None:
        (out_dir / "aggregate.json").write_text(json.dumps(aggregate, indent=2) + "\n")
        files["aggregate"] = str(out_dir / "aggregate.json")
        if result.worst_state is not None:
            save_state(result.worst_state, out_dir / "worst.json", f"sample-{result.worst_index}")
            files["worst"] = str(out_dir / "worst.json")
        for idx, psi in result.violating_states.items():
            path = out_dir / f"violation-{idx}.json"
            save_state(psi, path, f"sample-{idx}")
            files[f"violation-{idx}"] = str(path)
    manifest = man.finish().to_dict()
    if out_dir is not None:
        (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    _emit({"aggregate": aggregate, "files": files, "manifest": manifest}, args.pretty)
    return EXIT_VIOLATION if result.violations else EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_checks

    state = load_state(args.fixture) if args.fixture else fixture("example4")
    man = _manifest(args, "verify-paper", [args.fixture] if args.fixture else ["fixture:example4"])
    checks = run_checks(state)
    ok = all(c["pass"] for c in checks)
    report = {"all_pass": ok, "checks": checks, "manifest": man.finish().to_dict()}
    if args.pretty:
        width = max(len(c["name"]) for c in checks)
        for c in checks:
            print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['name'].ljust(width)}  {c['detail']}")
        print(f"{sum(c['pass'] for c in checks)}/{len(checks)} checks passed")
    else:
        _emit(report, False)
    return EXIT_OK if ok else EXIT_VIOLATION


# --------------------------------------------------------------------------- #
# parser and entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmekit",
        description="Multipartite entanglement measures, convex roofs and monogamy audits.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)
    state_help = f"state JSON file, or fixture:NAME with NAME in {{{', '.join(FIXTURES)}}}"

    p = sub.add_parser("measure", help="evaluate a measure on a state")
    p.add_argument("state", help=state_help)
    p.add_argument("--partition", help="view to evaluate, e.g. 'AB|CD' (default: finest)")
    p.add_argument("--direct", action="store_true",
                   help="closed-form mixed-state negativity instead of the convex roof")
    _add_measure_flags(p)
    _add_roof_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("gmc", help="genuinely multipartite concurrence and its minimizing cut")
    p.add_argument("state", help=state_help)
    p.add_argument("--partition")
    _add_roof_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_gmc)

    p = sub.add_parser("delta", help="biseparability gate (numerical search on mixed states)")
    p.add_argument("state", help=state_help)
    p.add_argument("--partition")
    p.add_argument("--tol", type=float, default=1e-8, help="purity tolerance for product cuts")
    _add_roof_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("audit", help="monogamy audit; exit 1 on violation")
    p.add_argument("state", help=state_help)
    p.add_argument("--mode", choices=["complete", "tight", "disentangling"], required=True)
    p.add_argument("--condition", choices=["bipartite", "complete", "tight"], default="bipartite",
                   help="equality condition for --mode disentangling")
    p.add_argument("--order", help="relabel parties as A, B, C for disentangling, e.g. 'BCA'")
    p.add_argument("--partition", help="audited partition (default: finest)")
    p.add_argument("--alpha-grid", help="'geom:LO:HI:N' or comma list (default geom:0.25:8:64)")
    _add_measure_flags(p)
    _add_roof_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("partitions", help="enumerate partitions, test coarsening, Xi sets")
    p.add_argument("action", choices=["bipartitions", "all", "coarser", "xi"])
    p.add_argument("x", nargs="?", help="finer partition, e.g. 'A|B|CD|E'")
    p.add_argument("y", nargs="?", help="coarser partition, e.g. 'A|B'")
    p.add_argument("--parties", type=int, help="number of parties for enumeration")
    p.add_argument("--labels", default="ABCDEF", help="single-letter labels in index order")
    p.add_argument("--mode", choices=["discard", "combine", "any"], default="any")
    p.add_argument("--no-inner-discard", action="store_true",
                   help="forbid discarding a party from inside a multi-party block")
    _add_output_flags(p)
    p.set_defaults(func=cmd_partitions)

    p = sub.add_parser("campaign", help="audit Haar-random pure states; exit 1 on any violation")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--qubits", type=int, default=3)
    g.add_argument("--dims", help="comma-separated local dimensions, e.g. 2,2,3")
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--mode", choices=["complete", "tight"], default="complete")
    p.add_argument("--alpha-grid")
    p.add_argument("--out-dir", help="write aggregate.json, manifest.json and fixture states here")
    _add_measure_flags(p)
    _add_roof_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("verify-paper", help="recompute the reference numbers of the example state")
    p.add_argument("--fixture", help="load the four-qubit example from this state file instead")
    _add_output_flags(p)
    p.set_defaults(func=cmd_verify, seed=None)
    return parser


def _version() -> str:
    from . import __version__

    return __version__


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StateInvariantError as exc:
        print(f"gmekit: invalid state: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (StateFormatError, InvalidArgumentError, UsageError) as exc:
        print(f"gmekit: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

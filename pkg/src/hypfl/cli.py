"""hypfl command line: gen / norm / lp / predicate / fio / solve / probe.

Exit codes: 0 success, 2 validation or usage error (machine-readable JSON
on stderr), 1 numerical hypothesis failure (root collision, sign
violation, phase certification) with the error name on stderr.  All
randomized paths take explicit seeds and every report embeds its resolved
run configuration, so report files are byte-reproducible.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

from .core import GridSpec, spatial_lp_norm
from .fio import apply_fio, make_fio
from .gfn import GfnError, read_gfn, write_gfn
from .hyperbolic import (HyperbolicProblemSpec, NegativeImaginary, RootCollision,
                         UnsupportedProblem, coefficient_from_descriptor, solve_cauchy)
from .lp import PartitionError, build_dyadic_family, dyadic_block
from .phases import (PhaseValidationError, bracket_power_symbol, ensure_valid_phase,
                     phase_from_descriptor)
from .probe import (NyquistHeadroomError, ScanReport, TestFamily, default_ladder,
                    embedding_ratio_sweep, estimate_operator_norm, family_members,
                    threshold_scan)
from .spaces import (INF, IndexTuple, admissibility_decision, besov_embedding_decision,
                     besov_norm, fl_norm, triebel_embedding_decision, triebel_norm)

TOLERANCE_PROFILES = {
    "default": {"delta_gap": 1e-3, "im_tol": 1e-9, "phase_sample_budget": 400},
    "strict": {"delta_gap": 2e-3, "im_tol": 1e-12, "phase_sample_budget": 1600},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    """Resolved invocation embedded in every report for reproducibility."""

    command: str
    parameters: dict
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    seed: int | None = None
    tolerance_profile: str = "default"

    def to_dict(self):
        d = asdict(self)
        d["inputs"] = [os.path.basename(p) for p in self.inputs]
        d["outputs"] = [os.path.basename(p) for p in self.outputs]
        return d


def _json_clean(o):
    """Replace non-finite floats by strings: bare Infinity/NaN is not JSON."""
    if isinstance(o, dict):
        return {k: _json_clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_json_clean(v) for v in o]
    if isinstance(o, float) and not math.isfinite(o):
        return "nan" if math.isnan(o) else ("inf" if o > 0 else "-inf")
    return o


def _json_line(obj) -> str:
    return json.dumps(_json_clean(obj), sort_keys=True, allow_nan=False)


def _emit_report(obj, path=None):
    text = json.dumps(_json_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_exponent(text, name):
    if text is None:
        return None
    if str(text).lower() in ("inf", "infinity"):
        return INF
    try:
        v = float(text)
    except ValueError:
        raise UsageError(f"--{name} must be a number or 'inf', got {text!r}") from None
    return v


def _parse_norms(text):
    pairs = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise UsageError(f"norm request {part!r} is not of the form p:alpha")
        p_txt, a_txt = part.split(":", 1)
        p = _parse_exponent(p_txt, "norms")
        try:
            alpha = float(a_txt)
        except ValueError:
            raise UsageError(f"norm request {part!r}: alpha must be a number") from None
        pairs.append((p, alpha))
    if not pairs:
        raise UsageError("--norms must contain at least one p:alpha pair")
    return tuple(pairs)


def _parse_scales(text, d):
    if text is None:
        return default_ladder(d)
    try:
        scales = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise UsageError(f"--scales must be comma-separated integers, got {text!r}") from None
    if not scales:
        raise UsageError("--scales must contain at least one integer")
    return scales


def _load_json(path, what):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"{what} file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} file {path} is not valid JSON: {exc}") from None


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen(args):
    grid = GridSpec(args.d, args.n)
    fam = TestFamily(args.kind, (args.k,), seed=args.seed,
                     members_per_scale=args.member + 1)
    members = family_members(fam, grid, args.k)
    if args.member >= len(members):
        raise UsageError(
            f"--member {args.member} out of range for kind {args.kind} "
            f"({len(members)} members)")
    write_gfn(args.out, members[args.member])
    return 0


def _cmd_norm(args):
    f = read_gfn(args.input)
    p = _parse_exponent(args.p, "p")
    q = _parse_exponent(args.q, "q")
    if args.space == "fl":
        if q is not None:
            raise UsageError("--q does not apply to the fl space")
        result = fl_norm(f, p, args.s)
    else:
        if q is None:
            raise UsageError(f"--q is required for the {args.space} space")
        fam = build_dyadic_family(f.grid)
        norm = besov_norm if args.space == "besov" else triebel_norm
        result = norm(f, p, q, args.s, fam)
    payload = result.to_dict()
    sys.stdout.write(_json_line(payload) + "\n")
    if args.report:
        rc = RunConfig("norm", {"space": args.space, "p": payload["p"],
                                "q": payload["q"], "s": args.s},
                       inputs=[args.input], outputs=[args.report])
        _emit_report({"run_config": rc.to_dict(), "result": payload}, args.report)
    return 0


def _cmd_lp(args):
    f = read_gfn(args.input)
    fam = build_dyadic_family(f.grid)
    os.makedirs(args.out_dir, exist_ok=True)
    blocks = []
    for j in range(fam.j_max + 1):
        block = dyadic_block(f, j, fam)
        name = f"block_{j}.gfn"
        write_gfn(os.path.join(args.out_dir, name), block)
        blocks.append({"j": j, "file": name,
                       "l2_mass": spatial_lp_norm(block, 2.0)})
    rc = RunConfig("lp", {"n": f.grid.n, "d": f.grid.d},
                   inputs=[args.input], outputs=[args.out_dir])
    manifest = {
        "run_config": rc.to_dict(),
        "j_max": fam.j_max,
        "partition_residual": fam.partition_residual,
        "blocks": blocks,
    }
    _emit_report(manifest, os.path.join(args.out_dir, "manifest.json"))
    return 0


def _cmd_predicate(args):
    p = _parse_exponent(args.p, "p")
    q = _parse_exponent(args.q, "q")
    r = _parse_exponent(args.r, "r")
    if None in (p, q, r):
        raise UsageError("--p, --q and --r are all required")
    t = IndexTuple(p, q, r, args.s, args.d)
    if args.which == "b24":
        holds, clause = besov_embedding_decision(t)
    elif args.which == "t25":
        holds, clause = triebel_embedding_decision(t)
    else:
        if args.m is None or args.kappa is None:
            raise UsageError(f"--m and --kappa are required for {args.which}")
        scale = "besov" if args.which == "main2" else "triebel"
        holds, clause = admissibility_decision(t, args.m, args.kappa, scale)
    payload = dict(t.to_dict(), which=args.which, holds=bool(holds), clause=clause)
    if args.m is not None:
        payload["m"] = args.m
    if args.kappa is not None:
        payload["kappa"] = args.kappa
    sys.stdout.write(_json_line(payload) + "\n")
    return 0


def _build_phase(args, d):
    params = _load_json(args.params, "phase params") if args.params else {}
    return phase_from_descriptor({"phase": args.phase, "params": params}, d), params


def _cmd_fio(args):
    f = read_gfn(args.input)
    profile = TOLERANCE_PROFILES[args.tolerance_profile]
    phase, raw_params = _build_phase(args, f.grid.d)
    ensure_valid_phase(phase, sample_budget=profile["phase_sample_budget"])
    T = make_fio(phase, bracket_power_symbol(args.symbol_order, f.grid.d))
    g = apply_fio(T, f)
    write_gfn(args.out, g)
    if args.report:
        rc = RunConfig("fio", {"phase": args.phase, "params": raw_params,
                               "symbol_order": args.symbol_order},
                       inputs=[args.input], outputs=[args.out, args.report],
                       tolerance_profile=args.tolerance_profile)
        _emit_report({"run_config": rc.to_dict(), "order": T.order,
                      "kappa": T.kappa}, args.report)
    return 0


def load_problem(path, tolerance_profile="default"):
    """Problem JSON -> HyperbolicProblemSpec; data files resolve next to the JSON."""
    raw = _load_json(path, "problem")
    allowed = {"order", "coefficients", "grid", "T", "data_files", "steps_per_unit"}
    extra = set(raw) - allowed
    if extra:
        raise UsageError(f"unknown problem keys: {sorted(extra)}")
    missing = {"order", "coefficients", "grid", "T", "data_files"} - set(raw)
    if missing:
        raise UsageError(f"problem is missing keys: {sorted(missing)}")
    gspec = raw["grid"]
    if set(gspec) != {"d", "n"}:
        raise UsageError("problem grid must be exactly {d, n}")
    grid = GridSpec(int(gspec["d"]), int(gspec["n"]))
    coeffs = [coefficient_from_descriptor(c) for c in raw["coefficients"]]
    coeffs.sort(key=lambda c: c.degree)
    base = os.path.dirname(os.path.abspath(path))
    data = []
    for rel in raw["data_files"]:
        fpath = rel if os.path.isabs(rel) else os.path.join(base, rel)
        data.append(read_gfn(fpath))
    profile = TOLERANCE_PROFILES[tolerance_profile]
    return HyperbolicProblemSpec(
        int(raw["order"]), tuple(coeffs), grid, float(raw["T"]), tuple(data),
        steps_per_unit=int(raw.get("steps_per_unit", 64)),
        delta_gap=profile["delta_gap"], im_tol=profile["im_tol"])


def _cmd_solve(args):
    spec = load_problem(args.config, args.tolerance_profile)
    norms = _parse_norms(args.norms)
    kappa = args.kappa
    v, report = solve_cauchy(spec, args.t, norms_requested=norms,
                             alpha_convention=args.alpha_convention, kappa=kappa)
    write_gfn(args.out, v)
    rc = RunConfig("solve", {"t": args.t,
                             "norms": [[("inf" if p == INF else p), a] for p, a in norms],
                             "alpha_convention": args.alpha_convention,
                             "kappa": kappa},
                   inputs=[args.config],
                   outputs=[x for x in (args.out, args.report) if x],
                   tolerance_profile=args.tolerance_profile)
    payload = {"run_config": rc.to_dict(), "report": report.to_dict()}
    if args.report:
        _emit_report(payload, args.report)
    else:
        _emit_report(payload)
    return 0


def _write_scan(report: ScanReport, rc: RunConfig, report_path, csv_path):
    payload = {"run_config": rc.to_dict(), "scan": report.to_dict()}
    if report_path:
        _emit_report(payload, report_path)
    else:
        _emit_report(payload)
    if csv_path:
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())


def _cmd_probe(args):
    d = args.d
    scales = _parse_scales(args.scales, d)
    if args.mode == "threshold":
        fam = TestFamily(args.family, scales, seed=args.seed)
        p = _parse_exponent(args.p, "p")
        try:
            m_grid = [float(m) for m in args.m_grid.split(",") if m.strip()]
        except ValueError:
            raise UsageError(f"--m-grid must be comma-separated numbers, got {args.m_grid!r}") from None
        params = _load_json(args.params, "phase params") if args.params else {}
        grid = GridSpec(d, args.n) if args.n else None
        report = threshold_scan(args.phase, p, m_grid, fam, phase_params=params,
                                grid=grid, d=d)
        rc = RunConfig("probe threshold",
                       {"phase": args.phase, "p": "inf" if p == INF else p,
                        "m_grid": m_grid, "family": args.family,
                        "scales": list(scales)},
                       outputs=[x for x in (args.report, args.csv) if x],
                       seed=args.seed, tolerance_profile=args.tolerance_profile)
        _write_scan(report, rc, args.report, args.csv)
        return 0
    if args.mode == "embedding":
        fam = TestFamily(args.family, scales, seed=args.seed)
        t = IndexTuple(_parse_exponent(args.p, "p"), _parse_exponent(args.q, "q"),
                       _parse_exponent(args.r, "r"), args.s, d)
        grid = GridSpec(d, args.n) if args.n else None
        report = embedding_ratio_sweep(args.which, t, fam, grid=grid)
        rc = RunConfig("probe embedding",
                       {"which": args.which, "tuple": t.to_dict(),
                        "family": args.family, "scales": list(scales)},
                       outputs=[x for x in (args.report, args.csv) if x],
                       seed=args.seed, tolerance_profile=args.tolerance_profile)
        _write_scan(report, rc, args.report, args.csv)
        return 0
    # opnorm
    fam = TestFamily(args.family, scales, seed=args.seed)
    p = _parse_exponent(args.p, "p")
    q = _parse_exponent(args.q, "q") or p
    params = _load_json(args.params, "phase params") if args.params else {}
    grid = GridSpec(d, args.n) if args.n else None
    phase = phase_from_descriptor({"phase": args.phase, "params": params}, d)
    T = make_fio(phase, bracket_power_symbol(args.symbol_order, d))
    value = estimate_operator_norm(T, p, q, fam, grid=grid)
    rc = RunConfig("probe opnorm",
                   {"phase": args.phase, "symbol_order": args.symbol_order,
                    "p": "inf" if p == INF else p, "q": "inf" if q == INF else q,
                    "family": args.family, "scales": list(scales)},
                   outputs=[x for x in (args.report,) if x],
                   seed=args.seed, tolerance_profile=args.tolerance_profile)
    payload = {"run_config": rc.to_dict(),
               "lower_bound": value,
               "note": "max ratio over probes: a lower bound on the operator norm"}
    _emit_report(payload, args.report)
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hypfl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_profile(sp):
        sp.add_argument("--tolerance-profile", choices=sorted(TOLERANCE_PROFILES),
                        default="default")

    sp = sub.add_parser("gen", help="synthesize a catalogue test function")
    sp.add_argument("--kind", required=True,
                    choices=["single-mode", "dyadic-bump", "lacunary", "knapp",
                             "rademacher-random"])
    sp.add_argument("--k", type=int, required=True, help="frequency scale")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--member", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_gen)

    sp = sub.add_parser("norm", help="space norms of a stored field")
    sp.add_argument("--space", required=True, choices=["fl", "besov", "triebel"])
    sp.add_argument("--p", required=True)
    sp.add_argument("--q", default=None)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--report", default=None)
    sp.set_defaults(func=_cmd_norm)

    sp = sub.add_parser("lp", help="write the dyadic blocks of a field")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=_cmd_lp)

    sp = sub.add_parser("predicate", help="embedding / admissibility predicates")
    sp.add_argument("--which", required=True, choices=["b24", "t25", "main2", "main3"])
    sp.add_argument("--p", required=True)
    sp.add_argument("--q", required=True)
    sp.add_argument("--r", required=True)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--m", type=float, default=None)
    sp.add_argument("--kappa", type=int, default=None)
    sp.set_defaults(func=_cmd_predicate)

    sp = sub.add_parser("fio", help="apply a catalogue oscillatory operator")
    sp.add_argument("--phase", required=True)
    sp.add_argument("--params", default=None, help="JSON file of phase parameters")
    sp.add_argument("--symbol-order", type=float, default=0.0)
    sp.add_argument("--input", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--report", default=None)
    add_profile(sp)
    sp.set_defaults(func=_cmd_fio)

    sp = sub.add_parser("solve", help="solve a Cauchy problem from a JSON config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--report", default=None)
    sp.add_argument("--norms", default="2:0")
    sp.add_argument("--alpha-convention", choices=["d", "kappa"], default="d")
    sp.add_argument("--kappa", type=int, default=None)
    add_profile(sp)
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("probe", help="empirical scans")
    psub = sp.add_subparsers(dest="mode", required=True)

    tp = psub.add_parser("threshold")
    tp.add_argument("--phase", required=True)
    tp.add_argument("--params", default=None)
    tp.add_argument("--p", required=True)
    tp.add_argument("--m-grid", required=True)
    tp.add_argument("--family", default="single-mode")
    tp.add_argument("--scales", default=None)
    tp.add_argument("--seed", type=int, default=0)
    tp.add_argument("--d", type=int, default=1)
    tp.add_argument("--n", type=int, default=None)
    tp.add_argument("--report", default=None)
    tp.add_argument("--csv", default=None)
    add_profile(tp)
    tp.set_defaults(func=_cmd_probe)

    ep = psub.add_parser("embedding")
    ep.add_argument("--which", required=True, choices=["besov", "triebel"])
    ep.add_argument("--p", required=True)
    ep.add_argument("--q", required=True)
    ep.add_argument("--r", required=True)
    ep.add_argument("--s", type=float, required=True)
    ep.add_argument("--d", type=int, default=1)
    ep.add_argument("--family", default="dyadic-bump")
    ep.add_argument("--scales", default=None)
    ep.add_argument("--seed", type=int, default=0)
    ep.add_argument("--n", type=int, default=None)
    ep.add_argument("--report", default=None)
    ep.add_argument("--csv", default=None)
    add_profile(ep)
    ep.set_defaults(func=_cmd_probe)

    op = psub.add_parser("opnorm")
    op.add_argument("--phase", required=True)
    op.add_argument("--params", default=None)
    op.add_argument("--symbol-order", type=float, default=0.0)
    op.add_argument("--p", required=True)
    op.add_argument("--q", default=None)
    op.add_argument("--family", default="single-mode")
    op.add_argument("--scales", default=None)
    op.add_argument("--seed", type=int, default=0)
    op.add_argument("--d", type=int, default=1)
    op.add_argument("--n", type=int, default=None)
    op.add_argument("--report", default=None)
    add_profile(op)
    op.set_defaults(func=_cmd_probe)

    return parser


NUMERICAL_ERRORS = (RootCollision, NegativeImaginary, PhaseValidationError,
                    PartitionError, UnsupportedProblem)
VALIDATION_ERRORS = (UsageError, GfnError, NyquistHeadroomError, ValueError, OSError)


def dispatch(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except NUMERICAL_ERRORS as exc:
        sys.stderr.write(_json_line({"error": type(exc).__name__,
                                     "message": str(exc)}) + "\n")
        return 1
    except VALIDATION_ERRORS as exc:
        sys.stderr.write(_json_line({"error": type(exc).__name__,
                                     "message": str(exc)}) + "\n")
        return 2


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()

"""Empirical probing at desk scale.

Operator-norm lower bounds, order-threshold scans, and embedding-ratio
sweeps over deterministic test-function families.  Verdicts are trend
classifications fitted on log-log ladders, not proofs: a parameter row
gets a verdict only when the least-squares fit is tight (RMS residual
< 0.1 in log2 scale), and "growth" means fitted exponent >= 0.1.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import GridFunction, GridSpec, SpectralFunction, inverse_transform
from .fio import FioSpec, apply_fio, make_fio, required_order_fl
from .hyperbolic import HyperbolicProblemSpec, solve_cauchy
from .lp import phi_profile
from .phases import CATALOGUE, bracket_power_symbol, phase_from_descriptor
from .spaces import (INF, IndexTuple, besov_embedding_decision, besov_norm,
                     fl_norm, triebel_embedding_decision, triebel_norm)

RESIDUAL_CUT = 0.1
EXPONENT_CUT = 0.1

FAMILY_IDS = ("single-mode", "dyadic-bump", "lacunary", "knapp", "rademacher-random")


class NyquistHeadroomError(Exception):
    """A probe scale would push frequency content past n/4 (Nyquist/2)."""


@dataclass(frozen=True)
class TestFamily:
    """Deterministic family of band-limited probes, one batch per ladder scale."""

    __test__ = False        # not a pytest collectible despite the name

    generator: str
    scales: tuple
    seed: int = 0
    members_per_scale: int = 3

    def __post_init__(self):
        if self.generator not in FAMILY_IDS:
            raise ValueError(f"unknown family {self.generator!r}; pick from {FAMILY_IDS}")
        scales = tuple(int(s) for s in self.scales)
        if not scales or any(s < 1 for s in scales):
            raise ValueError("scales must be a nonempty list of positive integers")
        object.__setattr__(self, "scales", scales)
        if self.members_per_scale < 1:
            raise ValueError("members_per_scale must be >= 1")


def default_ladder(d: int) -> tuple:
    """2^3..2^6 on the d=1 desk grid, 2^2..2^4 on the d=2 one."""
    return (8, 16, 32, 64) if d == 1 else (4, 8, 16)


def default_grid(d: int) -> GridSpec:
    return GridSpec(d, 256 if d == 1 else 64)


def _check_headroom(grid: GridSpec, scale: int):
    if scale > grid.n // 4:
        raise NyquistHeadroomError(
            f"scale {scale} exceeds the headroom bound n/4 = {grid.n // 4} "
            f"(FIO output can spread frequencies)")


def family_members(fam: TestFamily, grid: GridSpec, scale: int):
    """The probes at one ladder scale, deterministic in (generator, scale, seed)."""
    _check_headroom(grid, scale)
    d = grid.d
    K = grid.frequencies()
    radii = np.sqrt(np.sum(K.astype(float) ** 2, axis=-1))
    shape = grid.shape

    def from_coeffs(c):
        return inverse_transform(SpectralFunction(grid, c.reshape(shape)))

    if fam.generator == "single-mode":
        c = np.zeros(grid.npoints, dtype=complex)
        target = np.zeros(d)
        target[0] = scale
        c[np.argmin(np.sum((K - target) ** 2, axis=-1))] = 1.0
        return [from_coeffs(c)]
    if fam.generator == "dyadic-bump":
        c = phi_profile(2.0 * radii / scale).astype(complex)
        return [from_coeffs(c)]
    if fam.generator == "lacunary":
        c = np.zeros(grid.npoints, dtype=complex)
        j = 0
        while 2 ** j <= scale:
            target = np.zeros(d)
            target[0] = 2 ** j
            c[np.argmin(np.sum((K - target) ** 2, axis=-1))] = 1.0
            j += 1
        return [from_coeffs(c)]
    if fam.generator == "knapp":
        if d != 2:
            raise ValueError("the knapp family is two-dimensional")
        k1, k2 = K[:, 0], K[:, 1]
        box = (k1 >= scale / 2) & (k1 <= scale) & (np.abs(k2) <= math.sqrt(scale))
        return [from_coeffs(box.astype(complex))]
    members = []
    support = (radii > 0) & (radii <= scale)
    for i in range(fam.members_per_scale):
        rng = np.random.default_rng((fam.seed, scale, i))
        signs = rng.integers(0, 2, size=grid.npoints) * 2 - 1
        c = np.where(support, signs.astype(complex), 0.0)
        members.append(from_coeffs(c))
    return members


def fit_loglog(scales, values):
    """Least-squares slope of log2(value) against log2(scale).

    Returns (exponent, intercept, rms_residual); non-positive values make
    the fit undefined and are reported as (nan, nan, inf).
    """
    x = np.log2(np.asarray(scales, dtype=float))
    vals = np.asarray(values, dtype=float)
    if np.any(vals <= 0) or len(vals) < 2:
        return math.nan, math.nan, math.inf
    y = np.log2(vals)
    slope, intercept = np.polyfit(x, y, 1)
    rms = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), float(intercept), rms


def classify_trend(exponent, residual, exponent_cut=EXPONENT_CUT,
                   residual_cut=RESIDUAL_CUT) -> str:
    if not residual < residual_cut:
        return "inconclusive"
    return "growth-trend" if exponent >= exponent_cut else "bounded-trend"


@dataclass
class ScanReport:
    kind: str
    config: dict
    entries: list = field(default_factory=list)

    def to_dict(self):
        return {"kind": self.kind, "config": self.config, "entries": self.entries}

    def to_json(self) -> str:
        # json.dumps would emit bare Infinity/NaN tokens (invalid JSON), so
        # non-finite floats are replaced by strings before serialization
        def clean(o):
            if isinstance(o, dict):
                return {k: clean(v) for k, v in o.items()}
            if isinstance(o, (list, tuple)):
                return [clean(v) for v in o]
            if isinstance(o, float) and not math.isfinite(o):
                return "nan" if math.isnan(o) else ("inf" if o > 0 else "-inf")
            return o

        return json.dumps(clean(self.to_dict()), sort_keys=True, indent=2,
                          allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["parameter", "scale", "ratio"])
        for e in self.entries:
            for scale, ratio in zip(e["scales"], e["ratios"]):
                writer.writerow([e["parameter"], scale, f"{ratio:.12g}"])
        return buf.getvalue()


def _norm_value(f, p, s=0.0):
    return fl_norm(f, p, s).value


def estimate_operator_norm(T: FioSpec, p, q, fam: TestFamily,
                           grid: GridSpec | None = None) -> float:
    """max over family members of fl_norm(Tf, q, 0) / fl_norm(f, p, 0).

    A lower bound on the FL^p -> FL^q operator norm (probes are a subset
    of the unit ball); never an upper bound.
    """
    if grid is None:
        grid = default_grid(T.phase.dim)
    best = 0.0
    for scale in fam.scales:
        for f in family_members(fam, grid, scale):
            denom = _norm_value(f, p)
            if denom == 0:
                continue
            best = max(best, _norm_value(apply_fio(T, f), q) / denom)
    return best


def _scale_ratio_table(op_ratio, fam, grid):
    """Per-scale max-over-members of op_ratio(member); returns (scales, ratios)."""
    ratios = []
    for scale in fam.scales:
        vals = [op_ratio(f) for f in family_members(fam, grid, scale)]
        ratios.append(max(vals))
    return list(fam.scales), ratios


def _fit_entry(parameter, scales, ratios, **extra):
    exponent, intercept, residual = fit_loglog(scales, ratios)
    entry = {
        "parameter": parameter,
        "scales": list(scales),
        "ratios": [float(r) for r in ratios],
        "exponent": exponent,
        "intercept": intercept,
        "residual": residual,
        "verdict": classify_trend(exponent, residual),
    }
    entry.update(extra)
    return entry


def threshold_scan(phase_name: str, p, m_grid, fam: TestFamily,
                   phase_params: dict | None = None,
                   grid: GridSpec | None = None, d: int = 1) -> ScanReport:
    """Growth-vs-boundedness of the phase's FIO at symbol orders m_grid.

    For each m, sigma = <k>^m and the per-scale ratio is the max member
    ratio fl_norm(Tf, p, 0)/fl_norm(f, p, 0).  m_grid must straddle the
    order threshold -kappa |1/p - 1/2| so the scan brackets the claimed
    transition.
    """
    if phase_name not in CATALOGUE:
        raise ValueError(f"unknown phase {phase_name!r}; pick from {sorted(CATALOGUE)}")
    params = dict(phase_params or {})
    phase = phase_from_descriptor({"phase": phase_name, "params": params},
                                  grid.d if grid is not None else d)
    threshold = required_order_fl(p, phase.kappa)
    m_grid = [float(m) for m in m_grid]
    if not (min(m_grid) <= threshold <= max(m_grid)):
        raise ValueError(
            f"m_grid {m_grid} must straddle the order threshold {threshold}")
    if grid is None:
        grid = default_grid(phase.dim)
    report = ScanReport("threshold", {
        "phase": phase_name,
        "phase_params": params,
        "p": "inf" if p == INF else p,
        "kappa": phase.kappa,
        "threshold": threshold,
        "family": fam.generator,
        "scales": list(fam.scales),
        "seed": fam.seed,
        "grid": {"d": grid.d, "n": grid.n},
    })
    for m in m_grid:
        T = make_fio(phase, bracket_power_symbol(m, phase.dim))

        def ratio(f, _T=T):
            return _norm_value(apply_fio(_T, f), p) / _norm_value(f, p)

        scales, ratios = _scale_ratio_table(ratio, fam, grid)
        report.entries.append(_fit_entry(f"m={m:g}", scales, ratios, m=m))
    return report


def embedding_ratio_sweep(which: str, t: IndexTuple, fam: TestFamily,
                          grid: GridSpec | None = None) -> ScanReport:
    """fl_norm(f, r, 0) / space_norm(f, p, q, s) across the family ladder.

    Bounded-trend is the expected verdict when the embedding predicate
    holds; growth-trend when it fails with the deciding inequality
    violated by a visible margin.
    """
    if which == "besov":
        space_norm, decision = besov_norm, besov_embedding_decision
    elif which == "triebel":
        space_norm, decision = triebel_norm, triebel_embedding_decision
    else:
        raise ValueError("which must be 'besov' or 'triebel'")
    holds, clause = decision(t)
    if grid is None:
        grid = default_grid(t.d)
    if grid.d != t.d:
        raise ValueError(f"grid dimension {grid.d} != tuple dimension {t.d}")
    from .lp import build_dyadic_family
    fam_lp = build_dyadic_family(grid)

    def ratio(f):
        return _norm_value(f, t.r) / space_norm(f, t.p, t.q, t.s, fam_lp).value

    scales, ratios = _scale_ratio_table(ratio, fam, grid)
    report = ScanReport("embedding", {
        "which": which,
        "tuple": t.to_dict(),
        "predicate": holds,
        "clause": clause,
        "family": fam.generator,
        "scales": list(fam.scales),
        "seed": fam.seed,
        "grid": {"d": grid.d, "n": grid.n},
    })
    report.entries.append(_fit_entry(t.label(), scales, ratios))
    return report


def regularity_scan(coefficients, grid: GridSpec, horizon: float, t: float,
                    p, alpha: float, fam: TestFamily, steps_per_unit: int = 64,
                    budget: float = 10.0) -> ScanReport:
    """Fixed-time regularity ratios of a Cauchy problem across the probe ladder.

    Each scale's datum f_0 is a family member (higher data zero); the row
    ratio is fl_norm(v(t), p, alpha) / sum_l fl_norm(f_l, p, alpha +
    alpha_p - l) straight from the solver report, maxed over members.
    """
    m = len(coefficients)
    ratios, scales = [], []
    flagged = False
    for scale in fam.scales:
        best = 0.0
        for member in family_members(fam, grid, scale):
            data = [member] + [
                GridFunction(grid, np.zeros(grid.shape, dtype=complex))
                for _ in range(m - 1)
            ]
            spec = HyperbolicProblemSpec(m, tuple(coefficients), grid, horizon,
                                         tuple(data), steps_per_unit=steps_per_unit)
            _, rep = solve_cauchy(spec, t, norms_requested=((p, alpha),))
            best = max(best, rep.norms[0]["ratio"])
        scales.append(scale)
        ratios.append(best)
        flagged = flagged or not best <= budget
    report = ScanReport("regularity", {
        "order": m,
        "t": t,
        "p": "inf" if p == INF else p,
        "alpha": alpha,
        "budget": budget,
        "family": fam.generator,
        "scales": list(fam.scales),
        "seed": fam.seed,
        "grid": {"d": grid.d, "n": grid.n},
        "steps_per_unit": steps_per_unit,
    })
    report.entries.append(_fit_entry("ratio", scales, ratios, over_budget=flagged))
    return report

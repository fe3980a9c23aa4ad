"""Symbols, complex phase functions, and their hypothesis validators.

A phase Phi(x, k) is positive-type when Im Phi >= 0, it has no critical
points away from k = 0, and it is positively homogeneous of degree 1 in
k.  The operator rank kappa and the real mixing parameter tau enter the
nondegeneracy check through det d_x d_eta (Re Phi + tau Im Phi).

Evaluators are vectorized: x and k are arrays with frequency/space
components on the last axis, mutually broadcastable; results broadcast
accordingly.
"""

from __future__ import annotations

import itertools
import math
import weakref
from dataclasses import dataclass, field

import numpy as np

from .core import bracket


class PhaseValidationError(Exception):
    """A phase failed one of the positive-type hypotheses."""


# ---------------------------------------------------------------------------
# periodic trigonometric polynomials (coefficient functions on the torus)


@dataclass(frozen=True)
class TrigPolynomial:
    """gamma(x) = const + sum over axes a, modes nu of cos/sin(2 pi nu x_a) terms.

    cos_terms / sin_terms are tuples of (axis, nu, coefficient).
    """

    const: float = 0.0
    cos_terms: tuple = ()
    sin_terms: tuple = ()

    @property
    def is_constant(self):
        return not self.cos_terms and not self.sin_terms

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape[:-1], float(self.const))
        for axis, nu, c in self.cos_terms:
            out = out + c * np.cos(2 * np.pi * nu * x[..., axis])
        for axis, nu, c in self.sin_terms:
            out = out + c * np.sin(2 * np.pi * nu * x[..., axis])
        return out

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for axis, nu, c in self.cos_terms:
            out[..., axis] += -2 * np.pi * nu * c * np.sin(2 * np.pi * nu * x[..., axis])
        for axis, nu, c in self.sin_terms:
            out[..., axis] += 2 * np.pi * nu * c * np.cos(2 * np.pi * nu * x[..., axis])
        return out

    @classmethod
    def from_descriptor(cls, desc: dict) -> "TrigPolynomial":
        unknown = set(desc) - {"const", "cos", "sin"}
        if unknown:
            raise ValueError(f"unknown trigpoly keys: {sorted(unknown)}")
        def terms(rows):
            out = []
            for row in rows:
                if len(row) == 2:       # d=1 shorthand: [nu, coeff]
                    nu, c = row
                    out.append((0, int(nu), float(c)))
                else:
                    a, nu, c = row
                    out.append((int(a), int(nu), float(c)))
            return tuple(out)
        return cls(float(desc.get("const", 0.0)), terms(desc.get("cos", [])), terms(desc.get("sin", [])))


# ---------------------------------------------------------------------------
# symbol and phase specifications


@dataclass(frozen=True, eq=False)
class SymbolSpec:
    """Amplitude sigma(x, k) with a declared order; evaluator broadcasts like the phases."""

    evaluator: object
    order: float
    dim: int = 1
    name: str = "custom"
    x_support: str = "torus"


def unit_symbol(d: int = 1) -> SymbolSpec:
    def ev(x, k):
        shape = np.broadcast_shapes(np.shape(x)[:-1], np.shape(k)[:-1])
        return np.ones(shape, dtype=complex)

    return SymbolSpec(ev, 0.0, d, "one")


def bracket_power_symbol(m: float, d: int = 1) -> SymbolSpec:
    def ev(x, k):
        vals = bracket(k) ** m + 0j
        shape = np.broadcast_shapes(np.shape(x)[:-1], np.shape(k)[:-1])
        return np.broadcast_to(vals, shape)

    return SymbolSpec(ev, float(m), d, f"<k>^{m}")


@dataclass(frozen=True, eq=False)
class PhaseSpec:
    """Complex phase Phi(x, k), homogeneous degree 1 in k, with closed-form gradients.

    kappa is the declared rank of the frequency fibration; tau the mixing
    parameter used in the nondegeneracy determinant.  mixed_hessian, when
    present, returns d_x d_eta Phi with shape (..., d, d); otherwise the
    validator falls back to centered differences of grad_eta.
    """

    name: str
    kappa: int
    dim: int
    evaluator: object
    grad_x: object
    grad_eta: object
    tau: float = 0.0
    params: dict = field(default_factory=dict)
    mixed_hessian: object = None


def _norm_k(k):
    k = np.asarray(k, dtype=float)
    return np.sqrt(np.sum(k * k, axis=-1))


def identity_phase(d: int = 1) -> PhaseSpec:
    def ev(x, k):
        return np.sum(np.asarray(x) * np.asarray(k), axis=-1) + 0j

    def gx(x, k):
        return (np.asarray(k) + 0.0 * np.asarray(x)) + 0j

    def ge(x, k):
        return (np.asarray(x) + 0.0 * np.asarray(k)) + 0j

    def hess(x, k):
        shape = np.broadcast_shapes(np.shape(x)[:-1], np.shape(k)[:-1])
        return np.broadcast_to(np.eye(d) + 0j, shape + (d, d))

    return PhaseSpec("identity", 0, d, ev, gx, ge, mixed_hessian=hess)


def torus_diffeo_phase(eps: float = 0.1) -> PhaseSpec:
    """Phi = (x + eps sin(2 pi x)) . k on the circle; needs |2 pi eps| < 1."""
    if not abs(2 * np.pi * eps) < 1:
        raise ValueError(f"|2 pi eps| must be < 1 for a diffeomorphism, got eps={eps}")

    def warp(x):
        return x + eps * np.sin(2 * np.pi * x)

    def ev(x, k):
        return np.sum(warp(np.asarray(x, float)) * np.asarray(k), axis=-1) + 0j

    def gx(x, k):
        x = np.asarray(x, float)
        return (1.0 + 2 * np.pi * eps * np.cos(2 * np.pi * x)) * np.asarray(k) + 0j

    def ge(x, k):
        return (warp(np.asarray(x, float)) + 0.0 * np.asarray(k)) + 0j

    def hess(x, k):
        x = np.asarray(x, float)
        deriv = 1.0 + 2 * np.pi * eps * np.cos(2 * np.pi * x[..., 0])
        shape = np.broadcast_shapes(np.shape(x)[:-1], np.shape(k)[:-1])
        return (np.broadcast_to(deriv, shape) + 0j)[..., None, None]

    return PhaseSpec("torus-diffeo", 1, 1, ev, gx, ge, params={"eps": eps}, mixed_hessian=hess)


def half_wave_phase(t: float, c: float = 1.0, d: int = 1) -> PhaseSpec:
    """Phi = x . k + t c |k|; the group multiplier e^{2 pi i t c |k|}."""

    def ev(x, k):
        return np.sum(np.asarray(x) * np.asarray(k), axis=-1) + t * c * _norm_k(k) + 0j

    def gx(x, k):
        return (np.asarray(k) + 0.0 * np.asarray(x)) + 0j

    def ge(x, k):
        k = np.asarray(k, float)
        return np.asarray(x) + t * c * k / _norm_k(k)[..., None] + 0j

    def hess(x, k):
        shape = np.broadcast_shapes(np.shape(x)[:-1], np.shape(k)[:-1])
        return np.broadcast_to(np.eye(d) + 0j, shape + (d, d))

    return PhaseSpec("half-wave", d, d, ev, gx, ge, params={"t": t, "c": c}, mixed_hessian=hess)


def dissipative_phase(t: float, c: float, gamma: TrigPolynomial, d: int = 1) -> PhaseSpec:
    """Phi = x . k + t (c |k| + i gamma(x) |k|) with gamma >= 0 and t >= 0."""
    if t < 0:
        raise ValueError("dissipative phase requires t >= 0")
    probe = np.linspace(0.0, 1.0, 257)[:-1]
    if d == 1:
        samples = probe[:, None]
    else:
        g1, g2 = np.meshgrid(probe[::4], probe[::4], indexing="ij")
        samples = np.stack([g1.ravel(), g2.ravel()], axis=-1)
    if gamma(samples).min() < 0:
        raise ValueError("damping profile gamma must be nonnegative on the torus")

    def ev(x, k):
        x = np.asarray(x, float)
        nk = _norm_k(k)
        return np.sum(x * np.asarray(k), axis=-1) + t * (c * nk + 1j * gamma(x) * nk)

    def gx(x, k):
        x = np.asarray(x, float)
        nk = _norm_k(k)
        return np.asarray(k) + 1j * t * nk[..., None] * gamma.gradient(x)

    def ge(x, k):
        x = np.asarray(x, float)
        k = np.asarray(k, float)
        unit = k / _norm_k(k)[..., None]
        return x + t * (c + 1j * gamma(x))[..., None] * unit

    def hess(x, k):
        x = np.asarray(x, float)
        k = np.asarray(k, float)
        unit = k / _norm_k(k)[..., None]
        grad = gamma.gradient(x)
        shape = np.broadcast_shapes(np.shape(x)[:-1], np.shape(k)[:-1])
        eye = np.broadcast_to(np.eye(d) + 0j, shape + (d, d))
        return eye + 1j * t * grad[..., :, None] * unit[..., None, :]

    return PhaseSpec(
        "dissipative", d, d, ev, gx, ge,
        params={"t": t, "c": c, "gamma": gamma}, mixed_hessian=hess,
    )


CATALOGUE = {
    "identity": identity_phase,
    "torus-diffeo": torus_diffeo_phase,
    "half-wave": half_wave_phase,
    "dissipative": dissipative_phase,
}


def phase_from_descriptor(desc: dict, d: int) -> PhaseSpec:
    """Build a catalogue phase from {"phase": id, "params": {...}}."""
    unknown = set(desc) - {"phase", "params"}
    if unknown:
        raise ValueError(f"unknown phase descriptor keys: {sorted(unknown)}")
    name = desc["phase"]
    params = dict(desc.get("params", {}))
    if name == "identity":
        return identity_phase(d)
    if name == "torus-diffeo":
        if d != 1:
            raise ValueError("torus-diffeo phase is one-dimensional")
        return torus_diffeo_phase(float(params.get("eps", 0.1)))
    if name == "half-wave":
        return half_wave_phase(float(params.get("t", 1.0)), float(params.get("c", 1.0)), d)
    if name == "dissipative":
        gamma = params.get("gamma", {"const": 1.0})
        if isinstance(gamma, dict):
            gamma = TrigPolynomial.from_descriptor(gamma)
        return dissipative_phase(float(params.get("t", 1.0)), float(params.get("c", 1.0)), gamma, d)
    raise ValueError(f"unknown phase id {name!r}; catalogue: {sorted(CATALOGUE)}")


# ---------------------------------------------------------------------------
# phase validation


@dataclass
class PhaseReport:
    passed: bool
    violations: list
    min_im: float
    max_homogeneity_residual: float
    min_joint_gradient: float
    min_eta_gradient: float
    min_nondegeneracy_det: float
    max_periodicity_defect: float
    tau: float
    samples: int

    def to_dict(self):
        return dict(self.__dict__)


def _unit_directions(d, budget, rng):
    if d == 1:
        return np.array([[1.0], [-1.0]])
    angles = rng.uniform(0.0, 2 * np.pi, size=max(8, budget // 8))
    return np.stack([np.cos(angles), np.sin(angles)], axis=-1)


def _mixed_hessian_matrix(phase, x, k, h=1e-5):
    if phase.mixed_hessian is not None:
        return np.asarray(phase.mixed_hessian(x, k))
    d = phase.dim
    cols = []
    for a in range(d):
        xp = np.array(x, float)
        xm = np.array(x, float)
        xp[..., a] += h
        xm[..., a] -= h
        cols.append((np.asarray(phase.grad_eta(xp, k)) - np.asarray(phase.grad_eta(xm, k))) / (2 * h))
    return np.stack(cols, axis=-2)   # (..., d_x, d_eta)


def validate_phase(phase: PhaseSpec, sample_budget: int = 400, seed: int = 0,
                   delta: float = 1e-6, im_tol: float = 1e-12,
                   homogeneity_tol: float = 1e-9) -> PhaseReport:
    """Sampled certification of the positive-type hypotheses.

    Checks, each reported with its measured extreme value:
      - Im Phi >= -im_tol on sampled (x, k);
      - degree-1 homogeneity: |Phi(x, l k) - l Phi(x, k)| <= tol, relative, l in {2, 4};
      - no critical points: the joint gradient |(d_x Phi, d_eta Phi)| on the
        unit frequency shell stays >= delta (|d_eta Phi| alone is reported
        for reference, but vanishes harmlessly for graph phases at x = 0);
      - nondegeneracy: |det d_x d_eta (Re Phi + tau Im Phi)| >= delta;
      - lattice periodicity: Phi(x + e_i, k) - Phi(x, k) is an integer.
    """
    if sample_budget < 100:
        raise ValueError("sample_budget must be at least 100")
    rng = np.random.default_rng(seed)
    d = phase.dim
    nx = max(32, sample_budget // 4)
    xs = rng.uniform(0.0, 1.0, size=(nx, d))
    dirs = _unit_directions(d, sample_budget, rng)

    X = xs[:, None, :]
    K = dirs[None, :, :]

    # homogeneity and imaginary part on the shell and its dilates
    vals1 = np.asarray(phase.evaluator(X, K))
    min_im = float(vals1.imag.min())
    max_rel = 0.0
    for lam in (2.0, 4.0):
        vals_l = np.asarray(phase.evaluator(X, lam * K))
        min_im = min(min_im, float(vals_l.imag.min()))
        resid = np.abs(vals_l - lam * vals1)
        scale = lam * np.maximum(np.abs(vals1), 1e-30)
        max_rel = max(max_rel, float((resid / scale).max()))

    # imaginary part on a sample of lattice frequencies as well
    radii = 2.0 ** rng.integers(0, 6, size=dirs.shape[0])
    KL = np.round(radii[:, None] * dirs)
    KL = KL[np.any(KL != 0, axis=-1)]
    vals_lat = np.asarray(phase.evaluator(X, KL[None, :, :]))
    min_im = min(min_im, float(vals_lat.imag.min()))

    # critical points on the unit shell: joint (x, eta) gradient
    gx = np.asarray(phase.grad_x(X, K))
    ge = np.asarray(phase.grad_eta(X, K))
    joint = np.sqrt(np.sum(np.abs(gx) ** 2, axis=-1) + np.sum(np.abs(ge) ** 2, axis=-1))
    eta_only = np.sqrt(np.sum(np.abs(ge) ** 2, axis=-1))
    min_joint = float(joint.min())
    min_eta = float(eta_only.min())

    # nondegeneracy determinant with the stored tau
    H = _mixed_hessian_matrix(phase, X, K)
    Htau = H.real + phase.tau * H.imag
    min_det = float(np.abs(np.linalg.det(Htau)).min())

    # periodicity: integer increments under x -> x + e_i at lattice frequencies
    max_defect = 0.0
    base = np.asarray(phase.evaluator(X, KL[None, :, :]))
    for a in range(d):
        shifted = np.array(xs)
        shifted[:, a] += 1.0
        vals_s = np.asarray(phase.evaluator(shifted[:, None, :], KL[None, :, :]))
        inc = vals_s - base
        defect = np.abs(inc - np.round(inc.real))
        norm = 1.0 + np.sqrt(np.sum(KL * KL, axis=-1))[None, :]
        max_defect = max(max_defect, float((defect / norm).max()))

    violations = []
    if min_im < -im_tol:
        violations.append(f"imaginary part: min Im Phi = {min_im:.3e} < -{im_tol}")
    if max_rel > homogeneity_tol:
        violations.append(f"homogeneity: relative residual {max_rel:.3e} > {homogeneity_tol}")
    if min_joint < delta:
        violations.append(f"critical points: min |(d_x Phi, d_eta Phi)| = {min_joint:.3e} < {delta}")
    if min_det < delta:
        violations.append(f"nondegeneracy: min |det d_x d_eta Phi_tau| = {min_det:.3e} < {delta}")
    if max_defect > 1e-9:
        violations.append(f"periodicity: lattice increment defect {max_defect:.3e} > 1e-9")

    return PhaseReport(
        passed=not violations,
        violations=violations,
        min_im=min_im,
        max_homogeneity_residual=max_rel,
        min_joint_gradient=min_joint,
        min_eta_gradient=min_eta,
        min_nondegeneracy_det=min_det,
        max_periodicity_defect=max_defect,
        tau=phase.tau,
        samples=int(xs.shape[0] * dirs.shape[0]),
    )


# weak keys: a dead phase must not leave a stale report behind for
# whatever object the allocator later places at the same address
_VALIDATION_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def ensure_valid_phase(phase: PhaseSpec, **kwargs) -> PhaseReport:
    """validate_phase with per-object memoization; raises on failure."""
    report = _VALIDATION_CACHE.get(phase)
    if report is None or kwargs:
        report = validate_phase(phase, **kwargs)
        if not kwargs:
            _VALIDATION_CACHE[phase] = report
    if not report.passed:
        raise PhaseValidationError("; ".join(report.violations))
    return report


# ---------------------------------------------------------------------------
# symbol estimate check


@dataclass
class SymbolReport:
    passed: bool
    constants: dict
    refinement_ratios: dict
    unstable: list

    def to_dict(self):
        return {
            "passed": self.passed,
            "constants": {k: v for k, v in self.constants.items()},
            "refinement_ratios": dict(self.refinement_ratios),
            "unstable": list(self.unstable),
        }


def _axis_stencil(order, h):
    if order == 0:
        return [(0.0, 1.0)]
    if order == 1:
        return [(h, 0.5 / h), (-h, -0.5 / h)]
    if order == 2:
        return [(h, 1.0 / h ** 2), (0.0, -2.0 / h ** 2), (-h, 1.0 / h ** 2)]
    if order == 3:
        w = 0.5 / h ** 3
        return [(2 * h, w), (h, -2 * w), (-h, 2 * w), (-2 * h, -w)]
    raise ValueError("finite differences implemented up to order 3")


def _multi_stencil(alpha, h):
    """Tensor-product centered stencil for the multi-index alpha: [(offset vec, weight)]."""
    per_axis = [_axis_stencil(a, h) for a in alpha]
    out = []
    for combo in itertools.product(*per_axis):
        off = np.array([c[0] for c in combo])
        w = math.prod(c[1] for c in combo)
        out.append((off, w))
    return out


def _multi_indices(d, max_order):
    out = []
    for total in range(max_order + 1):
        if d == 1:
            out.append((total,))
        else:
            for a in range(total + 1):
                out.append((a, total - a))
    return out


def _derivative_max(symbol, xs, ks, alpha, beta, hx, hk):
    """max over samples of |D^alpha_eta D^beta_x sigma| via nested centered differences."""
    total = np.zeros(np.broadcast_shapes(xs.shape[:-1], ks.shape[:-1]), dtype=complex)
    for off_k, w_k in _multi_stencil(alpha, hk):
        for off_x, w_x in _multi_stencil(beta, hx):
            total += w_k * w_x * np.asarray(symbol.evaluator(xs + off_x, ks + off_k))
    return float(np.abs(total).max())


def symbol_check(symbol: SymbolSpec, max_order: int = 2, base_radius: float = 16.0,
                 seed: int = 0) -> SymbolReport:
    """Finite-difference probe of the symbol estimates of order `symbol.order`.

    For |alpha|, |beta| <= max_order it estimates
        C_{alpha,beta} = sup |D^alpha_eta D^beta_x sigma(x, k)| <k>^{|alpha| - m}
    over sampled (x, k), then repeats with the frequency radius doubled.
    The symbol passes when every constant is finite and the refinement
    ratio stays within [0.5, 2].
    """
    if not 0 <= max_order <= 3:
        raise ValueError("max_order must lie in {0, 1, 2, 3}")
    d = symbol.dim
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0.0, 1.0, size=(8, d))
    dirs = _unit_directions(d, 128, rng)
    alphas = _multi_indices(d, max_order)
    betas = _multi_indices(d, max_order)

    def constants(radius):
        shells = []
        r = 1.0
        while r <= radius + 1e-9:
            shells.append(r)
            r *= 2
        out = {}
        for alpha in alphas:
            for beta in betas:
                best = 0.0
                for r in shells:
                    K = r * dirs
                    hk = 0.02 * max(1.0, r)
                    val = _derivative_max(symbol, xs[:, None, :], K[None, :, :], alpha, beta, 0.01, hk)
                    w = (1.0 + r * r) ** (0.5 * (sum(alpha) - symbol.order))
                    best = max(best, val * w)
                out[(alpha, beta)] = best
        return out

    coarse = constants(base_radius)
    fine = constants(2 * base_radius)
    ratios = {}
    unstable = []
    passed = True
    floor = 1e-10 * max(1.0, max(coarse.values()))
    for key in coarse:
        c0, c1 = coarse[key], fine[key]
        if not (math.isfinite(c0) and math.isfinite(c1)):
            passed = False
            unstable.append(str(key))
            continue
        if c0 <= floor and c1 <= floor:
            continue   # numerically zero derivative, nothing to compare
        ratio = c1 / max(c0, 1e-300)
        ratios[str(key)] = ratio
        if not 0.5 <= ratio <= 2.0:
            passed = False
            unstable.append(str(key))
    return SymbolReport(passed, {str(k): v for k, v in fine.items()}, ratios, unstable)

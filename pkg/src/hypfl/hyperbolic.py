"""Factorized spectral solver for higher-order hyperbolic Cauchy problems.

The operator P = D_t^m + sum_j P_j(t, x, D_x) D_t^{m-j} (D_t = -i d/dt)
is treated through its characteristic polynomial

    tau^m + sum_j p_j(t, x, k) tau^{m-j} = 0,

whose roots tau_j(t, x, k) are kept simple and nearly-real (Im >= 0) by
hypothesis.  Writing L_j = D_t - tau_j(t, x, D_x), each first-order
factor is propagated by frozen-coefficient exponential steps, data are
distributed over the factors by the Vandermonde map M_{l,j} = (i tau_j)^l,
and v(t) = sum_j U^{(j)}(t) g_j.  For x-independent autonomous
coefficients this is exact per mode: v_hat(t, k) = sum_j e^{i t tau_j} g_j.

The k = 0 mode is excised (the characteristic polynomial degenerates to
tau^m) and carried as g_1 = fhat_0(0) frozen in time, with a report flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (GridFunction, GridSpec, SpectralFunction, forward_transform,
                   inverse_transform)
from .phases import TrigPolynomial
from .spaces import INF, fl_norm

DELTA_GAP = 1e-3
IM_TOL = 1e-9


class RootCollision(Exception):
    """Characteristic roots closer than the simplicity threshold."""


class NegativeImaginary(Exception):
    """A characteristic root with imaginary part below -IM_TOL."""


class UnsupportedProblem(Exception):
    """Problem shape outside the factorized solver's scope."""


# ---------------------------------------------------------------------------
# coefficients and problem specification


@dataclass(frozen=True, eq=False)
class CoefficientSymbol:
    """p_j(t, x, k): homogeneous of degree j in k; x is None when x_dependent is False."""

    degree: int
    evaluator: object
    x_dependent: bool = False
    t_dependent: bool = False
    name: str = "custom"


def constant_coefficient(degree: int, value: complex) -> CoefficientSymbol:
    """p_j(t, x, k) = value * |k|^degree."""
    value = complex(value)

    def ev(t, x, k):
        k = np.asarray(k, dtype=float)
        return value * np.sqrt(np.sum(k * k, axis=-1)) ** degree

    return CoefficientSymbol(degree, ev, False, False, f"{value}*|k|^{degree}")


def trigpoly_coefficient(degree: int, real_profile: TrigPolynomial,
                         imag_profile: TrigPolynomial | None = None,
                         scale: complex = 1.0) -> CoefficientSymbol:
    """p_j(t, x, k) = scale * (re(x) + i im(x)) * |k|^degree."""
    scale = complex(scale)
    constant = real_profile.is_constant and (imag_profile is None or imag_profile.is_constant)

    def ev(t, x, k):
        k = np.asarray(k, dtype=float)
        radial = np.sqrt(np.sum(k * k, axis=-1)) ** degree
        if constant:
            amp = complex(real_profile.const)
            if imag_profile is not None:
                amp += 1j * imag_profile.const
            return scale * amp * radial
        if x is None:
            raise ValueError("x-dependent coefficient evaluated without x")
        amp = real_profile(x).astype(complex)
        if imag_profile is not None:
            amp = amp + 1j * imag_profile(x)
        return scale * amp * radial

    return CoefficientSymbol(degree, ev, not constant, False, "trigpoly")


def _complex_entry(value, where):
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"{where}: expected a number or a [re, im] pair")


def coefficient_from_descriptor(desc: dict) -> CoefficientSymbol:
    """Build p_j from a JSON-style descriptor: {"j", "kind": "const"|"trigpoly", "data"}.

    const data: {"value": number | [re, im]} giving p_j = value * |k|^j.
    trigpoly data: {"re": trig descriptor, "im": trig descriptor (optional),
    "scale": number | [re, im] (optional)} giving
    p_j = scale * (re(x) + i im(x)) * |k|^j.
    """
    extra = set(desc) - {"j", "kind", "data"}
    if extra:
        raise ValueError(f"unknown coefficient keys: {sorted(extra)}")
    try:
        j = int(desc["j"])
        kind = desc["kind"]
        data = desc["data"]
    except KeyError as exc:
        raise ValueError(f"coefficient descriptor missing {exc}") from None
    if kind == "const":
        extra = set(data) - {"value"}
        if extra:
            raise ValueError(f"unknown const-coefficient keys: {sorted(extra)}")
        return constant_coefficient(j, _complex_entry(data["value"], "value"))
    if kind == "trigpoly":
        extra = set(data) - {"re", "im", "scale"}
        if extra:
            raise ValueError(f"unknown trigpoly-coefficient keys: {sorted(extra)}")
        if "re" not in data:
            raise ValueError("trigpoly coefficient needs an 're' profile")
        re_prof = TrigPolynomial.from_descriptor(data["re"])
        im_prof = TrigPolynomial.from_descriptor(data["im"]) if "im" in data else None
        scale = _complex_entry(data.get("scale", 1.0), "scale")
        return trigpoly_coefficient(j, re_prof, im_prof, scale)
    raise ValueError(f"unknown coefficient kind {kind!r}")


@dataclass(frozen=True, eq=False)
class HyperbolicProblemSpec:
    """Order m problem: coefficients p_1..p_m, grid, horizon, Cauchy data f_0..f_{m-1}."""

    order: int
    coefficients: tuple
    grid: GridSpec
    horizon: float
    data: tuple
    steps_per_unit: int = 64
    delta_gap: float = DELTA_GAP
    im_tol: float = IM_TOL

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        coeffs = tuple(self.coefficients)
        if len(coeffs) != self.order:
            raise ValueError(f"need {self.order} coefficients p_1..p_m, got {len(coeffs)}")
        for j, c in enumerate(coeffs, start=1):
            if c.degree != j:
                raise ValueError(f"coefficient {j} declares degree {c.degree}")
        data = tuple(self.data)
        if len(data) != self.order:
            raise ValueError(f"need {self.order} data fields f_0..f_{self.order - 1}")
        for f in data:
            if f.grid != self.grid:
                raise ValueError("data grid does not match the problem grid")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.steps_per_unit < 1:
            raise ValueError("steps_per_unit must be >= 1")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "data", data)

    @property
    def x_dependent(self):
        return any(c.x_dependent for c in self.coefficients)

    @property
    def t_dependent(self):
        return any(c.t_dependent for c in self.coefficients)


# ---------------------------------------------------------------------------
# characteristic roots


def _sort_lex(roots):
    roots = np.asarray(roots, dtype=complex)
    order = np.lexsort((roots.imag, roots.real))
    return roots[order]


def characteristic_roots(spec: HyperbolicProblemSpec, t: float, x, k):
    """Simple roots of tau^m + sum p_j tau^{m-j} at one (t, x, k), sorted by (Re, Im).

    Roots come from the companion-matrix eigenvalues of the monic
    polynomial.  Raises RootCollision when the pairwise gap drops under
    delta_gap * max(1, |k|), NegativeImaginary when Im tau < -im_tol.
    """
    k = np.asarray(k, dtype=float).reshape(-1)
    if k.shape != (spec.grid.d,):
        raise ValueError(f"k must have {spec.grid.d} components")
    nk = float(np.sqrt(np.sum(k * k)))
    if nk == 0.0:
        raise ValueError("k = 0 is excised (characteristic polynomial degenerates)")
    if x is not None:
        x = np.asarray(x, dtype=float).reshape(-1)
    poly = [1.0 + 0j]
    for c in spec.coefficients:
        poly.append(complex(np.asarray(c.evaluator(t, x, k)).reshape(())))
    roots = _sort_lex(np.roots(poly)) if spec.order > 1 else np.array([-poly[1]])
    _check_roots(roots[:, None], np.array([nk]), spec.delta_gap, spec.im_tol,
                 context=f"t={t}, k={k.tolist()}")
    return roots


def _check_roots(roots, radii, delta_gap, im_tol, context=""):
    """roots: (m, N); radii: (N,).  Enforces gap and sign hypotheses.

    The gap check runs first: a numerically split multiple root scatters
    into a tight cluster (often a conjugate pair with stray negative
    imaginary parts), and that situation must surface as RootCollision,
    not as a sign violation.
    """
    m = roots.shape[0]
    min_margin = math.inf
    if m > 1:
        thresh = delta_gap * np.maximum(1.0, radii)
        for a in range(m):
            for b in range(a + 1, m):
                gaps = np.abs(roots[a] - roots[b])
                margin = float((gaps / thresh).min())
                min_margin = min(min_margin, margin)
                if margin < 1.0:
                    idx = int(np.argmin(gaps / thresh))
                    raise RootCollision(
                        f"roots {a + 1} and {b + 1} separated by {gaps[idx]:.3e} "
                        f"< {thresh[idx]:.3e} ({context})")
    min_im = float(roots.imag.min())
    if min_im < -im_tol:
        raise NegativeImaginary(
            f"characteristic root with Im = {min_im:.3e} < -{im_tol} ({context})")
    return min_margin, min_im


def _roots_on_modes(spec, t, K):
    """Lex-sorted roots for every row of K (nonzero modes), shape (m, N)."""
    N = K.shape[0]
    m = spec.order
    vals = [np.asarray(c.evaluator(t, None, K), dtype=complex).reshape(N)
            for c in spec.coefficients]
    if m == 1:
        return -vals[0][None, :]
    out = np.empty((m, N), dtype=complex)
    for i in range(N):
        poly = [1.0 + 0j] + [v[i] for v in vals]
        out[:, i] = _sort_lex(np.roots(poly))
    return out


# ---------------------------------------------------------------------------
# first-order propagation


def first_order_propagate(tau, f: GridFunction, t0: float, t1: float, steps: int,
                          x_dependent: bool = False) -> GridFunction:
    """Evolve D_t v = tau(t, x, D_x) v from t0 to t1 with frozen-coefficient steps.

    Each substep [a, b] freezes tau at the midpoint.  When tau does not
    depend on x the substep is the exact diagonal multiplier
    vhat(b, k) = e^{i (b-a) tau(mid, k)} vhat(a, k); otherwise it applies
    the one-step complex-phase quadrature with kernel
    e^{2 pi i x.k + i (b-a) tau(mid, x, k)} (the oscillatory-integral
    phase x.k + (b-a) tau / 2 pi).  Exact for x-independent autonomous
    tau, first-order accurate in the step otherwise.
    """
    v, _ = _propagate_with_diagnostics(tau, f, t0, t1, steps, x_dependent)
    return v


def _propagate_with_diagnostics(tau, f, t0, t1, steps, x_dependent):
    if t1 < t0:
        raise ValueError(f"backward evolution not supported (t1 = {t1} < t0 = {t0})")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    grid = f.grid
    K = grid.frequencies()
    radii = np.sqrt(np.sum(K * K, axis=-1))
    nz = radii > 0.0
    coeffs = forward_transform(f).coeffs.ravel().copy()
    max_growth = 0.0
    if t1 == t0:
        return GridFunction(grid, f.values), 1.0

    edges = np.linspace(t0, t1, steps + 1)
    if not x_dependent:
        for a, b in zip(edges[:-1], edges[1:]):
            mid = 0.5 * (a + b)
            taus = np.zeros(K.shape[0], dtype=complex)
            taus[nz] = np.asarray(tau(mid, None, K[nz]), dtype=complex).reshape(-1)
            before = np.linalg.norm(coeffs)
            coeffs = coeffs * np.exp(1j * (b - a) * taus)
            after = np.linalg.norm(coeffs)
            if before > 0:
                max_growth = max(max_growth, after / before)
        return inverse_transform(SpectralFunction(grid, coeffs.reshape(grid.shape))), max_growth

    X = grid.points()
    N = X.shape[0]
    Ksafe = np.array(K)
    Ksafe[~nz] = 0.0
    Ksafe[~nz, 0] = 1.0
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        out = np.empty(N, dtype=complex)
        chunk = max(1, (1 << 22) // max(1, N))
        for lo in range(0, N, chunk):
            hi = min(N, lo + chunk)
            Xc = X[lo:hi, None, :]
            taus = np.asarray(tau(mid, Xc, Ksafe[None, :, :]), dtype=complex)
            taus = np.broadcast_to(taus, (hi - lo, N)).copy()
            taus[:, ~nz] = 0.0
            E = np.exp(2j * np.pi * (Xc * Ksafe[None, :, :]).sum(-1) + 1j * (b - a) * taus)
            out[lo:hi] = E @ coeffs
        before = np.linalg.norm(coeffs)
        stepped = GridFunction(grid, out.reshape(grid.shape))
        coeffs = forward_transform(stepped).coeffs.ravel().copy()
        after = np.linalg.norm(coeffs)
        if before > 0:
            max_growth = max(max_growth, after / before)
    return inverse_transform(SpectralFunction(grid, coeffs.reshape(grid.shape))), max_growth


# ---------------------------------------------------------------------------
# Vandermonde data map


def _bp_dual(alpha, b):
    """Solve sum_j alpha_j^l g_j = b_l (l = 0..m-1), Bjorck-Pereyra style.

    alpha, b: arrays of shape (m, ...); vectorized over trailing axes.
    """
    a = np.asarray(alpha, dtype=complex)
    f = np.array(b, dtype=complex)
    m = a.shape[0]
    for k in range(m - 1):
        for i in range(m - 1, k, -1):
            f[i] = f[i] - a[k] * f[i - 1]
    for k in range(m - 2, -1, -1):
        for i in range(k + 1, m):
            f[i] = f[i] / (a[i] - a[i - k - 1])
        for i in range(k, m - 1):
            f[i] = f[i] - f[i + 1]
    return f


def vandermonde_data_map(roots, data_hat, k=None, delta_gap: float = DELTA_GAP):
    """Distribute spectral Cauchy data over the factors: solve M g = f.

    M_{l,j} = (i tau_j)^l, det M = prod_{j<l} (i tau_l - i tau_j); the
    system is solved by the standard Vandermonde elimination rather than
    a generic dense solve.  roots/data_hat: shape (m,) or (m, N).
    Raises RootCollision when the roots are not simple at the threshold
    delta_gap * max(1, |k|) (|k| = 1 when k is not given).
    """
    roots = np.asarray(roots, dtype=complex)
    data_hat = np.asarray(data_hat, dtype=complex)
    if roots.shape != data_hat.shape:
        raise ValueError("roots and data_hat must have matching shapes")
    flat = roots.reshape(roots.shape[0], -1)
    if k is not None:
        nk = float(np.sqrt(np.sum(np.asarray(k, dtype=float) ** 2)))
    else:
        nk = 1.0
    _check_roots(flat, np.full(flat.shape[1], nk), delta_gap, math.inf)
    return _bp_dual(1j * roots, data_hat)


# ---------------------------------------------------------------------------
# the Cauchy solver


@dataclass
class SolveReport:
    time: float
    steps: int
    norms: list
    alpha_convention: str
    growth_factors: list
    min_root_gap_margin: float
    min_root_im: float
    excised_modes: int
    messages: list = field(default_factory=list)

    def to_dict(self):
        return {
            "time": self.time,
            "steps": self.steps,
            "norms": list(self.norms),
            "alpha_convention": self.alpha_convention,
            "growth_factors": list(self.growth_factors),
            "min_root_gap_margin": self.min_root_gap_margin,
            "min_root_im": self.min_root_im,
            "excised_modes": self.excised_modes,
            "messages": list(self.messages),
        }


def _alpha_p(p, d, kappa=None):
    factor = d if kappa is None else kappa
    half = abs((0.0 if p == INF else 1.0 / p) - 0.5)
    return factor * half


def _certify(spec, times):
    """Root hypotheses on sampled times over the whole lattice; returns (margin, min_im)."""
    grid = spec.grid
    K = grid.frequencies()
    radii = np.sqrt(np.sum(K * K, axis=-1))
    nz = radii > 0.0
    Knz = K[nz]
    min_margin, min_im = math.inf, math.inf
    if not spec.x_dependent:
        for t in times:
            roots = _roots_on_modes(spec, t, Knz)
            margin, mim = _check_roots(roots, radii[nz], spec.delta_gap, spec.im_tol,
                                       context=f"t={t}")
            min_margin = min(min_margin, margin)
            min_im = min(min_im, mim)
        return min_margin, min_im
    if spec.order != 1:
        raise UnsupportedProblem(
            "x-dependent coefficients are supported for first-order problems only "
            "(the Vandermonde data map is frequency-diagonal)")
    X = grid.points()[:: max(1, grid.npoints // 64)]
    for t in times:
        taus = -np.asarray(spec.coefficients[0].evaluator(t, X[:, None, :], Knz[None, :, :]),
                           dtype=complex)
        mim = float(taus.imag.min())
        if mim < -spec.im_tol:
            raise NegativeImaginary(
                f"characteristic root with Im = {mim:.3e} < -{spec.im_tol} (t={t})")
        min_im = min(min_im, mim)
    return min_margin, min_im


def _homogeneity_check(spec):
    """Sampled degree-j homogeneity of the coefficient symbols away from k = 0."""
    d = spec.grid.d
    k0 = np.ones((1, d))
    x = None
    if spec.x_dependent:
        x = np.full((1, d), 0.3)
    for j, c in enumerate(spec.coefficients, start=1):
        base = np.asarray(c.evaluator(0.0, x, k0), dtype=complex)
        for lam in (2.0, 4.0):
            val = np.asarray(c.evaluator(0.0, x, lam * k0), dtype=complex)
            resid = np.abs(val - lam ** j * base).max()
            if resid > 1e-9 * max(1.0, float(np.abs(val).max())):
                raise ValueError(f"coefficient p_{j} is not homogeneous of degree {j}")


def solve_cauchy(spec: HyperbolicProblemSpec, t: float, norms_requested=((2.0, 0.0),),
                 alpha_convention: str = "d", kappa: int | None = None):
    """Solve the Cauchy problem at time t; returns (v(t), SolveReport).

    norms_requested is a sequence of (p, alpha) pairs, each reported as
    fl_norm(v(t), p, alpha) next to the data norms fl_norm(f_l, p,
    alpha + alpha_p - l).  The loss threshold alpha_p defaults to the
    d |1/p - 1/2| convention; passing kappa (with alpha_convention
    "kappa") switches to kappa |1/p - 1/2|.
    """
    if not 0.0 <= t <= spec.horizon:
        raise ValueError(f"t must lie in [0, {spec.horizon}], got {t}")
    for p, _ in norms_requested:
        if p != INF and p < 1:
            raise ValueError(f"norm requests need p in [1, inf], got p={p}")
    if alpha_convention not in ("d", "kappa"):
        raise ValueError("alpha_convention must be 'd' or 'kappa'")
    if alpha_convention == "kappa" and kappa is None:
        raise ValueError("alpha_convention 'kappa' needs an explicit kappa")
    _homogeneity_check(spec)

    grid = spec.grid
    m = spec.order
    cert_times = [0.0, t] if not spec.t_dependent else list(np.linspace(0.0, max(t, 1e-12), 5))
    margin, min_im = _certify(spec, cert_times)

    K = grid.frequencies()
    radii = np.sqrt(np.sum(K * K, axis=-1))
    nz = radii > 0.0
    data_hat = np.stack([forward_transform(f).coeffs.ravel() for f in spec.data])

    messages = []
    excised = int(np.count_nonzero(~nz))
    if m > 1 and np.abs(data_hat[1:, ~nz]).max(initial=0.0) > 0:
        messages.append("excised modes: higher data ignored at k = 0 (g_1 = fhat_0, g_j>1 = 0)")

    steps = max(1, math.ceil(spec.steps_per_unit * max(t, 0.0)))
    growth = []

    if not spec.x_dependent:
        roots0 = _roots_on_modes(spec, 0.0, K[nz])
        g = np.zeros((m, K.shape[0]), dtype=complex)
        g[:, nz] = vandermonde_data_map(roots0, data_hat[:, nz], delta_gap=spec.delta_gap) \
            if m > 1 else data_hat[:, nz]
        g[0, ~nz] = data_hat[0, ~nz]
        vhat = np.zeros(K.shape[0], dtype=complex)
        if not spec.t_dependent:
            for j in range(m):
                phase = np.exp(1j * t * roots0[j])
                vj = np.zeros_like(vhat)
                vj[nz] = phase * g[j, nz]
                vj[~nz] = g[j, ~nz]
                base = np.linalg.norm(g[j])
                growth.append(float(np.linalg.norm(vj) / base) if base > 0 else 1.0)
                vhat += vj
        else:
            for j in range(m):
                def tau_j(tt, xx, kk, _j=j):
                    return _roots_on_modes(spec, tt, kk)[_j]

                gj = inverse_transform(SpectralFunction(grid, g[j].reshape(grid.shape)))
                vj, gr = _propagate_with_diagnostics(tau_j, gj, 0.0, t, steps, False)
                growth.append(gr)
                vhat += forward_transform(vj).coeffs.ravel()
        v = inverse_transform(SpectralFunction(grid, vhat.reshape(grid.shape)))
    else:
        coeff = spec.coefficients[0]

        def tau(tt, xx, kk):
            return -np.asarray(coeff.evaluator(tt, xx, kk), dtype=complex)

        f0 = spec.data[0]
        v, gr = _propagate_with_diagnostics(tau, f0, 0.0, t, steps, True)
        growth.append(gr)

    entries = []
    for p, alpha in norms_requested:
        ap = _alpha_p(p, grid.d, kappa if alpha_convention == "kappa" else None)
        value = fl_norm(v, p, alpha).value
        dnorms = [fl_norm(spec.data[l], p, alpha + ap - l).value for l in range(m)]
        denom = sum(dnorms)
        entries.append({
            "p": "inf" if p == INF else p,
            "alpha": alpha,
            "alpha_p": ap,
            "value": value,
            "data_norms": dnorms,
            "ratio": value / denom if denom > 0 else math.inf,
        })

    report = SolveReport(
        time=t,
        steps=steps,
        norms=entries,
        alpha_convention=alpha_convention,
        growth_factors=growth,
        min_root_gap_margin=margin if margin != math.inf else -1.0,
        min_root_im=min_im,
        excised_modes=excised,
        messages=messages,
    )
    return v, report


# ---------------------------------------------------------------------------
# regularity bookkeeping


@dataclass
class RegularityReport:
    variant: str
    ratio: float
    numerator: float
    denominator_terms: list
    alpha_threshold: float
    eps_margin: float
    budget: float
    flagged: bool

    def to_dict(self):
        return dict(self.__dict__)


def regularity_report(v: GridFunction, data, p: float, alpha: float,
                      variant: str = "pp", q: float | None = None,
                      kappa: int | None = None, eps_margin: float = 1e-2,
                      budget: float = 10.0) -> RegularityReport:
    """Loss-of-regularity ratio for a computed solution against its data.

    pp: fl_norm(v, p, alpha) / sum_l fl_norm(f_l, p, alpha + alpha_p - l)
        with alpha_p = d |1/p - 1/2| (or kappa |1/p - 1/2| when kappa given);
    pq: numerator at exponent q, data at p, with
        alpha_pq = d |1/q - 1/2| + d (1/q - 1/p) + eps_margin, 1 <= q < p.
    """
    if p != INF and p < 1:
        raise ValueError(f"the comparison needs p in [1, inf], got {p}")
    d = v.grid.d
    if variant == "pp":
        ap = _alpha_p(p, d, kappa)
        num_p = p
    elif variant == "pq":
        if q is None:
            raise ValueError("variant 'pq' needs q")
        if q < 1 or not (p == INF or q < p):
            raise ValueError(f"variant 'pq' needs 1 <= q < p, got q={q}, p={p}")
        rq = 0.0 if q == INF else 1.0 / q
        rp = 0.0 if p == INF else 1.0 / p
        ap = d * abs(rq - 0.5) + d * (rq - rp) + eps_margin
        num_p = q
    else:
        raise ValueError("variant must be 'pp' or 'pq'")
    numerator = fl_norm(v, num_p, alpha).value
    terms = [fl_norm(f, p, alpha + ap - l).value for l, f in enumerate(data)]
    denom = sum(terms)
    ratio = numerator / denom if denom > 0 else math.inf
    return RegularityReport(variant, ratio, numerator, terms, ap, eps_margin, budget,
                            flagged=not ratio <= budget)

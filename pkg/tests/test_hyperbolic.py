import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from hypfl import (CoefficientSymbol, GridFunction, GridSpec,
                   HyperbolicProblemSpec, NegativeImaginary, RootCollision,
                   SpectralFunction, TrigPolynomial, UnsupportedProblem,
                   apply_multiplier, characteristic_roots,
                   coefficient_from_descriptor, constant_coefficient,
                   first_order_propagate, fl_norm, forward_transform,
                   inverse_transform, regularity_report, solve_cauchy,
                   trigpoly_coefficient, vandermonde_data_map)

INF = math.inf
TWO_PI_SQ = 4.0 * math.pi ** 2


def grid_1d(n=64):
    return GridSpec(1, n)


def zero_field(grid):
    return GridFunction(grid, np.zeros(grid.shape, dtype=complex))


def band_limited(grid, seed, kmax=8):
    rng = np.random.default_rng(seed)
    coeffs = np.zeros(grid.shape, dtype=complex)
    radii = grid.frequency_radii()
    mask = radii <= kmax
    coeffs[mask] = rng.normal(size=int(mask.sum())) + 1j * rng.normal(size=int(mask.sum()))
    return inverse_transform(SpectralFunction(grid, coeffs))


def wave_spec(grid, f0, f1, speed_sq=1.0, horizon=1.0):
    # tau^2 - speed_sq |k|^2 = 0: roots +-sqrt(speed_sq)|k|
    return HyperbolicProblemSpec(
        order=2,
        coefficients=(constant_coefficient(1, 0.0), constant_coefficient(2, -speed_sq)),
        grid=grid,
        horizon=horizon,
        data=(f0, f1),
    )


# ---------------------------------------------------------------------------
# characteristic roots


def test_wave_roots():
    g = grid_1d()
    spec = wave_spec(g, zero_field(g), zero_field(g))
    roots = characteristic_roots(spec, 0.0, None, [3.0])
    assert np.allclose(roots, [-3.0, 3.0], atol=1e-12)


def test_first_order_root():
    g = grid_1d()
    spec = HyperbolicProblemSpec(1, (constant_coefficient(1, -2.0),), g, 1.0, (zero_field(g),))
    roots = characteristic_roots(spec, 0.0, None, [5.0])
    assert np.allclose(roots, [10.0])


def test_double_root_collides():
    g = grid_1d()
    spec = HyperbolicProblemSpec(
        2, (constant_coefficient(1, -2.0), constant_coefficient(2, 1.0)),
        g, 1.0, (zero_field(g), zero_field(g)))
    with pytest.raises(RootCollision, match="separated by"):
        characteristic_roots(spec, 0.0, None, [4.0])


def test_negative_imaginary_root_rejected():
    g = grid_1d()
    spec = HyperbolicProblemSpec(1, (constant_coefficient(1, 0.1j),), g, 1.0, (zero_field(g),))
    with pytest.raises(NegativeImaginary, match="Im"):
        characteristic_roots(spec, 0.0, None, [2.0])


def test_roots_reject_k_zero():
    g = grid_1d()
    spec = wave_spec(g, zero_field(g), zero_field(g))
    with pytest.raises(ValueError, match="excised"):
        characteristic_roots(spec, 0.0, None, [0.0])


# ---------------------------------------------------------------------------
# first-order propagation


def test_propagate_single_mode_phase():
    g = grid_1d()
    x = g.axis_points()
    f = GridFunction(g, np.exp(2j * np.pi * 3 * x))

    def tau(t, xx, k):
        return np.sqrt(np.sum(np.asarray(k, float) ** 2, axis=-1))

    out = first_order_propagate(tau, f, 0.0, 0.7, 16)
    assert np.abs(out.values - np.exp(0.7j * 3) * f.values).max() < 1e-12


def test_propagate_decay_and_identity():
    g = grid_1d()
    f = band_limited(g, 3)

    def tau(t, xx, k):
        return 1j * np.sqrt(np.sum(np.asarray(k, float) ** 2, axis=-1))

    out = first_order_propagate(tau, f, 0.0, 0.5, 8)
    # mode-wise decay e^{-t|k|}
    Fin = forward_transform(f).coeffs.ravel()
    Fout = forward_transform(out).coeffs.ravel()
    radii = g.frequency_radii().ravel()
    assert np.abs(Fout - np.exp(-0.5 * radii) * Fin).max() < 1e-12

    same = first_order_propagate(tau, f, 0.3, 0.3, 5)
    assert np.abs(same.values - f.values).max() == 0.0
    with pytest.raises(ValueError, match="backward"):
        first_order_propagate(tau, f, 0.5, 0.2, 4)
    with pytest.raises(ValueError, match="steps"):
        first_order_propagate(tau, f, 0.0, 0.5, 0)


# ---------------------------------------------------------------------------
# the Vandermonde data map


def test_dual_solve_matches_dense_solve():
    rng = np.random.default_rng(0)
    m = 4
    alpha = rng.normal(size=m) + 1j * rng.normal(size=m)
    b = rng.normal(size=m) + 1j * rng.normal(size=m)
    V = np.vander(alpha, m, increasing=True).T   # V[l, j] = alpha_j^l
    dense = np.linalg.solve(V, b)
    from hypfl.hyperbolic import _bp_dual
    assert np.abs(_bp_dual(alpha, b) - dense).max() < 1e-10


def test_vandermonde_wave_closed_form():
    k = 5.0
    roots = np.array([-k, k], dtype=complex)
    f0, f1 = 0.8 - 0.2j, 0.1 + 0.4j
    g = vandermonde_data_map(roots, np.array([f0, f1]), k=[k])
    g_minus = 0.5 * (f0 - f1 / (1j * k))
    g_plus = 0.5 * (f0 + f1 / (1j * k))
    assert abs(g[0] - g_minus) < 1e-12
    assert abs(g[1] - g_plus) < 1e-12


def test_vandermonde_round_trip_orders_1_2_3():
    rng = np.random.default_rng(1)
    N = 63
    for m in (1, 2, 3):
        scale = 1.0 + rng.uniform(0.0, 1.0, size=N)
        roots = np.stack([(j + 1.0 + 0.4j * j) * scale for j in range(m)])
        data = rng.normal(size=(m, N)) + 1j * rng.normal(size=(m, N))
        g = vandermonde_data_map(roots, data)
        recon = np.stack([np.sum((1j * roots) ** l * g, axis=0) for l in range(m)])
        err = np.abs(recon - data).max()
        print(f"m={m}: data-map round trip err {err:.2e}")
        assert err < 1e-9


def test_vandermonde_rejects_collisions_and_shape():
    roots = np.array([1.0, 1.0 + 1e-9], dtype=complex)
    with pytest.raises(RootCollision):
        vandermonde_data_map(roots, np.array([1.0, 0.0], dtype=complex))
    with pytest.raises(ValueError, match="matching"):
        vandermonde_data_map(np.array([1.0, 2.0]), np.array([1.0, 2.0, 3.0]))


# ---------------------------------------------------------------------------
# solve_cauchy


def test_wave_closed_form():
    g = grid_1d()
    x = g.axis_points()
    f0 = GridFunction(g, np.cos(2 * np.pi * x) + 0j)
    spec = wave_spec(g, f0, zero_field(g), speed_sq=TWO_PI_SQ)
    t = 0.25
    v, report = solve_cauchy(spec, t)
    exact = np.cos(2 * np.pi * x) * np.cos(2 * np.pi * t)
    err = np.abs(v.values - exact).max()
    print(f"wave closed form: max err {err:.2e}")
    assert err < 1e-9
    assert report.steps >= 1
    for gr in report.growth_factors:
        assert abs(gr - 1.0) < 1e-12   # unitary modal phases
    assert report.min_root_im >= -1e-12


def test_solve_at_t_zero_returns_data():
    g = grid_1d()
    f0, f1 = band_limited(g, 10), band_limited(g, 11)
    spec = wave_spec(g, f0, f1)
    v, report = solve_cauchy(spec, 0.0)
    assert np.abs(v.values - f0.values).max() < 1e-12
    assert report.time == 0.0


def test_third_order_against_ode_oracle():
    """Mode-by-mode comparison with an adaptive ODE integration of the companion system."""
    g = GridSpec(1, 32)
    # roots tau_1 = -2|k|, tau_2 = (1+i)|k|, tau_3 = 3i|k|
    p1 = constant_coefficient(1, 1.0 - 4.0j)
    p2 = constant_coefficient(2, -5.0 - 5.0j)
    p3 = constant_coefficient(3, -6.0 + 6.0j)
    data = tuple(band_limited(g, 20 + i, kmax=6) for i in range(3))
    spec = HyperbolicProblemSpec(3, (p1, p2, p3), g, 1.0, data, steps_per_unit=32)
    t = 0.4
    v, _ = solve_cauchy(spec, t)

    radii = g.frequency_radii().ravel()
    nz = radii > 0
    dhat = np.stack([forward_transform(f).coeffs.ravel() for f in data])

    # v''' = c2 v'' + c1 v' + c0 v with mu_j = i tau_j
    mus = np.stack([1j * (-2.0) * radii[nz],
                    1j * (1.0 + 1.0j) * radii[nz],
                    1j * (3.0j) * radii[nz]])
    c2 = mus.sum(axis=0)
    c1 = -(mus[0] * mus[1] + mus[0] * mus[2] + mus[1] * mus[2])
    c0 = mus[0] * mus[1] * mus[2]

    def rhs(tt, y):
        y = y.reshape(3, -1)
        return np.concatenate([y[1], y[2], c2 * y[2] + c1 * y[1] + c0 * y[0]])

    y0 = np.concatenate([dhat[0, nz], dhat[1, nz], dhat[2, nz]])
    sol = solve_ivp(rhs, (0.0, t), y0, method="DOP853", rtol=1e-12, atol=1e-12)
    oracle = sol.y[: nz.sum(), -1]

    vhat = forward_transform(v).coeffs.ravel()
    err = np.abs(vhat[nz] - oracle).max()
    print(f"order-3 ODE oracle: max modal err {err:.2e}")
    assert err < 1e-8
    # zero mode carries f_0hat(0) unchanged
    assert abs(vhat[~nz][0] - dhat[0, ~nz][0]) < 1e-12


def test_wave_energy_conserved_per_mode():
    g = grid_1d(128)
    f0, f1 = band_limited(g, 30, kmax=16), band_limited(g, 31, kmax=16)
    spec = wave_spec(g, f0, f1)
    t = 0.37
    v, _ = solve_cauchy(spec, t)
    # time derivative solves the same equation with shifted data (f_1, -|k|^2 f_0)
    lap = -(g.frequency_radii() ** 2)
    dspec = wave_spec(g, f1, apply_multiplier(f0, lap))
    w, _ = solve_cauchy(dspec, t)

    radii = g.frequency_radii().ravel()
    nz = radii > 0
    vh = forward_transform(v).coeffs.ravel()[nz]
    wh = forward_transform(w).coeffs.ravel()[nz]
    f0h = forward_transform(f0).coeffs.ravel()[nz]
    f1h = forward_transform(f1).coeffs.ravel()[nz]
    r = radii[nz]
    e_t = np.abs(vh) ** 2 + np.abs(wh) ** 2 / r ** 2
    e_0 = np.abs(f0h) ** 2 + np.abs(f1h) ** 2 / r ** 2
    err = np.abs(e_t - e_0).max() / max(e_0.max(), 1e-30)
    print(f"per-mode wave energy drift: {err:.2e}")
    assert err < 1e-9


def test_dissipative_norms_non_increasing():
    g = grid_1d()
    f0 = band_limited(g, 40)
    spec = HyperbolicProblemSpec(
        1, (constant_coefficient(1, -1.0 - 0.5j),), g, 1.0, (f0,))
    times = np.linspace(0.0, 1.0, 10)
    for p in (1.0, 2.0, INF):
        prev = math.inf
        for t in times:
            v, _ = solve_cauchy(spec, float(t))
            val = fl_norm(v, p, 0.0).value
            assert val <= prev + 1e-12
            prev = val


def test_semigroup_property():
    g = grid_1d()
    f0 = band_limited(g, 41)
    coeff = (constant_coefficient(1, -1.0 - 0.5j),)
    spec = HyperbolicProblemSpec(1, coeff, g, 1.0, (f0,))
    s, t = 0.3, 0.45
    v_s, _ = solve_cauchy(spec, s)
    spec2 = HyperbolicProblemSpec(1, coeff, g, 1.0, (v_s,))
    v_st, _ = solve_cauchy(spec2, t)
    v_direct, _ = solve_cauchy(spec, s + t)
    assert np.abs(v_st.values - v_direct.values).max() < 1e-8


def test_time_dependent_coefficient_closed_form():
    g = grid_1d()
    f0 = band_limited(g, 42)

    def ev(t, x, k):
        return -(1.0 + 0.5 * t) * np.sqrt(np.sum(np.asarray(k, float) ** 2, axis=-1))

    coeff = CoefficientSymbol(1, ev, False, True, "ramp")
    spec = HyperbolicProblemSpec(1, (coeff,), g, 1.0, (f0,))
    t = 0.5
    v, report = solve_cauchy(spec, t)
    radii = g.frequency_radii().ravel()
    Fin = forward_transform(f0).coeffs.ravel()
    exact = np.exp(1j * (t + 0.25 * t * t) * radii) * Fin
    err = np.abs(forward_transform(v).coeffs.ravel() - exact).max()
    print(f"time-ramp closed form: err {err:.2e} ({report.steps} steps)")
    assert err < 1e-12                       # midpoint rule is exact for linear tau(t)
    assert report.steps == math.ceil(64 * t)


def test_x_dependent_step_convergence():
    g = grid_1d()
    f = band_limited(g, 43, kmax=8)
    profile = TrigPolynomial(1.0, ((0, 1, 0.3),), ())

    def tau(t, x, k):
        nk = np.sqrt(np.sum(np.asarray(k, float) ** 2, axis=-1))
        return profile(np.asarray(x, float)) * nk

    ref = first_order_propagate(tau, f, 0.0, 0.25, 128, x_dependent=True)
    errs = []
    for steps in (4, 8, 16):
        out = first_order_propagate(tau, f, 0.0, 0.25, steps, x_dependent=True)
        errs.append(np.abs(out.values - ref.values).max())
    print("x-dependent step errors:", [f"{e:.3e}" for e in errs])
    assert errs[0] > errs[1] > errs[2]
    assert errs[0] / errs[1] > 1.5 and errs[1] / errs[2] > 1.5


def test_x_dependent_solve_and_certification():
    g = grid_1d()
    f0 = band_limited(g, 44, kmax=8)
    coeff = trigpoly_coefficient(
        1, TrigPolynomial(1.0, ((0, 1, 0.3),), ()),
        TrigPolynomial(0.005, (), ((0, 1, 0.0025),)), scale=-2 * np.pi)
    spec = HyperbolicProblemSpec(1, (coeff,), g, 1.0, (f0,))
    v, report = solve_cauchy(spec, 0.25, norms_requested=((2.0, 0.0), (INF, 0.0)))
    assert report.min_root_im >= -1e-12
    assert len(report.norms) == 2 and report.norms[1]["p"] == "inf"
    assert all(np.isfinite(gr) for gr in report.growth_factors)


def test_x_dependent_negative_damping_rejected():
    g = grid_1d()
    f0 = band_limited(g, 45)
    coeff = trigpoly_coefficient(
        1, TrigPolynomial(1.0, ((0, 1, 0.2),), ()), TrigPolynomial(0.05), scale=1.0)
    spec = HyperbolicProblemSpec(1, (coeff,), g, 1.0, (f0,))
    # tau = -p_1 has imaginary part -0.05|k| < 0
    with pytest.raises(NegativeImaginary):
        solve_cauchy(spec, 0.5)


def test_second_order_x_dependent_unsupported():
    g = grid_1d()
    coeff1 = trigpoly_coefficient(1, TrigPolynomial(1.0, ((0, 1, 0.2),), ()))
    spec = HyperbolicProblemSpec(
        2, (coeff1, constant_coefficient(2, -1.0)), g, 1.0,
        (zero_field(g), zero_field(g)))
    with pytest.raises(UnsupportedProblem, match="first-order"):
        solve_cauchy(spec, 0.1)


def test_solver_collision_and_zero_mode_message():
    g = grid_1d()
    spec = HyperbolicProblemSpec(
        2, (constant_coefficient(1, -2.0), constant_coefficient(2, 1.0)),
        g, 1.0, (zero_field(g), zero_field(g)))
    with pytest.raises(RootCollision):
        solve_cauchy(spec, 0.5)

    ones = GridFunction(g, np.ones(g.shape, dtype=complex))
    spec2 = wave_spec(g, zero_field(g), ones)
    v, report = solve_cauchy(spec2, 0.5)
    assert report.excised_modes == 1
    assert any("excised" in msg for msg in report.messages)
    assert np.abs(v.values).max() < 1e-12   # k=0 part of f_1 is dropped


def test_solve_argument_validation():
    g = grid_1d()
    spec = wave_spec(g, zero_field(g), zero_field(g))
    with pytest.raises(ValueError, match="t must lie"):
        solve_cauchy(spec, 1.5)
    with pytest.raises(ValueError, match="t must lie"):
        solve_cauchy(spec, -0.1)
    with pytest.raises(ValueError, match="p in"):
        solve_cauchy(spec, 0.5, norms_requested=((0.5, 0.0),))
    with pytest.raises(ValueError, match="alpha_convention"):
        solve_cauchy(spec, 0.5, alpha_convention="q")
    with pytest.raises(ValueError, match="kappa"):
        solve_cauchy(spec, 0.5, alpha_convention="kappa")


def test_homogeneity_guard():
    g = grid_1d()

    def ev(t, x, k):
        return np.sum(np.asarray(k, float) ** 2, axis=-1)   # degree 2, declared 1

    spec = HyperbolicProblemSpec(
        1, (CoefficientSymbol(1, ev, False, False, "bogus"),), g, 1.0, (zero_field(g),))
    with pytest.raises(ValueError, match="homogeneous"):
        solve_cauchy(spec, 0.5)


def test_spec_validation():
    g = grid_1d()
    with pytest.raises(ValueError, match="coefficients"):
        HyperbolicProblemSpec(2, (constant_coefficient(1, 0.0),), g, 1.0,
                              (zero_field(g), zero_field(g)))
    with pytest.raises(ValueError, match="degree"):
        HyperbolicProblemSpec(1, (constant_coefficient(2, -1.0),), g, 1.0, (zero_field(g),))
    with pytest.raises(ValueError, match="data"):
        HyperbolicProblemSpec(1, (constant_coefficient(1, -1.0),), g, 1.0, ())
    g2 = GridSpec(1, 32)
    with pytest.raises(ValueError, match="grid"):
        HyperbolicProblemSpec(1, (constant_coefficient(1, -1.0),), g, 1.0, (zero_field(g2),))
    with pytest.raises(ValueError, match="horizon"):
        HyperbolicProblemSpec(1, (constant_coefficient(1, -1.0),), g, 0.0, (zero_field(g),))


def test_coefficient_descriptors():
    c = coefficient_from_descriptor({"j": 2, "kind": "const", "data": {"value": [-1.0, 0.5]}})
    assert c.degree == 2 and not c.x_dependent
    val = c.evaluator(0.0, None, np.array([[3.0]]))
    assert np.allclose(val, (-1.0 + 0.5j) * 9.0)

    c2 = coefficient_from_descriptor({
        "j": 1, "kind": "trigpoly",
        "data": {"re": {"const": 1, "cos": [[1, 0.3]]}, "im": {"const": 0.005},
                 "scale": [-6.283185307179586, 0]}})
    assert c2.degree == 1 and c2.x_dependent

    with pytest.raises(ValueError, match="unknown coefficient"):
        coefficient_from_descriptor({"j": 1, "kind": "const", "data": {"value": 1}, "extra": 0})
    with pytest.raises(ValueError, match="missing"):
        coefficient_from_descriptor({"kind": "const", "data": {"value": 1}})
    with pytest.raises(ValueError, match="re"):
        coefficient_from_descriptor({"j": 1, "kind": "trigpoly", "data": {}})


# ---------------------------------------------------------------------------
# regularity bookkeeping


def test_regularity_report_pp():
    g = grid_1d()
    x = g.axis_points()
    mode = np.exp(2j * np.pi * 3 * x)
    v = GridFunction(g, 2.0 * mode)
    f0 = GridFunction(g, mode)
    rep = regularity_report(v, (f0, zero_field(g)), p=2.0, alpha=0.0)
    assert abs(rep.ratio - 2.0) < 1e-12
    assert rep.alpha_threshold == 0.0 and not rep.flagged
    rep_tight = regularity_report(v, (f0, zero_field(g)), p=2.0, alpha=0.0, budget=1.5)
    assert rep_tight.flagged
    # kappa convention changes the threshold
    rep_k = regularity_report(v, (f0,), p=1.0, alpha=0.0, kappa=2)
    assert abs(rep_k.alpha_threshold - 1.0) < 1e-15


def test_regularity_report_pq():
    g = grid_1d()
    v = band_limited(g, 50)
    f0 = band_limited(g, 51)
    rep = regularity_report(v, (f0,), p=2.0, alpha=0.0, variant="pq", q=1.0)
    assert abs(rep.alpha_threshold - (0.5 + 0.5 + 0.01)) < 1e-15
    assert rep.variant == "pq" and np.isfinite(rep.ratio)
    d = rep.to_dict()
    assert d["eps_margin"] == 0.01

    with pytest.raises(ValueError, match="needs q"):
        regularity_report(v, (f0,), 2.0, 0.0, variant="pq")
    with pytest.raises(ValueError, match="q < p"):
        regularity_report(v, (f0,), 2.0, 0.0, variant="pq", q=2.0)
    with pytest.raises(ValueError, match="variant"):
        regularity_report(v, (f0,), 2.0, 0.0, variant="qq")
    with pytest.raises(ValueError, match="p in"):
        regularity_report(v, (f0,), 0.5, 0.0)

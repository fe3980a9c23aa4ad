import numpy as np
import pytest

from hypfl import (GridFunction, GridSpec, block_bracket_ratios, build_dyadic_family,
                   dyadic_block, forward_transform, lp_decompose, phi_profile,
                   psi_profile, smooth_step)


def random_field(grid, seed):
    rng = np.random.default_rng(seed)
    return GridFunction(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))


def test_smooth_step_clamps():
    t = np.array([-1.0, 0.0, 0.25, 0.5, 0.75, 1.0, 2.0])
    h = smooth_step(t)
    assert h[0] == 0.0 and h[1] == 0.0
    assert h[5] == 1.0 and h[6] == 1.0
    assert abs(h[3] - 0.5) < 1e-15  # symmetric midpoint
    assert np.all(np.diff(h) >= 0)


def test_psi_phi_profiles():
    r = np.array([0.0, 0.5, 1.0, 1.3, 2.0, 3.0])
    psi = psi_profile(r)
    assert psi[0] == 1.0 and psi[2] == 1.0       # 1 on r <= 1
    assert psi[4] == 0.0 and psi[5] == 0.0       # 0 on r >= 2
    assert 0.0 < psi[3] < 1.0

    phi = phi_profile(r)
    assert phi[0] == 0.0 and phi[1] == 0.0       # vanishes below 1/2
    assert phi[4] == 0.0 and phi[5] == 0.0       # vanishes above 2
    assert phi[2] == 1.0                         # phi(1) = psi(1) - psi(2) = 1
    # telescoping: phi(r) + phi(r/2) + ... recovers psi plateaus
    assert abs(phi_profile(np.array([0.8]))[0]
               + psi_profile(np.array([1.6]))[0] - 1.0) < 1e-15


def test_partition_of_unity_1d_and_2d():
    for d, n in ((1, 256), (2, 64)):
        g = GridSpec(d, n)
        fam = build_dyadic_family(g)
        total = fam.cutoffs.sum(axis=0)
        resid = np.abs(total - 1.0).max()
        print(f"d={d} n={n} j_max={fam.j_max} residual={resid:.3e}")
        assert resid < 1e-12
        assert fam.partition_residual == resid
        # every cutoff stays in [0, 1]
        assert fam.cutoffs.min() >= 0.0
        assert fam.cutoffs.max() <= 1.0 + 1e-15


def test_block_supports_are_dyadic():
    g = GridSpec(1, 256)
    fam = build_dyadic_family(g)
    radii = g.frequency_radii()
    # j = 0 block covers |k| <= 1 fully and nothing past 2
    assert np.all(fam.cutoffs[0][radii <= 1.0] == 1.0)
    assert np.all(fam.cutoffs[0][radii >= 2.0] == 0.0)
    for j in range(1, fam.j_max):
        supp = fam.cutoffs[j] > 0
        assert radii[supp].min() > 2.0 ** (j - 1)
        assert radii[supp].max() < 2.0 ** (j + 1)
        # the center of the band is passed untouched
        center = np.isclose(radii, 2.0 ** j)
        assert np.all(fam.cutoffs[j][center] == 1.0)


def test_reconstruction_and_orthogonality():
    for d, n in ((1, 256), (2, 32)):
        g = GridSpec(d, n)
        fam = build_dyadic_family(g)
        f = random_field(g, 17 + d)
        blocks = lp_decompose(f, fam)
        total = np.sum([b.values for b in blocks], axis=0)
        assert np.abs(total - f.values).max() < 1e-10

        # far-separated blocks annihilate each other exactly
        for j in range(fam.j_max + 1):
            for k in range(j + 2, fam.j_max + 1):
                twice = dyadic_block(dyadic_block(f, j, fam), k, fam)
                assert np.abs(twice.values).max() < 1e-14


def test_adjacent_blocks_overlap():
    g = GridSpec(1, 256)
    fam = build_dyadic_family(g)
    f = random_field(g, 23)
    j = 2
    twice = dyadic_block(dyadic_block(f, j, fam), j + 1, fam)
    assert np.abs(twice.values).max() > 1e-8


def test_lp_decompose_matches_blockwise():
    g = GridSpec(1, 64)
    fam = build_dyadic_family(g)
    f = random_field(g, 29)
    blocks = lp_decompose(f, fam)
    assert len(blocks) == fam.j_max + 1
    for j, b in enumerate(blocks):
        direct = dyadic_block(f, j, fam)
        assert np.abs(b.values - direct.values).max() < 1e-14


def test_block_bracket_ratios_bounded():
    for d, n in ((1, 256), (2, 64)):
        fam = build_dyadic_family(GridSpec(d, n))
        ratios = block_bracket_ratios(fam)
        assert len(ratios) == fam.j_max  # bands j = 1..j_max
        assert max(ratios) <= 4.0 * np.sqrt(2.0) + 1e-12


def test_blocks_commute_with_fourier_support():
    g = GridSpec(1, 64)
    fam = build_dyadic_family(g)
    x = g.axis_points()
    f = GridFunction(g, np.exp(2j * np.pi * 4 * x))
    # |k| = 4 sits at the center of block j = 2
    b = dyadic_block(f, 2, fam)
    assert np.abs(b.values - f.values).max() < 1e-12
    F = forward_transform(dyadic_block(f, 4, fam))
    assert np.abs(F.coeffs).max() < 1e-14

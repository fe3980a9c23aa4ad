"""Smooth dyadic decomposition of the frequency lattice.

The cutoff profile is built from theta(t) = exp(-1/t) for t > 0 (else 0):
h = theta(t) / (theta(t) + theta(1-t)) rises smoothly from 0 to 1 on
[0,1], psi(r) = h(2 - r) equals 1 for r <= 1 and 0 for r >= 2, and
phi = psi - psi(2 .) is an annular bump supported on 1/2 <= r <= 2.

On a lattice with maximal frequency radius R the family is

    phi_0       = psi(|k|)
    phi_j       = phi(2^{-j} |k|)              1 <= j < j_max
    phi_{j_max} = 1 - psi(2^{-(j_max-1)} |k|)

with j_max the smallest j such that 2^{j+1} >= R, so boundary
frequencies land in the last block and the family sums to 1 exactly at
every lattice point.  Adjacent blocks overlap; blocks two apart have
disjoint supports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GridFunction, GridSpec, apply_multiplier, forward_transform, inverse_transform

PARTITION_TOL = 1e-12


class PartitionError(Exception):
    """Partition-of-unity residual above tolerance (implementation bug signal)."""


def _theta(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    # exp underflows to 0 gracefully near the left edge of the support
    with np.errstate(under="ignore"):
        out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """h(t): 0 for t <= 0, 1 for t >= 1, smooth and strictly monotone between."""
    t = np.asarray(t, dtype=float)
    a = _theta(t)
    b = _theta(1.0 - t)
    return a / (a + b)


def psi_profile(r):
    """Radial low-pass profile: 1 on r <= 1, 0 on r >= 2, smooth between."""
    return smooth_step(2.0 - np.asarray(r, dtype=float))


def phi_profile(r):
    """Annular bump psi(r) - psi(2r), supported on 1/2 <= r <= 2."""
    r = np.asarray(r, dtype=float)
    return psi_profile(r) - psi_profile(2.0 * r)


@dataclass(frozen=True)
class DyadicFamily:
    """Cutoff stack on a fixed grid: cutoffs[j] is phi_j on the FFT-ordered lattice."""

    grid: GridSpec
    j_max: int
    cutoffs: np.ndarray          # shape (j_max+1, *grid.shape)
    partition_residual: float


def build_dyadic_family(grid: GridSpec) -> DyadicFamily:
    radii = grid.frequency_radii()
    kmax = float(radii.max())
    j_max = 0
    while 2.0 ** (j_max + 1) < kmax - 1e-9:
        j_max += 1
    if j_max < 1:
        raise ValueError("grid too small for a dyadic family")
    cutoffs = np.empty((j_max + 1,) + grid.shape)
    cutoffs[0] = psi_profile(radii)
    for j in range(1, j_max):
        cutoffs[j] = phi_profile(radii / 2.0 ** j)
    cutoffs[j_max] = 1.0 - psi_profile(radii / 2.0 ** (j_max - 1))
    residual = float(np.abs(cutoffs.sum(axis=0) - 1.0).max())
    if residual > PARTITION_TOL:
        raise PartitionError(f"partition-of-unity residual {residual:.3e} exceeds {PARTITION_TOL}")
    cutoffs.setflags(write=False)
    return DyadicFamily(grid, j_max, cutoffs, residual)


def dyadic_block(f: GridFunction, j: int, fam: DyadicFamily) -> GridFunction:
    """Delta_j f = F^{-1}(phi_j . F f)."""
    if f.grid != fam.grid:
        raise ValueError("grid of f does not match the dyadic family")
    if not 0 <= j <= fam.j_max:
        raise ValueError(f"block index {j} out of range [0, {fam.j_max}]")
    return apply_multiplier(f, fam.cutoffs[j])


def lp_decompose(f: GridFunction, fam: DyadicFamily) -> list[GridFunction]:
    """All blocks [Delta_0 f, ..., Delta_{j_max} f]; they sum back to f."""
    if f.grid != fam.grid:
        raise ValueError("grid of f does not match the dyadic family")
    F = forward_transform(f)
    out = []
    for j in range(fam.j_max + 1):
        coeffs = F.coeffs * fam.cutoffs[j]
        out.append(inverse_transform(type(F)(f.grid, coeffs)))
    return out


def block_bracket_ratios(fam: DyadicFamily) -> list[float]:
    """max<k>/min<k> over the lattice support of each phi_j, j >= 1 (norm-equivalence anchor)."""
    grid = fam.grid
    br = np.sqrt(1.0 + grid.frequency_radii() ** 2)
    ratios = []
    for j in range(1, fam.j_max + 1):
        supp = fam.cutoffs[j] > 0
        if not supp.any():
            ratios.append(1.0)
            continue
        vals = br[supp]
        ratios.append(float(vals.max() / vals.min()))
    return ratios

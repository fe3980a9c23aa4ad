"""Periodic grid, discrete Fourier analysis, and Bessel potentials.

Everything downstream works on complex fields sampled on the uniform
lattice x_i = i/n of the torus [0,1)^d with d in {1,2} and n a power of
two.  The transform normalization is fixed so that a single exponential
e^{2 pi i k.x} has coefficient exactly 1 at frequency k:

    coeffs(k) = n^{-d} sum_x f(x) e^{-2 pi i k.x}
    f(x)      = sum_k coeffs(k) e^{+2 pi i k.x}

Frequencies live on the integer lattice [-n/2, n/2)^d and are stored in
FFT order throughout (index j <-> j for j < n/2, j - n otherwise).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.fft

_max_workers: int | None = None


def set_max_threads(count):
    """Cap the FFT worker pool; None defers to the HYPFL_THREADS variable."""
    global _max_workers
    _max_workers = None if count is None else max(1, int(count))


def _fft_workers():
    if _max_workers is not None:
        return _max_workers
    env = os.environ.get("HYPFL_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic lattice on [0,1)^d: n points per axis, n a power of two >= 8."""

    d: int
    n: int

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")
        if not isinstance(self.n, int) or self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"points per axis must be a power of two >= 8, got {self.n}")

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def npoints(self):
        return self.n ** self.d

    def axis_points(self):
        return np.arange(self.n) / self.n

    def points(self):
        """Lattice points, shape (n^d, d), row-major."""
        axes = np.meshgrid(*([self.axis_points()] * self.d), indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=-1)

    def axis_frequencies(self):
        """Integer frequencies of one axis in FFT storage order (as floats)."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n)

    def frequencies(self):
        """Integer frequency vectors, shape (n^d, d), FFT storage order, row-major."""
        axes = np.meshgrid(*([self.axis_frequencies()] * self.d), indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=-1)

    def frequency_radii(self):
        """Euclidean |k| on the frequency lattice, shape self.shape."""
        k = self.frequencies()
        return np.sqrt(np.sum(k * k, axis=-1)).reshape(self.shape)


def _as_field(grid, values):
    v = np.array(values, dtype=np.complex128).reshape(grid.shape)
    if not np.all(np.isfinite(v)):
        raise ValueError("field values must be finite")
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class GridFunction:
    """Complex field sampled on the lattice of `grid` (treated as immutable)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_field(self.grid, self.values))


@dataclass(frozen=True)
class SpectralFunction:
    """Fourier coefficients on the integer lattice, FFT storage order."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_field(self.grid, self.coeffs))

    def coeff(self, k):
        """Coefficient at integer frequency k (int for d=1, pair for d=2)."""
        if self.grid.d == 1:
            return self.coeffs[int(k) % self.grid.n]
        k1, k2 = k
        return self.coeffs[int(k1) % self.grid.n, int(k2) % self.grid.n]


def forward_transform(f: GridFunction) -> SpectralFunction:
    """coeffs(k) = n^{-d} sum_x f(x) e^{-2 pi i k.x}; a pure exponential has unit coefficient."""
    coeffs = scipy.fft.fftn(f.values, workers=_fft_workers()) / f.grid.npoints
    return SpectralFunction(f.grid, coeffs)


def inverse_transform(F: SpectralFunction) -> GridFunction:
    """f(x) = sum_k coeffs(k) e^{+2 pi i k.x} on the lattice."""
    values = scipy.fft.ifftn(F.coeffs, workers=_fft_workers()) * F.grid.npoints
    return GridFunction(F.grid, values)


def apply_multiplier(f: GridFunction, multiplier) -> GridFunction:
    """Fourier multiplier f -> F^{-1}(multiplier . F f); multiplier in FFT lattice order."""
    m = np.asarray(multiplier)
    if m.shape != f.grid.shape:
        m = m.reshape(f.grid.shape)
    F = forward_transform(f)
    return inverse_transform(SpectralFunction(f.grid, F.coeffs * m))


def bracket(k):
    """Japanese bracket <k> = (1 + |k|^2)^(1/2); k has frequency components on the last axis."""
    k = np.asarray(k, dtype=float)
    return np.sqrt(1.0 + np.sum(k * k, axis=-1))


def bessel_weights(grid: GridSpec, s: float):
    """<k>^s on the frequency lattice, shape grid.shape, FFT order."""
    return bracket(grid.frequencies()).reshape(grid.shape) ** s


def bessel_potential(f: GridFunction, s: float) -> GridFunction:
    """J_s f = F^{-1}( <k>^s F f ).

    J_s J_t = J_{s+t}, J_0 = id, and J_s is an exact isometry from
    FL^p_{a+s} onto FL^p_a for every p and a.
    """
    return apply_multiplier(f, bessel_weights(f.grid, s))


def spatial_lp_norm(f: GridFunction, p: float) -> float:
    """L^p norm with the uniform Riemann weight n^{-d}; max of |f| for p = inf."""
    a = np.abs(f.values).ravel()
    if p == np.inf:
        return float(a.max())
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    return float((np.sum(a ** p) / f.grid.npoints) ** (1.0 / p))

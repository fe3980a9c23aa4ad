"""Oscillatory-integral operators on lattice fields.

    T f(x) = sigma(x, 0) fhat(0)
           + sum_{k != 0} e^{2 pi i Phi(x, k)} (1 - psi(2k)) sigma(x, k) fhat(k)

evaluated by direct quadrature over the frequency lattice in ascending
lexicographic k order (O(n^{2d}), deterministic).  The excision factor
1 - psi(2k) vanishes only at k = 0 on the integer lattice, so the zero
mode always travels through the plain amplitude sigma(x, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import GridFunction, bessel_potential, bracket, forward_transform
from .lp import psi_profile
from .phases import PhaseSpec, SymbolSpec, ensure_valid_phase
from .spaces import INF, recip


@dataclass(frozen=True, eq=False)
class FioSpec:
    """Operator bundle: phase, amplitude, declared order m, rank kappa.

    left_bessel records smoothing composed from the left (J_s after the
    quadrature); the declared order is symbol order + left_bessel.
    """

    phase: PhaseSpec
    symbol: SymbolSpec
    order: float
    kappa: int
    left_bessel: float = 0.0

    def __post_init__(self):
        if self.kappa != self.phase.kappa:
            raise ValueError(
                f"declared rank {self.kappa} does not match the phase rank {self.phase.kappa}")
        if abs(self.order - (self.symbol.order + self.left_bessel)) > 1e-12:
            raise ValueError(
                f"declared order {self.order} must equal symbol order {self.symbol.order} "
                f"+ left smoothing {self.left_bessel}")


def make_fio(phase: PhaseSpec, symbol: SymbolSpec) -> FioSpec:
    return FioSpec(phase, symbol, symbol.order, phase.kappa)


def apply_fio(T: FioSpec, f: GridFunction) -> GridFunction:
    """Direct quadrature application; the phase is certified (cached) first."""
    ensure_valid_phase(T.phase)
    grid = f.grid
    if T.phase.dim != grid.d:
        raise ValueError(f"phase is {T.phase.dim}-dimensional, grid is {grid.d}-dimensional")

    F = forward_transform(f)
    freqs = grid.frequencies()                      # (N, d) fft order
    order = np.lexsort(tuple(freqs[:, a] for a in reversed(range(grid.d))))
    K = freqs[order]                                # ascending lexicographic
    coeffs = F.coeffs.ravel()[order]

    radii = np.sqrt(np.sum(K * K, axis=-1))
    excision = 1.0 - psi_profile(2.0 * radii)
    zero = radii == 0.0
    Ksafe = np.array(K)
    Ksafe[zero] = 0.0
    Ksafe[zero, 0] = 1.0                            # dummy direction, column overwritten below

    X = grid.points()
    N = X.shape[0]
    out = np.empty(N, dtype=complex)
    chunk = max(1, (1 << 22) // max(1, K.shape[0]))
    zerovec = np.zeros((1, grid.d))
    for lo in range(0, N, chunk):
        hi = min(N, lo + chunk)
        Xc = X[lo:hi, None, :]
        Kc = Ksafe[None, :, :]
        E = np.exp(2j * np.pi * np.asarray(T.phase.evaluator(Xc, Kc)))
        E *= excision[None, :]
        E = E * np.asarray(T.symbol.evaluator(Xc, Kc))
        if zero.any():
            sigma0 = np.asarray(T.symbol.evaluator(X[lo:hi, :], zerovec))
            E[:, zero] = sigma0.reshape(hi - lo, 1)
        out[lo:hi] = E @ coeffs

    result = GridFunction(grid, out.reshape(grid.shape))
    if T.left_bessel:
        result = bessel_potential(result, T.left_bessel)
    return result


def compose_with_bessel(T: FioSpec, s: float, side: str) -> FioSpec:
    """J_s . T (side="left") or T . J_s (side="right"); order bookkeeping m + s.

    The canonical relation is untouched: the returned spec holds the very
    same phase object.  Right composition folds <k>^s into the amplitude;
    left composition is carried out operationally as J_s after the
    quadrature.
    """
    if side == "right":
        base = T.symbol

        def ev(x, k, _base=base.evaluator, _s=s):
            return np.asarray(_base(x, k)) * bracket(k) ** _s

        sym = SymbolSpec(ev, base.order + s, base.dim, f"{base.name}*<k>^{s}", base.x_support)
        return FioSpec(T.phase, sym, T.order + s, T.kappa, T.left_bessel)
    if side == "left":
        return FioSpec(T.phase, T.symbol, T.order + s, T.kappa, T.left_bessel + s)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def required_order_fl(r: float, kappa: int) -> float:
    """Largest order m with FL^r -> FL^r boundedness: m <= -kappa |1/r - 1/2| (non-strict)."""
    if not (r == INF or (isinstance(r, (int, float, Fraction)) and 1 <= r)):
        raise ValueError(f"r must lie in [1, inf], got {r!r}")
    return float(-Fraction(kappa) * abs(recip(r) - Fraction(1, 2)))


def required_order_fl_pq(p: float, q: float, kappa: int, d: int) -> float:
    """Supremal order for FL^p -> FL^q mapping (strict inequality regime, 1 <= q < p <= inf)."""
    for name, v in (("p", p), ("q", q)):
        if not (v == INF or (isinstance(v, (int, float, Fraction)) and 1 <= v)):
            raise ValueError(f"{name} must lie in [1, inf], got {v!r}")
    rq, rp = recip(q), recip(p)
    if not rq > rp:
        raise ValueError(f"need 1 <= q < p <= inf, got q={q}, p={p}")
    return float(-Fraction(kappa) * abs(rq - Fraction(1, 2)) - Fraction(d) * (rq - rp))

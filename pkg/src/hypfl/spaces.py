"""Weighted sequence norms on the frequency lattice and embedding predicates.

Norms (counting measure in frequency, uniform Riemann weight n^{-d} in
space):

    fl_norm(f, p, s)        = ( sum_k <k>^{ps} |fhat(k)|^p )^{1/p}
    besov_norm(f, p, q, s)  = || 2^{js} ||Delta_j f||_{L^p} ||_{l^q_j}
    triebel_norm(f, p, q, s)= || ( sum_j (2^{js}|Delta_j f(x)|)^q )^{1/q} ||_{L^p_x}

The embedding predicates answer, index-exactly, whether every member of
the dyadic space lies in FL^r with norm control.  Boundary comparisons
are done in exact rational arithmetic (binary floats are rationals), so
strict and non-strict inequalities at the critical index never
misclassify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import GridFunction, bracket, forward_transform, spatial_lp_norm
from .lp import DyadicFamily, lp_decompose

INF = math.inf


def _check_exponent(name, v, allow_inf=True):
    if v == INF:
        if not allow_inf:
            raise ValueError(f"{name} = inf is not admitted here")
        return
    if not (isinstance(v, (int, float, Fraction)) and v > 0):
        raise ValueError(f"{name} must be a positive extended real, got {v!r}")


def _frac(v) -> Fraction:
    """Exact rational image of a finite numeric value."""
    return v if isinstance(v, Fraction) else Fraction(v)


def recip(v) -> Fraction:
    """1/v as an exact rational, with 1/inf = 0."""
    if v == INF:
        return Fraction(0)
    return 1 / _frac(v)


def conjugate(v):
    """Holder conjugate: 1/v + 1/v' = 1, with v' = inf whenever v <= 1."""
    if v == INF:
        return Fraction(1)
    f = _frac(v)
    if f <= 1:
        return INF
    return f / (f - 1)


@dataclass(frozen=True)
class IndexTuple:
    """Index bundle (p, q, r, s, d) for the embedding predicates."""

    p: float
    q: float
    r: float
    s: float
    d: int

    def __post_init__(self):
        _check_exponent("p", self.p)
        _check_exponent("q", self.q)
        _check_exponent("r", self.r)
        if not math.isfinite(float(self.s)):
            raise ValueError(f"s must be finite, got {self.s!r}")
        if self.d not in (1, 2):
            raise ValueError(f"d must be 1 or 2, got {self.d}")

    def to_dict(self):
        def enc(v):
            return "inf" if v == INF else v

        return {"p": enc(self.p), "q": enc(self.q), "r": enc(self.r),
                "s": self.s, "d": self.d}

    def label(self) -> str:
        def enc(v):
            return "inf" if v == INF else f"{v:g}"

        return (f"p={enc(self.p)},q={enc(self.q)},r={enc(self.r)},"
                f"s={self.s:g},d={self.d}")


# ---------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class NormResult:
    value: float
    space: str
    p: float
    q: float | None
    s: float
    d: int
    n: int

    def to_dict(self):
        def enc(v):
            return "inf" if v == INF else v

        return {
            "value": self.value,
            "space": self.space,
            "p": enc(self.p),
            "q": None if self.q is None else enc(self.q),
            "s": self.s,
            "d": self.d,
            "n": self.n,
        }


def fl_norm(f: GridFunction, p: float, s: float) -> NormResult:
    """Fourier-Lebesgue norm of smoothness s: weighted l^p of the coefficients."""
    _check_exponent("p", p)
    F = forward_transform(f)
    weights = bracket(f.grid.frequencies()) ** s
    a = weights * np.abs(F.coeffs.ravel())
    if p == INF:
        value = float(a.max())
    else:
        value = float(np.sum(a ** p) ** (1.0 / p))
    return NormResult(value, "fl", p, None, s, f.grid.d, f.grid.n)


def _ell_q(values, q):
    values = np.asarray(values, dtype=float)
    if q == INF:
        return float(values.max())
    return float(np.sum(values ** q) ** (1.0 / q))


def besov_norm(f: GridFunction, p: float, q: float, s: float, fam: DyadicFamily) -> NormResult:
    """l^q over blocks of 2^{js} ||Delta_j f||_{L^p} (L^p with Riemann weight n^{-d})."""
    _check_exponent("p", p)
    _check_exponent("q", q)
    if f.grid != fam.grid:
        raise ValueError("grid of f does not match the dyadic family")
    blocks = lp_decompose(f, fam)
    seq = [2.0 ** (j * s) * spatial_lp_norm(b, p) for j, b in enumerate(blocks)]
    return NormResult(_ell_q(seq, q), "besov", p, q, s, f.grid.d, f.grid.n)


def triebel_norm(f: GridFunction, p: float, q: float, s: float, fam: DyadicFamily) -> NormResult:
    """L^p over x of the pointwise l^q over blocks of 2^{js}|Delta_j f(x)|; p = inf rejected."""
    if p == INF:
        raise ValueError("p = inf is not admitted for the Triebel-Lizorkin scale")
    _check_exponent("p", p, allow_inf=False)
    _check_exponent("q", q)
    if f.grid != fam.grid:
        raise ValueError("grid of f does not match the dyadic family")
    blocks = lp_decompose(f, fam)
    stack = np.stack([np.abs(b.values).ravel() for b in blocks])
    weights = 2.0 ** (s * np.arange(len(blocks)))
    stack = weights[:, None] * stack
    if q == INF:
        pointwise = stack.max(axis=0)
    else:
        pointwise = np.sum(stack ** q, axis=0) ** (1.0 / q)
    value = float((np.sum(pointwise ** p) / f.grid.npoints) ** (1.0 / p))
    return NormResult(value, "triebel", p, q, s, f.grid.d, f.grid.n)


# ---------------------------------------------------------------------------
# embedding predicates


def besov_embedding_decision(t: IndexTuple):
    """(verdict, clause) for the Besov -> FL^r embedding at indices t."""
    rp, rr = recip(t.p), recip(t.r)
    if not rp + rr >= 1:
        return False, "fails gate 1/p + 1/r >= 1"
    if not _le(t.p, 2):
        return False, "fails gate p <= 2"
    gap = _frac(t.d) * (rr + rp - 1)
    s = _frac(t.s)
    if _le(t.q, t.r):
        if s >= gap:
            return True, "clause (1): q <= r and s >= d(1/r + 1/p - 1)"
        return False, "clause (1) fails: q <= r needs s >= d(1/r + 1/p - 1)"
    if s > gap:
        return True, "clause (2): q > r and s > d(1/r + 1/p - 1)"
    return False, "clause (2) fails: q > r needs strict s > d(1/r + 1/p - 1)"


def besov_embeds_fl(t: IndexTuple) -> bool:
    """Does B^s_{p,q} embed into FL^r?  Index-exact, boundaries included."""
    return besov_embedding_decision(t)[0]


def triebel_embedding_decision(t: IndexTuple):
    """(verdict, clause) for the Triebel-Lizorkin -> FL^r embedding; requires p < inf."""
    if t.p == INF:
        raise ValueError("the Triebel-Lizorkin predicate requires p < inf")
    rp, rr = recip(t.p), recip(t.r)
    if not _le(t.p, 2):
        return False, "fails gate p <= 2"
    if not rp + rr >= 1:
        return False, "fails gate 1/p + 1/r >= 1"
    gap = _frac(t.d) * (rp + rr - 1)
    s = _frac(t.s)
    pconj = conjugate(t.p)
    # the gate already forces r <= p', so exactly one structural case applies
    if _lt(t.r, t.p):
        if s > gap:
            return True, "clause (1): r < p and s > d(1/p + 1/r - 1)"
        return False, "clause (1) fails: r < p needs strict s > d(1/p + 1/r - 1)"
    if _eq(t.r, pconj) and _lt(pconj, t.q):
        if s > gap:
            return True, "clause (2): r = p' < q and s > d(1/p + 1/r - 1)"
        return False, "clause (2) fails: r = p' < q needs strict s > d(1/p + 1/r - 1)"
    if _le(t.p, t.r) and _le(t.q, t.r):
        if s >= gap:
            return True, "clause (3): r >= max(p, q) and s >= d(1/p + 1/r - 1)"
        return False, "clause (3) fails: r >= max(p, q) needs s >= d(1/p + 1/r - 1)"
    if s >= gap:
        return True, "clause (4): p <= r < p' and s >= d(1/p + 1/r - 1)"
    return False, "clause (4) fails: p <= r < p' needs s >= d(1/p + 1/r - 1)"


def triebel_embeds_fl(t: IndexTuple) -> bool:
    """Does F^s_{p,q} embed into FL^r (0 < p < inf)?  Index-exact."""
    return triebel_embedding_decision(t)[0]


def _order_threshold(r, kappa) -> Fraction:
    return -_frac(kappa) * abs(recip(r) - Fraction(1, 2))


def fio_besov_to_fl_admissible(t: IndexTuple, m: float, kappa: int) -> bool:
    """Embedding holds and the operator order clears m <= -kappa |1/r - 1/2|."""
    if not (_le(1, t.r) and _le(t.r, INF)):
        raise ValueError(f"r must lie in [1, inf], got {t.r!r}")
    if not besov_embeds_fl(t):
        return False
    return _frac(m) <= _order_threshold(t.r, kappa)


def fio_triebel_to_fl_admissible(t: IndexTuple, m: float, kappa: int) -> bool:
    """Triebel-Lizorkin companion of fio_besov_to_fl_admissible."""
    if not (_le(1, t.r) and _le(t.r, INF)):
        raise ValueError(f"r must lie in [1, inf], got {t.r!r}")
    if not triebel_embeds_fl(t):
        return False
    return _frac(m) <= _order_threshold(t.r, kappa)


def admissibility_decision(t: IndexTuple, m: float, kappa: int, scale: str = "besov"):
    """(verdict, clause) used by the CLI; scale in {besov, triebel}."""
    if not (_le(1, t.r) and _le(t.r, INF)):
        raise ValueError(f"r must lie in [1, inf], got {t.r!r}")
    decide = besov_embedding_decision if scale == "besov" else triebel_embedding_decision
    ok, clause = decide(t)
    if not ok:
        return False, clause
    threshold = _order_threshold(t.r, kappa)
    if _frac(m) <= threshold:
        return True, f"{clause}; and m <= -kappa|1/r - 1/2| = {float(threshold)}"
    return False, f"order fails: m > -kappa|1/r - 1/2| = {float(threshold)}"


# extended-real comparisons: exact wherever both sides are rational


def _le(a, b):
    if a == INF:
        return b == INF
    if b == INF:
        return True
    return _frac(a) <= _frac(b)


def _lt(a, b):
    return _le(a, b) and not _eq(a, b)


def _eq(a, b):
    if a == INF or b == INF:
        return a == b
    return _frac(a) == _frac(b)

"""Exact algebra on continuous piecewise quadratic functions of one variable.

A piecewise quadratic is stored as an ordered list of pieces
``(d_i, a_i, b_i, c_i)`` where piece ``i`` equals ``a_i*mu**2 + b_i*mu + c_i``
on the half-open interval ``[d_i, d_{i+1})``.  The first bound is always
``-inf`` and the last piece extends to ``+inf``.  All operations here return
new objects; a constructed function is never mutated.

The operations are the building blocks of a functional dynamic-programming
recursion: pointwise addition of a quadratic, pointwise minimum of two
functions, the quadratic infimal convolution

    INF(f, w)(theta) = min_u  f(u) + w * (u - theta)**2,

and the global minimiser.  The infimal convolution of a single quadratic
``a*u**2 + b*u + c`` with weight ``w`` is again a quadratic with coefficients

    a' = a*w / (a + w),   b' = b*w / (a + w),   c' = c - b**2 / (4*(a + w)),

and the convolution of a piecewise quadratic is assembled from the
transformed pieces by an order-preserving pruning pass: surviving pieces keep
their original ordering, and the first and last input pieces always survive.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from typing import Iterable, NamedTuple

from .errors import InvalidParameterError, StructuralError

INF = math.inf

#: absolute tolerance below which coefficient differences are treated as zero
COEFF_TOL = 1e-12

#: relative tolerance for value continuity at internal knots
KNOT_RTOL = 1e-8

#: most negative curvature tolerated before clamping to zero
NEG_CURV_TOL = -1e-9


class Quadratic(NamedTuple):
    """A quadratic ``q(mu) = a*mu**2 + b*mu + c`` with ``a >= 0``."""

    a: float
    b: float
    c: float

    def __call__(self, mu: float) -> float:
        return (self.a * mu + self.b) * mu + self.c

    def argmin(self) -> float:
        """Location of the minimum; defined only for strictly convex pieces."""
        if self.a <= 0.0:
            raise StructuralError("argmin undefined for a non-convex quadratic")
        return -self.b / (2.0 * self.a)

    def min_value(self) -> float:
        if self.a <= 0.0:
            raise StructuralError("minimum undefined for a non-convex quadratic")
        return self.c - self.b * self.b / (4.0 * self.a)


class PiecewiseQuadratic:
    """Continuous piecewise quadratic on a partition of the real line.

    Parameters
    ----------
    pieces : iterable
        Either raw tuples ``(left_bound, a, b, c)`` or pairs
        ``(left_bound, Quadratic)``.  Bounds must be strictly increasing and
        the first must be ``-inf``.
    """

    __slots__ = ("pieces",)

    def __init__(self, pieces: Iterable) -> None:
        raw = []
        for item in pieces:
            if len(item) == 2:
                d, q = item
                raw.append((float(d), float(q[0]), float(q[1]), float(q[2])))
            else:
                d, a, b, c = item
                raw.append((float(d), float(a), float(b), float(c)))
        if not raw:
            raise InvalidParameterError("a piecewise quadratic needs at least one piece")
        if raw[0][0] != -INF:
            raise InvalidParameterError("the first piece must start at -inf")
        for k in range(1, len(raw)):
            if not raw[k - 1][0] < raw[k][0]:
                raise InvalidParameterError("piece bounds must be strictly increasing")
        cleaned = []
        for d, a, b, c in raw:
            if a < 0.0:
                if a < NEG_CURV_TOL:
                    raise InvalidParameterError(f"negative curvature {a!r} in piece")
                a = 0.0
            cleaned.append((d, a, b, c))
        self.pieces = tuple(cleaned)

    @classmethod
    def from_quadratic(cls, q) -> "PiecewiseQuadratic":
        """Wrap a single quadratic (tuple or :class:`Quadratic`) as one piece."""
        a, b, c = q
        return cls([(-INF, a, b, c)])

    @property
    def piece_count(self) -> int:
        return len(self.pieces)

    @property
    def bounds(self) -> list:
        return [p[0] for p in self.pieces]

    @property
    def quadratics(self) -> list:
        return [Quadratic(p[1], p[2], p[3]) for p in self.pieces]

    def __call__(self, mu: float) -> float:
        return _eval_raw(self.pieces, mu)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        parts = ", ".join(
            f"[{p[0]:.6g}: {p[1]:.6g}x^2{p[2]:+.6g}x{p[3]:+.6g}]" for p in self.pieces
        )
        return f"PiecewiseQuadratic({parts})"

    def validate(self, knot_rtol: float = KNOT_RTOL) -> "PiecewiseQuadratic":
        """Check continuity and the knot slope condition; raise on breach.

        At every internal knot the function value from the left piece must
        match the right piece, and the left derivative must not be smaller
        than the right derivative (kinks produced by pointwise minima always
        bend downwards; an upward kink can never contain a minimiser and
        signals a corrupted function).
        """
        for k in range(1, len(self.pieces)):
            d = self.pieces[k][0]
            _, al, bl, cl = self.pieces[k - 1]
            _, ar, br, cr = self.pieces[k]
            vl = (al * d + bl) * d + cl
            vr = (ar * d + br) * d + cr
            scale = max(1.0, abs(vl), abs(vr))
            if abs(vl - vr) > knot_rtol * scale:
                raise StructuralError(f"discontinuity at knot {d}: {vl} vs {vr}")
            sl = 2.0 * al * d + bl
            sr = 2.0 * ar * d + br
            sscale = max(1.0, abs(sl), abs(sr))
            if sl < sr - knot_rtol * sscale:
                raise StructuralError(f"upward kink at knot {d}: {sl} < {sr}")
        return self


# ---------------------------------------------------------------------------
# raw kernels
#
# These operate on plain lists of (d, a, b, c) tuples so the solver's inner
# loop can bypass object construction entirely.
# ---------------------------------------------------------------------------


def _eval_raw(pieces, mu: float) -> float:
    lo, hi = 0, len(pieces)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pieces[mid][0] <= mu:
            lo = mid
        else:
            hi = mid
    _, a, b, c = pieces[lo]
    return (a * mu + b) * mu + c


def _add_raw(pieces, qa: float, qb: float, qc: float):
    return [(d, a + qa, b + qb, c + qc) for d, a, b, c in pieces]


def _merge_adjacent(pieces):
    out = [pieces[0]]
    for p in pieces[1:]:
        q = out[-1]
        if (
            abs(p[1] - q[1]) <= COEFF_TOL
            and abs(p[2] - q[2]) <= COEFF_TOL
            and abs(p[3] - q[3]) <= COEFF_TOL
        ):
            continue
        out.append(p)
    return out


def _roots_inside(da: float, db: float, dc: float, left: float, right: float):
    """Real roots of ``da*x**2 + db*x + dc`` strictly inside ``(left, right)``.

    Tangencies (double roots or numerically fused root pairs) are dropped:
    they do not change the sign of the difference.
    """
    if abs(da) <= COEFF_TOL:
        if abs(db) <= COEFF_TOL:
            return ()
        x = -dc / db
        return (x,) if left < x < right else ()
    disc = db * db - 4.0 * da * dc
    if disc <= 0.0:
        return ()
    sq = math.sqrt(disc)
    q = -0.5 * (db + math.copysign(sq, db)) if db != 0.0 else -0.5 * sq
    r1 = q / da
    r2 = dc / q
    if r1 > r2:
        r1, r2 = r2, r1
    if r2 - r1 <= 1e-12 * max(1.0, abs(r1), abs(r2)):
        return ()
    out = []
    if left < r1 < right:
        out.append(r1)
    if left < r2 < right:
        out.append(r2)
    return tuple(out)


def _min_raw(F, G):
    """Pointwise minimum of two piece lists; ties go to the first argument."""
    out = []
    i = j = 0
    nF, nG = len(F), len(G)
    left = -INF
    while True:
        dF = F[i + 1][0] if i + 1 < nF else INF
        dG = G[j + 1][0] if j + 1 < nG else INF
        right = dF if dF < dG else dG
        if left < right:
            f = F[i]
            g = G[j]
            da = f[1] - g[1]
            db = f[2] - g[2]
            dc = f[3] - g[3]
            cuts = _roots_inside(da, db, dc, left, right)
            lo = left
            for k in range(len(cuts) + 1):
                hi = cuts[k] if k < len(cuts) else right
                if lo == -INF:
                    t = 0.0 if hi == INF else hi - 1.0
                elif hi == INF:
                    t = lo + 1.0
                else:
                    t = 0.5 * (lo + hi)
                diff = (da * t + db) * t + dc
                src = f if diff <= 0.0 else g
                out.append((lo, src[1], src[2], src[3]))
                lo = hi
        if right == INF:
            break
        if dF == right:
            i += 1
        if dG == right:
            j += 1
        left = right
    return _merge_adjacent(out)


def _takeover(ai, bi, ci, aj, bj, cj):
    """Leftmost point after which quadratic ``i`` lies strictly below ``j``.

    Returns ``+inf`` when ``i`` never drops below ``j`` (``i`` is redundant),
    ``-inf`` when ``j`` is dominated everywhere, and ``None`` when the two
    quadratics coincide within tolerance.
    """
    da = ai - aj
    db = bi - bj
    dc = ci - cj
    if abs(da) <= COEFF_TOL:
        if abs(db) <= COEFF_TOL:
            if abs(dc) <= COEFF_TOL:
                return None
            return -INF if dc < 0.0 else INF
        return -dc / db if db < 0.0 else INF
    disc = db * db - 4.0 * da * dc
    if da > 0.0:
        if disc <= 0.0:
            return INF
    elif disc <= 0.0:
        return -INF
    sq = math.sqrt(disc)
    q = -0.5 * (db + math.copysign(sq, db)) if db != 0.0 else -0.5 * sq
    r1 = q / da
    r2 = dc / q
    # the difference changes sign from + to - at the smaller root when the
    # leading coefficient is positive, and at the larger root otherwise
    if da > 0.0:
        return r1 if r1 < r2 else r2
    return r1 if r1 > r2 else r2


def _inf_raw(pieces, omega: float, box_min: float = 0.0):
    """Infimal convolution kernel; returns ``(pieces, surviving indices)``."""
    if omega == INF:
        return list(pieces), list(range(len(pieces)))
    if omega == 0.0:
        idx, value = _argmin_piece_raw(pieces, box_min)
        return [(-INF, 0.0, 0.0, value)], [idx]
    n = len(pieces)
    trans = []
    for _, a, b, c in pieces:
        s = a + omega
        trans.append((a * omega / s, b * omega / s, c - b * b / (4.0 * s)))
    surv = [trans[0]]
    idx = [0]
    lbs = [-INF]
    for i in range(1, n):
        qi = trans[i]
        ai, bi, ci = qi
        while True:
            aj, bj, cj = surv[-1]
            x = _takeover(ai, bi, ci, aj, bj, cj)
            if x is None:
                # coincides with the reigning piece: keep it, report the
                # later index so the survivor list stays order-preserving
                idx[-1] = i
                break
            if x == INF:
                break
            if x > lbs[-1]:
                surv.append(qi)
                idx.append(i)
                lbs.append(x)
                break
            surv.pop()
            idx.pop()
            lbs.pop()
            if not surv:
                surv.append(qi)
                idx.append(i)
                lbs.append(-INF)
                break
    return [(lbs[k],) + surv[k] for k in range(len(surv))], idx


def _argmin_piece_raw(pieces, box_min: float):
    """Return ``(piece index, min value)`` of the global minimum."""
    best_v = INF
    best_k = -1
    n = len(pieces)
    for k in range(n):
        d, a, b, c = pieces[k]
        right = pieces[k + 1][0] if k + 1 < n else INF
        if a > COEFF_TOL:
            v = -b / (2.0 * a)
            if v < d:
                val = (a * d + b) * d + c
            elif v >= right:
                continue
            else:
                val = c - b * b / (4.0 * a)
        elif abs(b) <= COEFF_TOL:
            val = c
        elif b > 0.0:
            if d == -INF:
                raise StructuralError("piecewise quadratic is unbounded below")
            val = (a * d + b) * d + c
        else:
            if right == INF:
                raise StructuralError("piecewise quadratic is unbounded below")
            continue
        if val < best_v:
            best_v = val
            best_k = k
    if best_k < 0:
        raise StructuralError("no bounded piece found")
    return best_k, best_v


def _argmin_raw(pieces, box_min: float = 0.0):
    """Leftmost global minimiser and minimum value of a piece list."""
    best_x = None
    best_v = INF
    n = len(pieces)
    for k in range(n):
        d, a, b, c = pieces[k]
        right = pieces[k + 1][0] if k + 1 < n else INF
        if a > COEFF_TOL:
            v = -b / (2.0 * a)
            if v < d:
                x = d
                val = (a * d + b) * d + c
            elif v >= right:
                continue
            else:
                x = v
                val = c - b * b / (4.0 * a)
        elif abs(b) <= COEFF_TOL:
            x = d if d > -INF else box_min
            val = c
        elif b > 0.0:
            if d == -INF:
                raise StructuralError("piecewise quadratic is unbounded below")
            x = d
            val = (a * d + b) * d + c
        else:
            if right == INF:
                raise StructuralError("piecewise quadratic is unbounded below")
            continue
        if val < best_v or (val == best_v and x < best_x):
            best_v = val
            best_x = x
    if best_x is None:
        raise StructuralError("no bounded piece found")
    return best_x, best_v


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def evaluate(f: PiecewiseQuadratic, mu: float) -> float:
    """Value of ``f`` at ``mu`` (knots belong to the piece on their right)."""
    return _eval_raw(f.pieces, mu)


def add_quadratic(f: PiecewiseQuadratic, q) -> PiecewiseQuadratic:
    """Pointwise sum ``f + q`` for a single quadratic ``q``.

    The partition is unchanged; only the coefficients shift.  ``q`` may have
    ``a = 0`` (linear or constant offsets are fine) but the result must keep
    every piece convex.
    """
    a, b, c = q
    out = PiecewiseQuadratic.__new__(PiecewiseQuadratic)
    out.pieces = tuple((d, pa + a, pb + b, pc + c) for d, pa, pb, pc in f.pieces)
    for p in out.pieces:
        if p[1] < NEG_CURV_TOL:
            raise InvalidParameterError("sum has a concave piece")
    return out


def min_of_two(f: PiecewiseQuadratic, g: PiecewiseQuadratic) -> PiecewiseQuadratic:
    """Pointwise minimum of two piecewise quadratics.

    New knots appear where the active pieces cross; on intervals where the
    two functions coincide the piece of ``f`` is kept.

    Parameters
    ----------
    f, g : PiecewiseQuadratic
        Functions over the same (full) domain.

    Returns
    -------
    PiecewiseQuadratic
    """
    out = PiecewiseQuadratic.__new__(PiecewiseQuadratic)
    out.pieces = tuple(_min_raw(f.pieces, g.pieces))
    return out


def infimal_convolution(f: PiecewiseQuadratic, omega: float) -> PiecewiseQuadratic:
    """Quadratic infimal convolution ``min_u f(u) + omega*(u - theta)**2``.

    Parameters
    ----------
    f : PiecewiseQuadratic
        A continuous function whose internal knots all bend downwards (the
        natural state for anything built from minima of convex pieces).
    omega : float
        Non-negative weight.  ``omega = inf`` returns ``f`` itself (the
        quadratic term forces ``u = theta``); ``omega = 0`` returns the
        constant function at ``min f`` (the quadratic term vanishes and the
        minimisation decouples).

    Returns
    -------
    PiecewiseQuadratic
        The convolution, flattened pointwise below ``f`` and sharing its
        minimum value and minimiser.
    """
    pieces, _ = infimal_convolution_indexed(f, omega)
    return pieces


def infimal_convolution_indexed(f: PiecewiseQuadratic, omega: float):
    """Like :func:`infimal_convolution` but also reports surviving indices.

    Returns
    -------
    (PiecewiseQuadratic, list of int)
        The convolution and, for each output piece, the index of the input
        piece it was transformed from.  For ``omega > 0`` the indices are
        strictly increasing and include the first and last input pieces.
    """
    if omega < 0.0 or math.isnan(omega):
        raise InvalidParameterError(f"omega must be >= 0, got {omega!r}")
    raw, idx = _inf_raw(f.pieces, omega)
    out = PiecewiseQuadratic.__new__(PiecewiseQuadratic)
    out.pieces = tuple(raw)
    return out, idx


def global_argmin(f: PiecewiseQuadratic, box_min: float = 0.0):
    """Leftmost global minimiser of ``f`` and its value.

    Parameters
    ----------
    f : PiecewiseQuadratic
    box_min : float, optional
        Finite stand-in reported when the minimum is attained on a constant
        piece that extends to ``-inf`` (there is no leftmost point; the
        caller supplies the left edge of its search box).

    Returns
    -------
    (float, float)
        ``(argmin, min value)``.  Raises :class:`StructuralError` when the
        function is unbounded below.
    """
    return _argmin_raw(f.pieces, box_min)

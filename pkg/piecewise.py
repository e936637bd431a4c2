"""
Exact minimization of a one-dimensional piecewise-quadratic function.

Between consecutive breakpoints the function is a quadratic, recovered
from three evaluations (both ends and the midpoint). The global minimum
over [lo, hi] is then among the breakpoints and the piece vertices.
"""

import logging
from dataclasses import dataclass

import numpy as np

from config import EPS_TIE

logger = logging.getLogger(__name__)

_MIN_PIECE = 1e-14


@dataclass(frozen=True)
class PiecewiseMinimum:
    argmin: float
    value: float
    ties: tuple = ()


def piece_knots(lo, hi, breakpoints):
    """Sorted knots: both ends plus every breakpoint strictly inside."""
    inner = [float(b) for b in breakpoints if lo < b < hi]
    knots = np.unique(np.array([lo, hi] + inner, dtype=float))
    if len(knots) > 1:
        keep = np.concatenate(([True], np.diff(knots) > _MIN_PIECE))
        knots = knots[keep]
        knots[-1] = hi
    return knots


def minimize_piecewise_quadratic(f, lo, hi, breakpoints=(), eps_tie=EPS_TIE):
    """Global minimum of ``f`` over [lo, hi].

    Args:
        f: vectorized callable, 1-D array of points -> 1-D array of values.
            Must be quadratic between consecutive breakpoints.
        breakpoints: points where the quadratic pieces change.
        eps_tie: candidates within this of the best value are ties; the
            largest such point wins.
    """
    lo, hi = float(lo), float(hi)
    if hi - lo <= _MIN_PIECE:
        value = float(f(np.array([hi]))[0])
        return PiecewiseMinimum(hi, value, (hi,))

    knots = piece_knots(lo, hi, breakpoints)
    a, b = knots[:-1], knots[1:]
    mids = 0.5 * (a + b)
    values = f(np.concatenate((knots, mids)))
    fk, fm = values[:len(knots)], values[len(knots):]
    fa, fb = fk[:-1], fk[1:]

    h = 0.5 * (b - a)
    slope = (fb - fa) / (2.0 * h)
    curv = (fb - 2.0 * fm + fa) / (2.0 * h * h)
    with np.errstate(divide="ignore", invalid="ignore"):
        vertex = mids - slope / (2.0 * curv)
    inside = (h > _MIN_PIECE) & (curv > 0) & (vertex > a) & (vertex < b)
    vertices = vertex[inside]

    points = knots
    point_values = fk
    if len(vertices):
        points = np.concatenate((knots, vertices))
        point_values = np.concatenate((fk, f(vertices)))

    best = float(np.min(point_values))
    tied = np.sort(points[point_values <= best + eps_tie])
    argmin = float(tied[-1])
    value = float(point_values[points == argmin][0])
    logger.debug("piecewise minimum %.12g at %.12g over %d pieces", value, argmin, len(a))
    return PiecewiseMinimum(argmin, value, tuple(float(t) for t in tied))

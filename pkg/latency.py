"""
Link latency functions.

Two families: affine ``a*x + b`` and the elbow
``max(offset, (L/delta)*(x - r) + L)``, flat up to a knee and then steep.
Both are callable on floats or numpy arrays of total link flow.
"""

from dataclasses import dataclass

import numpy as np

from config import FLOW_TOL
from errors import ConfigurationError, LatencyDomainError


def _as_flow(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < -FLOW_TOL):
        raise LatencyDomainError(f"latency evaluated at negative flow {np.min(arr):.12g}")
    return np.maximum(arr, 0.0)


def _out(arr):
    return float(arr) if arr.ndim == 0 else arr


@dataclass(frozen=True)
class Affine:
    """T(x) = a*x + b."""

    a: float = 0.0
    b: float = 0.0

    kind = "affine"

    def __post_init__(self):
        if not (self.a >= 0 and self.b >= 0):
            raise ConfigurationError(f"affine latency needs a >= 0 and b >= 0, got a={self.a}, b={self.b}")

    def __call__(self, x):
        return _out(self.a * _as_flow(x) + self.b)

    def slope(self, x):
        """Right derivative."""
        return _out(np.full_like(_as_flow(x), self.a))

    def integral(self, x):
        """Integral of T from 0 to x (Beckmann term)."""
        x = _as_flow(x)
        return _out(0.5 * self.a * x * x + self.b * x)

    def kink_points(self):
        return ()

    def to_dict(self):
        return {"kind": self.kind, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Elbow:
    """T(x) = max(offset, (L/delta)*(x - r) + L).

    ``r`` is the knee location, normally the per-player demand.
    """

    L: float
    delta: float
    r: float
    offset: float = 0.0

    kind = "elbow"

    def __post_init__(self):
        if not self.L > 0:
            raise ConfigurationError(f"elbow latency needs L > 0, got {self.L}")
        if not self.delta > 0:
            raise ConfigurationError(f"elbow latency needs delta > 0, got {self.delta}")
        if not self.r > 0:
            raise ConfigurationError(f"elbow latency needs r > 0, got {self.r}")
        if not self.offset >= 0:
            raise ConfigurationError(f"elbow latency needs offset >= 0, got {self.offset}")

    @property
    def gradient(self):
        """Slope L/delta of the ascending segment."""
        return self.L / self.delta

    @property
    def _onset(self):
        # where the ascending line crosses the offset; may be negative
        return self.r + (self.offset - self.L) / self.gradient

    def __call__(self, x):
        x = _as_flow(x)
        return _out(np.maximum(self.offset, self.gradient * (x - self.r) + self.L))

    def slope(self, x):
        """Right derivative; the ascending slope at the kink itself."""
        x = _as_flow(x)
        return _out(np.where(x >= self._onset, self.gradient, 0.0))

    def integral(self, x):
        x = _as_flow(x)
        x0 = self._onset
        excess = np.maximum(0.0, x - x0) ** 2 - max(0.0, -x0) ** 2
        return _out(self.offset * x + 0.5 * self.gradient * excess)

    def kink_points(self):
        return (max(0.0, self._onset),)

    def to_dict(self):
        return {"kind": self.kind, "L": self.L, "delta": self.delta, "r": self.r, "offset": self.offset}


def eval_latency(f, x):
    """Latency of ``f`` at total link flow ``x``."""
    return f(x)


def kink_points(f):
    """Ordered flows where ``f`` is not differentiable."""
    return list(f.kink_points())


def latency_from_dict(data):
    """Build a latency from its ``to_dict`` form."""
    data = dict(data)
    kind = data.pop("kind", None)
    cls = {Affine.kind: Affine, Elbow.kind: Elbow}.get(kind)
    if cls is None:
        raise ConfigurationError(f"unknown latency kind {kind!r}")
    try:
        return cls(**{k: float(v) for k, v in data.items()})
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigurationError):
            raise
        raise ConfigurationError(f"bad {kind} latency parameters: {e}") from e

"""Five-point central finite differences with a Richardson gate.

Derivatives are evaluated with step h and step h/2; if the two results
disagree beyond a relative tolerance the caller sees StepTooLarge.  The
h/2 estimate is the one returned.  Entropy curvatures lose accuracy
below h ~ 1e-4 in double precision, hence the conservative default step.
"""
from __future__ import annotations

from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import StepTooLarge

REL_TOL = 1e-4

# five-point central stencils on nodes (-2h, -h, 0, +h, +2h)
_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0

# node offsets in units of h/2 for the h-stencil and the h/2-stencil
_NODES_H = (-4, -2, 0, 2, 4)
_NODES_H2 = (-2, -1, 0, 1, 2)
ALL_OFFSETS = (-4, -2, -1, 0, 1, 2, 4)


def default_step(lam0: float) -> float:
    return 1e-3 * max(1.0, abs(lam0))


def stencil_points(lam0: float, h: float) -> list[float]:
    """All parameter values sampled by the paired h and h/2 stencils."""
    return [lam0 + k * (h / 2.0) for k in ALL_OFFSETS]


class SampledCurve:
    """Values of a curve at the seven stencil nodes of (lam0, h).

    Values may be scalars or arrays of any fixed shape; stencils apply
    componentwise.
    """

    def __init__(self, values: Mapping[int, np.ndarray], h: float):
        if h <= 0:
            raise ValueError("step must be positive")
        self.h = float(h)
        self._values = {k: np.asarray(v, dtype=float) for k, v in values.items()}

    @classmethod
    def sample(cls, f: Callable[[float], np.ndarray | float], lam0: float, h: float):
        pts = stencil_points(lam0, h)
        return cls({k: f(x) for k, x in zip(ALL_OFFSETS, pts)}, h)

    def at_center(self) -> np.ndarray:
        return self._values[0]

    def _apply(self, offsets: Sequence[int], coeffs: np.ndarray):
        return sum(c * self._values[k] for c, k in zip(coeffs, offsets))

    def first(self):
        """(estimate at h, estimate at h/2) of the first derivative."""
        d_h = self._apply(_NODES_H, _D1) / self.h
        d_h2 = self._apply(_NODES_H2, _D1) / (self.h / 2.0)
        return d_h, d_h2

    def second(self):
        """(estimate at h, estimate at h/2) of the second derivative."""
        d_h = self._apply(_NODES_H, _D2) / self.h**2
        d_h2 = self._apply(_NODES_H2, _D2) / (self.h / 2.0) ** 2
        return d_h, d_h2


def check_pair(coarse, fine, what: str, rel_tol: float = REL_TOL) -> None:
    """Raise StepTooLarge if the h and h/2 estimates disagree."""
    err = float(np.max(np.abs(np.asarray(fine) - np.asarray(coarse))))
    scale = max(1.0, float(np.max(np.abs(np.asarray(fine)))))
    if err > rel_tol * scale:
        raise StepTooLarge(f"{what}: Richardson disagreement {err:.3e} (scale {scale:.3e})")


def gated_first(f, lam0: float, h: float, what: str = "derivative"):
    coarse, fine = SampledCurve.sample(f, lam0, h).first()
    check_pair(coarse, fine, what)
    return fine


def gated_second(f, lam0: float, h: float, what: str = "second derivative"):
    coarse, fine = SampledCurve.sample(f, lam0, h).second()
    check_pair(coarse, fine, what)
    return fine

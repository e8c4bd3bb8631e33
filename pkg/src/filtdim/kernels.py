"""Radial filter kernels and their scalings.

A kernel is a radial profile G(r) >= 0, nonincreasing in r, together with
the closed-form profile H(r) of its negative radial derivative, so that for
g(x) = G(|x|) the function h(x) = -sum_j x_j dg/dx_j equals H(|x|).  The
rescaled kernel is g_eps(x) = eps^-delta * G(|x|/eps) and likewise for h.

H is supplied in closed form per kernel rather than by numeric
differentiation: the scale-derivative formulas consume h exactly, and a
closed form keeps derivative noise out of their integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

GAUSSIAN = "gaussian"
SMOOTH_BUMP = "smooth_bump"


@dataclass(frozen=True)
class RadialKernel:
    """Immutable radial kernel: profile G, negative radial derivative profile H.

    ``support`` is the radius beyond which G vanishes identically, or None
    for kernels of unbounded support.
    """

    kind: str
    profile: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    negderiv_profile: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    support: float | None = None
    params: tuple = ()

    def label(self) -> str:
        if self.kind == SMOOTH_BUMP:
            return f"bump:{self.params[0]:g},{self.params[1]:g}"
        return self.kind


def gaussian() -> RadialKernel:
    """G(r) = exp(-r^2), H(r) = 2 r^2 exp(-r^2)."""

    def profile(r):
        r = np.asarray(r, dtype=float)
        return np.exp(-r * r)

    def negderiv(r):
        r = np.asarray(r, dtype=float)
        return 2.0 * r * r * np.exp(-r * r)

    return RadialKernel(kind=GAUSSIAN, profile=profile, negderiv_profile=negderiv)


def smooth_bump(inner: float, outer: float) -> RadialKernel:
    """C^1 plateau kernel: 1 on [0, inner], 0 beyond ``outer``, cubic in between.

    The transition is the monotone smoothstep 1 - 3s^2 + 2s^3 with
    s = (r - inner)/(outer - inner), so H = -r G'(r) = 6 r s (1-s)/(outer-inner).
    """
    if not (0.0 < inner < outer):
        raise ValueError(f"need 0 < inner < outer, got inner={inner}, outer={outer}")
    width = outer - inner

    def profile(r):
        r = np.asarray(r, dtype=float)
        s = np.clip((r - inner) / width, 0.0, 1.0)
        return 1.0 - 3.0 * s * s + 2.0 * s ** 3

    def negderiv(r):
        r = np.asarray(r, dtype=float)
        s = np.clip((r - inner) / width, 0.0, 1.0)
        return 6.0 * r * s * (1.0 - s) / width

    return RadialKernel(
        kind=SMOOTH_BUMP,
        profile=profile,
        negderiv_profile=negderiv,
        support=float(outer),
        params=(float(inner), float(outer)),
    )


def _scaled(fn, eps: float, x) -> float:
    x = np.asarray(x, dtype=float).ravel()
    delta = x.size
    r = np.sqrt(np.sum(x * x)) / eps
    return float(fn(r)) * eps ** (-delta)


def eval_scaled(kernel: RadialKernel, eps: float, x) -> float:
    """g_eps(x) = eps^-delta G(|x|/eps); delta is the length of x."""
    if not eps > 0.0:
        raise ValueError("eps must be > 0")
    return _scaled(kernel.profile, eps, x)


def eval_scaled_negderiv(kernel: RadialKernel, eps: float, x) -> float:
    """h_eps(x) = eps^-delta H(|x|/eps)."""
    if not eps > 0.0:
        raise ValueError("eps must be > 0")
    return _scaled(kernel.negderiv_profile, eps, x)


def truncation_radius(kernel: RadialKernel, eps: float, tol: float) -> float:
    """Radius beyond which the scaled kernel's tail is negligible at ``tol``.

    For the Gaussian this is eps * sqrt(ln(2/tol) + 1); kernels of compact
    support return eps times that support.  The tolerance is relative to the
    kernel's peak values.
    """
    if not (0.0 < tol < 1.0):
        raise ValueError("tol must lie in (0, 1)")
    if kernel.support is not None:
        return eps * kernel.support
    if kernel.kind == GAUSSIAN:
        return eps * math.sqrt(math.log(2.0 / tol) + 1.0)
    raise ValueError(f"no truncation rule for kernel kind {kernel.kind!r}")


def parse_kernel(spec: str) -> RadialKernel:
    """Kernel from a CLI spec: ``gaussian`` or ``bump:INNER,OUTER``."""
    if spec == GAUSSIAN:
        return gaussian()
    if spec.startswith("bump:"):
        parts = spec[len("bump:"):].split(",")
        if len(parts) != 2:
            raise ValueError(f"bump kernel needs INNER,OUTER, got {spec!r}")
        return smooth_bump(float(parts[0]), float(parts[1]))
    raise ValueError(f"unknown kernel {spec!r} (expected gaussian or bump:INNER,OUTER)")

"""Partition functions for dimension estimation.

Seven interchangeable evaluators over a scale eps and exponent q:

  raw         sum of cell masses^q on the half-open eps-grid (no outer power)
  box         raw sum raised to 1/(q-1)
  ball-corr   measure integral of closed-ball masses^(q-1), power 1/(q-1)
  ball-leb    Lebesgue integral of closed-ball masses^q / eps^delta, power 1/(q-1)
  kernel-sum  lattice sum of smoothed cell masses^q, power 1/(q-1)
  kernel-corr measure integral of kernel-smoothed masses^(q-1), power 1/(q-1)
  kernel-leb  eps^delta * ||g_eps*mu||_q^(q/(q-1))

All six  powered forms carry the 1/(q-1) exponent inside, so a dimension
estimate is uniformly the slope of ln P against ln eps with no post-factor.
Balls are closed (|x| <= 1); the two-point-mass jump of the ball kinds at
eps equal to the atom separation depends on that convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .filterops import QuadratureSpec, convolve_at_atoms, lq_norm
from .kernels import RadialKernel, truncation_radius
from .measures import DiscreteMeasure, box_counts

RAW_SUM = "raw"
BOX_SUM = "box"
BALL_CORRELATION = "ball-corr"
BALL_LEBESGUE = "ball-leb"
KERNEL_LATTICE_SUM = "kernel-sum"
KERNEL_CORRELATION = "kernel-corr"
KERNEL_LEBESGUE = "kernel-leb"

KIND_NAMES = (
    RAW_SUM,
    BOX_SUM,
    BALL_CORRELATION,
    BALL_LEBESGUE,
    KERNEL_LATTICE_SUM,
    KERNEL_CORRELATION,
    KERNEL_LEBESGUE,
)
_KERNEL_KINDS = frozenset({KERNEL_LATTICE_SUM, KERNEL_CORRELATION, KERNEL_LEBESGUE})
_LEBESGUE_KINDS = frozenset({BALL_LEBESGUE, KERNEL_LEBESGUE})
# raw, box and the lattice kernel sum accept any 0 < q != 1; the rest need q > 1
_WIDE_Q_KINDS = frozenset({RAW_SUM, BOX_SUM, KERNEL_LATTICE_SUM})


@dataclass(frozen=True)
class PartitionKind:
    """A partition-function choice; kernel kinds carry their kernel."""

    tag: str
    kernel: RadialKernel | None = None

    def __post_init__(self):
        if self.tag not in KIND_NAMES:
            raise ValueError(f"unknown partition kind {self.tag!r}; choose from {KIND_NAMES}")
        if self.tag in _KERNEL_KINDS and self.kernel is None:
            raise ValueError(f"partition kind {self.tag!r} requires a kernel")
        if self.tag not in _KERNEL_KINDS and self.kernel is not None:
            raise ValueError(f"partition kind {self.tag!r} must not carry a kernel")


def make_kind(tag: str, kernel: RadialKernel | None = None) -> PartitionKind:
    """PartitionKind from a tag name, attaching the kernel only where needed."""
    return PartitionKind(tag, kernel if tag in _KERNEL_KINDS else None)


def _check_q(tag: str, q: float) -> None:
    if tag in _WIDE_Q_KINDS:
        if not (q > 0.0 and q != 1.0):
            raise ValueError(f"{tag} requires q > 0, q != 1, got {q}")
    elif not q > 1.0:
        raise ValueError(f"{tag} requires q > 1, got {q}")


def raw_sum(mu: DiscreteMeasure, eps: float, q: float) -> float:
    """Sum over grid cells of mass^q (the un-powered entropy sum)."""
    _check_q(RAW_SUM, q)
    masses = box_counts(mu, eps).masses()
    return float(np.sum(masses ** q))


def _ball_masses(mu: DiscreteMeasure, centers: np.ndarray, eps: float) -> np.ndarray:
    """mu(x + eps*B) for each row x of centers; B the closed unit ball."""
    if mu.dim == 1:
        order = np.argsort(mu.points[:, 0], kind="stable")
        pos = mu.points[order, 0]
        cum = np.concatenate([[0.0], np.cumsum(mu.weights[order])])
        x = centers[:, 0]
        hi = np.searchsorted(pos, x + eps, side="right")
        lo = np.searchsorted(pos, x - eps, side="left")
        return cum[hi] - cum[lo]
    out = np.empty(centers.shape[0])
    eps2 = eps * eps
    chunk = max(1, int(4e6) // max(mu.n_atoms, 1))
    for i0 in range(0, centers.shape[0], chunk):
        block = centers[i0:i0 + chunk]
        d2 = np.sum((block[:, None, :] - mu.points[None, :, :]) ** 2, axis=2)
        out[i0:i0 + block.shape[0]] = (d2 <= eps2) @ mu.weights
    return out


def _lattice_axes(mu: DiscreteMeasure, kernel: RadialKernel, eps: float, q: float,
                  margin_scale: float) -> tuple[np.ndarray, list[np.ndarray]]:
    # Tolerance tight enough that omitted lattice terms, raised to the power q,
    # stay below 1e-9 relative even for q < 1.
    tol = 1e-12 if q >= 1.0 else max(10.0 ** (-24.0 / q), 1e-300)
    margin = int(math.ceil(truncation_radius(kernel, 1.0, tol) * margin_scale)) + 1
    z = mu.points / eps
    axes = []
    for d in range(mu.dim):
        j0 = int(math.floor(z[:, d].min())) - margin
        j1 = int(math.ceil(z[:, d].max())) + margin
        axes.append(np.arange(j0, j1 + 1))
    return z, axes


def _kernel_lattice_sum(mu: DiscreteMeasure, kernel: RadialKernel, eps: float,
                        q: float, margin_scale: float = 1.0) -> float:
    """sum over lattice j of (sum_k w_k G(|j - y_k/eps|))^q, truncated by decay."""
    z, axes = _lattice_axes(mu, kernel, eps, q, margin_scale)
    if mu.dim == 1:
        lat = axes[0]
        r = np.abs(lat[None, :] - z[:, :1])
        inner = mu.weights @ kernel.profile(r)
    else:
        shape = tuple(len(ax) for ax in axes)
        inner = np.zeros(shape)
        for a in range(mu.n_atoms):
            offs = [axes[d] - z[a, d] for d in range(mu.dim)]
            r2 = offs[0] ** 2
            for d in range(1, mu.dim):
                r2 = r2[..., None] + offs[d] ** 2
            inner += mu.weights[a] * kernel.profile(np.sqrt(r2))
        inner = inner.ravel()
    return float(np.sum(inner ** q))


def evaluate(
    kind: PartitionKind,
    mu: DiscreteMeasure,
    eps: float,
    q: float,
    quad: QuadratureSpec | None = None,
) -> float:
    """P(eps) for the chosen partition kind."""
    if not eps > 0.0:
        raise ValueError("eps must be > 0")
    _check_q(kind.tag, q)
    if kind.tag in _LEBESGUE_KINDS and quad is None:
        raise ValueError(f"partition kind {kind.tag!r} requires a quadrature spec")
    delta = mu.dim
    inv_qm1 = 1.0 / (q - 1.0)

    if kind.tag == RAW_SUM:
        return raw_sum(mu, eps, q)
    if kind.tag == BOX_SUM:
        return raw_sum(mu, eps, q) ** inv_qm1
    if kind.tag == BALL_CORRELATION:
        m = _ball_masses(mu, mu.points, eps)
        return float(np.sum(mu.weights * m ** (q - 1.0))) ** inv_qm1
    if kind.tag == BALL_LEBESGUE:
        h = eps / quad.points_per_scale
        lows = mu.points.min(axis=0) - (eps + h)
        highs = mu.points.max(axis=0) + (eps + h)
        counts = np.ceil((highs - lows) / h).astype(np.int64) + 1
        axes = [lows[d] + (np.arange(counts[d]) + 0.5) * h for d in range(delta)]
        grids = np.meshgrid(*axes, indexing="ij")
        centers = np.stack([g.ravel() for g in grids], axis=1)
        m = _ball_masses(mu, centers, eps)
        integral = float(np.sum(m ** q)) * h ** delta / eps ** delta
        return integral ** inv_qm1
    if kind.tag == KERNEL_LATTICE_SUM:
        return _kernel_lattice_sum(mu, kind.kernel, eps, q) ** inv_qm1
    if kind.tag == KERNEL_CORRELATION:
        vals = convolve_at_atoms(mu, kind.kernel, eps) * eps ** delta
        return float(np.sum(mu.weights * vals ** (q - 1.0))) ** inv_qm1
    if kind.tag == KERNEL_LEBESGUE:
        return eps ** delta * lq_norm(mu, kind.kernel, eps, q, quad) ** (q * inv_qm1)
    raise AssertionError(f"unhandled kind {kind.tag!r}")


def ratio_correlation_vs_boxes(
    mu: DiscreteMeasure, kernel: RadialKernel, eps_list, q: float
) -> list[float]:
    """eps^delta ||g_eps*mu||_{mu,q-1} / (raw sum)^(1/(q-1)) per scale.

    Bounded above and (for kernels positive at 0) below uniformly in eps;
    the tests assert boundedness of the sweep, not a value.
    """
    if not q > 1.0:
        raise ValueError("q must be > 1")
    out = []
    for eps in eps_list:
        vals = convolve_at_atoms(mu, kernel, eps)
        corr = float(np.sum(mu.weights * vals ** (q - 1.0))) ** (1.0 / (q - 1.0))
        denom = raw_sum(mu, eps, q) ** (1.0 / (q - 1.0))
        out.append(eps ** mu.dim * corr / denom)
    return out


def ratio_kernel_sum_vs_boxes(
    mu: DiscreteMeasure, kernel: RadialKernel, eps_list, q: float
) -> list[float]:
    """Lattice kernel sum over the raw box sum, per scale."""
    _check_q(KERNEL_LATTICE_SUM, q)
    out = []
    for eps in eps_list:
        out.append(_kernel_lattice_sum(mu, kernel, eps, q) / raw_sum(mu, eps, q))
    return out


@dataclass(frozen=True)
class JumpCheck:
    """Result of the sampled-curve continuity check."""

    passed: bool
    worst_jump: float
    worst_index: int
    worst_allowance: float


def no_jump_exceeds(values, step: float, factor: float = 5.0) -> JumpCheck:
    """Check that no adjacent jump of a sampled curve exceeds ``factor`` times
    the locally estimated slope times the step.

    The local slope at a gap is estimated from the neighboring gaps, so a
    curve that is merely steep passes while an O(1) discontinuity on a
    1000-point grid fails.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 4:
        raise ValueError("need at least 4 samples")
    jumps = np.abs(np.diff(v))
    floor = 1e-12 * (np.max(np.abs(v)) + 1.0)
    passed = True
    worst = (0.0, 0, np.inf)
    for i in range(jumps.size):
        neighbors = []
        if i > 0:
            neighbors.append(jumps[i - 1])
        if i + 1 < jumps.size:
            neighbors.append(jumps[i + 1])
        allowance = factor * max(neighbors) + floor
        if jumps[i] > allowance:
            passed = False
        if jumps[i] - allowance > worst[0] - worst[2]:
            worst = (float(jumps[i]), i, float(allowance))
    return JumpCheck(passed=passed, worst_jump=worst[0], worst_index=worst[1],
                     worst_allowance=worst[2])

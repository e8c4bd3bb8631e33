"""Scale schedules and the growth of adjacent-scale norm differences.

A power schedule eps_n = n^-t keeps the differences
|  ||g_{eps_n}*mu||_q - ||g_{eps_{n-1}}*mu||_q  | sub-polynomial in n exactly
when t does not exceed the critical exponent q/((q-1)(delta - D)), D the
lower generalized dimension; geometric schedules eps_n = 2^-n blow the
differences up exponentially whenever D < delta.  This module computes the
schedules, the difference statistics that classify membership in the
sub-polynomial regime, and the critical exponent.

The for-all-alpha decay condition is operationalized as the single statistic
m_hat = tail max of ln(diff_n)/ln(n) being <= 0 (up to a one-sided slack of
0.1 for finite-n bias: the boundary t is inside the admissible interval and
the bias is positive).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeriesError
from .filterops import DEFAULT_QUAD, QuadratureSpec, lq_norm
from .kernels import RadialKernel
from .measures import DiscreteMeasure

POWER = "power"
GEOMETRIC = "geometric"

# one-sided membership slack on m_hat; finite-n bias is upward only
IN_IQ_TOLERANCE = 0.1

_TAIL_FRACTION = 0.6


@dataclass(frozen=True)
class ScaleSchedule:
    """eps_n = n^-t (power) or eps_n = 2^-n (geometric) for n in [n_start, n_stop].

    n starts at 2: the ratio statistics divide by ln(n).
    """

    kind: str
    n_start: int
    n_stop: int
    t: float | None = None

    def __post_init__(self):
        if self.kind not in (POWER, GEOMETRIC):
            raise ValueError(f"schedule kind must be {POWER!r} or {GEOMETRIC!r}")
        if self.n_start < 2:
            raise ValueError("n_start must be >= 2")
        if self.n_stop < self.n_start + 1:
            raise ValueError("need at least two schedule entries")
        if self.kind == POWER:
            if self.t is None or not self.t > 0.0:
                raise ValueError("power schedule needs t > 0")
        elif self.t is not None:
            raise ValueError("geometric schedule takes no exponent")

    def n_values(self) -> np.ndarray:
        return np.arange(self.n_start, self.n_stop + 1)

    def eps_values(self) -> np.ndarray:
        n = self.n_values().astype(float)
        if self.kind == POWER:
            return n ** (-self.t)
        return 2.0 ** (-n)


def power_schedule(t: float, n_start: int = 2, n_stop: int = 64) -> ScaleSchedule:
    return ScaleSchedule(kind=POWER, n_start=n_start, n_stop=n_stop, t=t)


def geometric_schedule(n_start: int = 2, n_stop: int = 12) -> ScaleSchedule:
    return ScaleSchedule(kind=GEOMETRIC, n_start=n_start, n_stop=n_stop)


@dataclass(frozen=True)
class ScheduleReport:
    """Norms along a schedule with the difference-growth classification.

    ``diffs[i]`` is |norms[i+1] - norms[i]| (one fewer entry than norms).
    ``m_hat`` is the tail max of ln(diff)/ln(n) for power schedules and the
    least-squares slope of ln(diff) against n for geometric ones; zero diffs
    enter as ln(0) = -inf and are excluded from fits.  ``d_hat`` is the
    fitted growth order of the norm in x = 1/eps, and ``critical_t`` its
    reciprocal (+inf when the norm does not grow).
    """

    schedule: ScaleSchedule
    q: float
    n: np.ndarray
    eps: np.ndarray
    norms: np.ndarray
    diffs: np.ndarray
    m_hat: float
    d_hat: float
    critical_t: float
    in_iq: bool


def critical_exponent(q: float, dim: int, d_lower: float) -> float:
    """Largest admissible power-law rate t* = q/((q-1)(delta - d)), +inf at d = delta.

    ``d_lower`` may carry estimator noise; it is clamped to [0, delta].
    """
    if not q > 1.0:
        raise ValueError("q must be > 1")
    if not (-0.1 <= d_lower <= dim + 0.1):
        raise ValueError(f"d_lower={d_lower} is not a plausible dimension for delta={dim}")
    d = min(max(d_lower, 0.0), float(dim))
    if dim - d <= 1e-9:
        return math.inf
    return q / ((q - 1.0) * (dim - d))


def _tail_start(n_points: int) -> int:
    return min(int(math.floor((1.0 - _TAIL_FRACTION) * n_points)), n_points - 1)


def run_schedule(
    mu: DiscreteMeasure,
    kernel: RadialKernel,
    schedule: ScaleSchedule,
    q: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> ScheduleReport:
    """Norms, adjacent differences, and growth statistics along a schedule."""
    n = schedule.n_values()
    eps = schedule.eps_values()
    norms = np.array([lq_norm(mu, kernel, float(e), q, quad) for e in eps])
    diffs = np.abs(np.diff(norms))

    ln_x = schedule.t * np.log(n) if schedule.kind == POWER else n * math.log(2.0)
    k0 = _tail_start(n.size)
    d_hat = float(np.polyfit(ln_x[k0:], np.log(norms[k0:]), 1)[0])
    critical_t = math.inf if d_hat <= 1e-9 else 1.0 / d_hat

    diff_n = n[1:]
    finite = diffs > 0.0
    if schedule.kind == POWER:
        ratios = np.where(finite, np.log(np.where(finite, diffs, 1.0)), -np.inf)
        ratios = ratios / np.log(diff_n)
        fin = ratios[np.isfinite(ratios)]
        if fin.size == 0:
            m_hat = -math.inf
        else:
            m_hat = float(np.max(fin[_tail_start(fin.size):]))
    else:
        if int(np.sum(finite)) >= 2:
            m_hat = float(np.polyfit(diff_n[finite], np.log(diffs[finite]), 1)[0])
        else:
            m_hat = -math.inf
    return ScheduleReport(
        schedule=schedule,
        q=float(q),
        n=n,
        eps=eps,
        norms=norms,
        diffs=diffs,
        m_hat=m_hat,
        d_hat=d_hat,
        critical_t=critical_t,
        in_iq=bool(m_hat <= IN_IQ_TOLERANCE),
    )


def geometric_blowup_stat(report: ScheduleReport) -> float:
    """Least-squares slope of ln(diff_n) against n for a geometric schedule.

    Positive slope is the exponential blow-up of the difference sequence;
    the expected value is ln(2) (q-1)/q (delta - D) when D < delta.
    """
    if report.schedule.kind != GEOMETRIC:
        raise ValueError("blow-up statistic is defined for geometric schedules")
    finite = report.diffs > 0.0
    if int(np.sum(finite)) < 8:
        raise DegenerateSeriesError("need at least 8 finite differences")
    n = report.n[1:][finite]
    return float(np.polyfit(n, np.log(report.diffs[finite]), 1)[0])


def report_to_rows(report: ScheduleReport) -> list[dict]:
    """CSV-ready rows: n, eps, norm, diff, ln_diff, ratio.

    ``ratio`` is ln(diff)/ln(n) for power schedules and ln(diff)/n for
    geometric ones; the first row has no difference.
    """
    rows = []
    nan = float("nan")
    for i, (ni, ei, fi) in enumerate(zip(report.n, report.eps, report.norms)):
        if i == 0:
            rows.append({"n": int(ni), "eps": float(ei), "norm": float(fi),
                         "diff": nan, "ln_diff": nan, "ratio": nan})
            continue
        d = float(report.diffs[i - 1])
        ln_d = math.log(d) if d > 0.0 else -math.inf
        denom = math.log(ni) if report.schedule.kind == POWER else float(ni)
        rows.append({"n": int(ni), "eps": float(ei), "norm": float(fi),
                     "diff": d, "ln_diff": ln_d, "ratio": ln_d / denom})
    return rows

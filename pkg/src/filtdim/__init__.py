"""Gaussian-filtered norms of atomic measures, partition functions for
generalized dimensions, and scale schedules governed by them."""

from .errors import DegenerateSeriesError, FiltdimError, ScaleOutOfRangeError
from .measures import (
    ATOM_CAP,
    BoxCounts,
    DiscreteMeasure,
    box_counts,
    from_pgm_image,
    load_json,
    make_cantor,
    make_point_masses,
    make_random,
    make_uniform_grid,
    nearest_neighbor_distance,
    normalized,
    point_mass,
    save_json,
    support_radius,
    total_mass,
    two_point,
)
from .kernels import (
    RadialKernel,
    eval_scaled,
    eval_scaled_negderiv,
    gaussian,
    parse_kernel,
    smooth_bump,
    truncation_radius,
)
from .filterops import (
    BoundsCheck,
    NormDerivativeReport,
    QuadratureSpec,
    check_slope_bounds,
    convolve_at,
    convolve_at_atoms,
    correlation_log_derivative,
    lq_norm,
    lq_norm_oracle_gaussian,
    mu_norm,
    norm_derivative,
)
from .partitions import (
    KIND_NAMES,
    JumpCheck,
    PartitionKind,
    evaluate,
    make_kind,
    no_jump_exceeds,
    raw_sum,
    ratio_correlation_vs_boxes,
    ratio_kernel_sum_vs_boxes,
)
from .dimension import (
    GuerinCheck,
    LogLogSeries,
    OrderEstimate,
    estimate_orders,
    guerin_exponent_check,
    renyi_dimension,
    sample_series,
    series_to_rows,
)
from .schedule import (
    ScaleSchedule,
    ScheduleReport,
    critical_exponent,
    geometric_blowup_stat,
    geometric_schedule,
    power_schedule,
    report_to_rows,
    run_schedule,
)

__version__ = "0.1.0"

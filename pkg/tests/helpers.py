"""Shared fixtures: the extremal configurations of f/g and small samplers.

WORST_ROUNDED stores the ratio minimizer rounded to four decimal places; at
that precision it misses the pair-table feasibility boundary by exactly
1e-4 (with alpha_1 = alpha_2 = 0 the boundary is alpha_3 = x_3 + w_3 - 1 =
0.0394, and 0.0393 is the rounded value).  WORST_REPAIRED restores the
boundary.  Ratio-valued checks use the rounded numbers; feasibility-
dependent paths use the repaired variant.  Both have f/g within 2e-4 of
0.8192, and the multistart estimator converges to the repaired value
0.8193283.
"""

from max3section.configspace import Configuration

WORST_ROUNDED = Configuration.from_alpha(
    (0.4146, 0.0657, 0.5197),
    (0.0657, 0.4146, 0.5197),
    (0.0, 0.0, 0.0393),
)

WORST_REPAIRED = Configuration.from_alpha(
    (0.4146, 0.0657, 0.5197),
    (0.0657, 0.4146, 0.5197),
    (0.0, 0.0, 0.5197 + 0.5197 - 1.0),
)

# fixed-order extremal configuration (no random generation order)
NOPERM_CONFIG = Configuration.from_alpha(
    (0.25, 0.25, 0.5),
    (0.25, 0.25, 0.5),
    (0.0, 0.0, 0.0),
)


def identical_vertex_config(x=(0.2, 0.3, 0.5)) -> Configuration:
    """u and v share the same vectors: alpha = x = w, perfect correlations."""
    return Configuration(tuple(x), tuple(x), tuple(x), (1.0, 1.0, 1.0))


INTEGRAL_OPPOSITE = Configuration.from_alpha(
    (1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (0.0, 0.0, 0.0),
)

"""
Levi-Civita connection and Ricci tensor of catalog metrics.

Only derivatives w.r.t. the two non-ignorable coordinates are nonzero.
"""

import logging
from typing import List, Tuple

from .exact_algebra import ZERO, RatFunc, diff
from .metric_catalog import Matrix4, MetricSpec

logger = logging.getLogger(__name__)

Christoffel = Tuple[Tuple[Tuple[RatFunc, ...], ...], ...]

_COORDINATE_VARS = ("x", "y")


def partial(f: RatFunc, index: int) -> RatFunc:
    """Derivative w.r.t. coordinate number `index` (0..3); zero for phi and t."""
    if index < 2:
        return diff(f, _COORDINATE_VARS[index])
    return ZERO


def christoffel(metric: MetricSpec) -> Christoffel:
    """
    Gamma^a_{bc} = 1/2 g^{ad} (d_b g_{dc} + d_c g_{db} - d_d g_{bc}).
    """
    g = metric.g
    ginv = metric.inverse
    dg = [[[partial(g[b][c], a) for c in range(4)] for b in range(4)] for a in range(4)]

    # lowered[d][b][c] = Gamma_{d b c}
    lowered: List[List[List[RatFunc]]] = [[[ZERO] * 4 for _ in range(4)] for _ in range(4)]
    for d in range(4):
        for b in range(4):
            for c in range(b, 4):
                value = (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]) / 2
                lowered[d][b][c] = value
                lowered[d][c][b] = value

    gamma = [[[ZERO] * 4 for _ in range(4)] for _ in range(4)]
    for a in range(4):
        for b in range(4):
            for c in range(b, 4):
                value = ZERO
                for d in range(4):
                    if ginv[a][d] and lowered[d][b][c]:
                        value += ginv[a][d] * lowered[d][b][c]
                gamma[a][b][c] = value
                gamma[a][c][b] = value
    return tuple(tuple(tuple(row) for row in block) for block in gamma)


def ricci(metric: MetricSpec) -> Matrix4:
    """
    R_{bd} = d_a Gamma^a_{bd} - d_d Gamma^a_{ba} + Gamma^a_{ae} Gamma^e_{bd} - Gamma^a_{de} Gamma^e_{ba}.
    """
    gamma = christoffel(metric)
    trace = [sum((gamma[a][a][e] for a in range(4)), ZERO) for e in range(4)]

    result = [[ZERO] * 4 for _ in range(4)]
    for b in range(4):
        for d in range(b, 4):
            value = ZERO
            for a in range(2):
                value += partial(gamma[a][b][d], a)
            value -= partial(trace[b], d)
            for e in range(4):
                if trace[e] and gamma[e][b][d]:
                    value += trace[e] * gamma[e][b][d]
                for a in range(4):
                    if gamma[a][d][e] and gamma[e][b][a]:
                        value -= gamma[a][d][e] * gamma[e][b][a]
            result[b][d] = value
            result[d][b] = value
    logger.debug(f"Computed Ricci tensor of {metric.name}")
    return tuple(tuple(row) for row in result)


def is_ricci_flat(metric: MetricSpec) -> bool:
    return not any(entry for row in ricci(metric) for entry in row)

"""
Catalog of stationary axisymmetric metrics in exact rational form.

Every metric depends only on the two non-ignorable coordinates, which are
always mapped onto the generators x and y of the rational function field.
"""

import logging
from dataclasses import dataclass, field as dataclass_field
from functools import cached_property
from typing import Dict, List, Sequence, Tuple

from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from .errors import MetricValidationError, SingularMetricError, UnknownMetricError
from .exact_algebra import (
    FIELD,
    ONE,
    RING,
    X,
    Y,
    ZERO,
    BiPoly,
    Point,
    Rat,
    RatFunc,
    format_point,
    poly_value,
    rat,
)
from .momentum_poly import PPHI, PT, PX, PY, MomPoly

logger = logging.getLogger(__name__)

Matrix4 = Tuple[Tuple[RatFunc, ...], ...]

RX, RY = RING.gens
_FIELD_DOMAIN = FIELD.to_domain()


@dataclass(frozen=True)
class MetricSpec:
    """
    A metric g on (x, y, phi, t) with components depending on (x, y) only.
    """
    name: str
    coords: Tuple[str, str, str, str]
    g: Matrix4
    static_flag: bool
    excluded_locus: Tuple[BiPoly, ...] = ()
    suggested_points: Tuple[Point, ...] = ()
    params: Tuple[Tuple[str, Rat], ...] = ()
    description: str = dataclass_field(default="", compare=False)

    def component(self, a: int, b: int) -> RatFunc:
        return self.g[a][b]

    @property
    def param_map(self) -> Dict[str, Rat]:
        return dict(self.params)

    @cached_property
    def determinant(self) -> RatFunc:
        return DomainMatrix([list(row) for row in self.g], (4, 4), _FIELD_DOMAIN).det()

    @cached_property
    def inverse(self) -> Matrix4:
        return _invert(self)

    @cached_property
    def hamiltonian(self) -> MomPoly:
        return _hamiltonian(self)

    def denominators(self) -> List[BiPoly]:
        """Denominators of the metric and of its inverse."""
        dens = {entry.denom for row in self.g for entry in row}
        dens.update(entry.denom for row in self.inverse for entry in row)
        return sorted(dens, key=lambda p: sorted(p.items()))

    def is_admissible(self, point: Point) -> bool:
        """True if the point avoids the excluded locus and every component denominator."""
        polys = list(self.excluded_locus) + self.denominators()
        return all(poly_value(p, point) for p in polys)

    def validate(self) -> None:
        """
        Check symmetry, nondegeneracy and consistency of the static flag.

        Raises:
            MetricValidationError: naming the failed check
        """
        for a in range(4):
            for b in range(a + 1, 4):
                if self.g[a][b] != self.g[b][a]:
                    raise MetricValidationError(
                        "symmetry", f"g[{a}][{b}] differs from g[{b}][{a}] in metric {self.name!r}"
                    )
        if not self.determinant:
            raise MetricValidationError("nondegeneracy", f"det(g) vanishes identically for {self.name!r}")
        has_cross_term = bool(self.g[2][3])
        if self.static_flag and has_cross_term:
            raise MetricValidationError("static-flag", "static metric must not have a dphi*dt cross term")
        if not self.static_flag and not has_cross_term:
            raise MetricValidationError("static-flag", "metric without dphi*dt cross term must be declared static")
        for point in self.suggested_points:
            if not self.is_admissible(point):
                raise MetricValidationError(
                    "suggested-point", f"point ({format_point(point)}) hits the excluded locus of {self.name!r}"
                )


def symmetric(entries: Dict[Tuple[int, int], RatFunc]) -> Matrix4:
    """Build a symmetric 4x4 matrix from upper-triangle entries (default zero)."""
    rows = [[ZERO] * 4 for _ in range(4)]
    for (a, b), value in entries.items():
        rows[a][b] = value
        rows[b][a] = value
    return tuple(tuple(row) for row in rows)


def _invert(metric: MetricSpec) -> Matrix4:
    if not metric.determinant:
        raise SingularMetricError(f"Metric {metric.name!r} is singular")
    matrix = DomainMatrix([list(row) for row in metric.g], (4, 4), _FIELD_DOMAIN)
    try:
        inverse = matrix.inv()
    except (DMNonInvertibleMatrixError, ZeroDivisionError) as e:
        raise SingularMetricError(f"Metric {metric.name!r} is singular") from e
    return tuple(tuple(row) for row in inverse.to_list())


def inverse(metric: MetricSpec) -> Matrix4:
    """Exact inverse metric g^{ab}."""
    return metric.inverse


def _hamiltonian(metric: MetricSpec) -> MomPoly:
    momenta = [MomPoly.momentum(index) for index in (PX, PY, PPHI, PT)]
    ginv = metric.inverse
    h = MomPoly.zero()
    for a in range(4):
        for b in range(a, 4):
            if not ginv[a][b]:
                continue
            factor = ginv[a][b] if a == b else 2 * ginv[a][b]
            h = h + momenta[a] * momenta[b] * factor
    return h


def hamiltonian(metric: MetricSpec) -> MomPoly:
    """H = g^{ab} p_a p_b (no factor 1/2)."""
    return metric.hamiltonian


# Catalog -------------------------------------------------------------------


def tomimatsu_sato_2(p: Rat = QQ(3, 5), q: Rat = QQ(4, 5), kappa: Rat = QQ(2)) -> MetricSpec:
    """Tomimatsu-Sato metric with delta=2 in prolate spheroidal coordinates."""
    if p**2 + q**2 != 1:
        raise MetricValidationError("parameters", "Tomimatsu-Sato parameters must satisfy p^2 + q^2 = 1")
    x, y = X, Y
    mu = p**2 * (x**2 - 1)**2 + q**2 * (1 - y**2)**2
    nu = 4 * x * (p * x**2 + 2 * x + p)
    sigma = 2 * p * q * (x**2 - y**2)
    tau = -4 * q / p * (1 - y**2) * (p * x + 1)
    numerator = mu**2 - (x**2 - 1) * (1 - y**2) * sigma**2
    f = numerator / (mu**2 + mu * nu - (1 - y**2) * ((x**2 - 1) * sigma**2 - sigma * tau))
    e2gamma = numerator / (p**4 * (x**2 - y**2)**4)
    omega = -kappa * (1 - y**2) * ((x**2 - 1) * sigma * nu + mu * tau) / numerator

    conformal = kappa**2 / f
    g = symmetric({
        (0, 0): conformal * e2gamma * (x**2 - y**2) / (x**2 - 1),
        (1, 1): conformal * e2gamma * (x**2 - y**2) / (1 - y**2),
        (2, 2): conformal * (x**2 - 1) * (1 - y**2) - f * omega**2,
        (2, 3): f * omega,
        (3, 3): -f,
    })
    return MetricSpec(
        name="ts2",
        coords=("x", "y", "phi", "t"),
        g=g,
        static_flag=False,
        excluded_locus=(RX**2 - 1, 1 - RY**2, RX**2 - RY**2, numerator.numer),
        suggested_points=((rat("1/2"), rat(2)), (rat("1/3"), rat("5/2"))),
        params=(("delta", QQ(2)), ("kappa", kappa), ("p", p), ("q", q)),
        description="Tomimatsu-Sato delta=2",
    )


def darmois() -> MetricSpec:
    """Zipoy-Voorhees metric with delta=2 (Darmois solution)."""
    x, y = X, Y
    ratio = (x + 1) / (x - 1)
    prefactor = ratio**2 * (x**2 - y**2) * ((x**2 - 1) / (x**2 - y**2))**4
    g = symmetric({
        (0, 0): prefactor / (x**2 - 1),
        (1, 1): prefactor / (1 - y**2),
        (2, 2): ratio**2 * (x**2 - 1) * (1 - y**2),
        (3, 3): -(1 / ratio)**2,
    })
    return MetricSpec(
        name="darmois",
        coords=("x", "y", "phi", "t"),
        g=g,
        static_flag=True,
        excluded_locus=(RX - 1, RX + 1, RX**2 - RY**2, 1 - RY**2),
        suggested_points=((rat("1/2"), rat(2)), (rat("1/3"), rat("5/2"))),
        params=(("delta", QQ(2)),),
        description="Darmois (Zipoy-Voorhees delta=2)",
    )


def c_metric(alpha: Rat = QQ(1, 2), m: Rat = QQ(1, 2)) -> MetricSpec:
    """C-metric in the Hong-Teo form."""
    x, y = X, Y
    big_x = (1 - x**2) * (1 + 2 * m * alpha * x)
    big_y = (y**2 - 1) * (1 - 2 * m * alpha * y)
    conformal = 1 / (alpha**2 * (x + y)**2)
    g = symmetric({
        (0, 0): conformal / big_x,
        (1, 1): conformal / big_y,
        (2, 2): conformal * big_x,
        (3, 3): -conformal * big_y,
    })
    return MetricSpec(
        name="cmetric",
        coords=("x", "y", "phi", "t"),
        g=g,
        static_flag=True,
        excluded_locus=(RX + RY, big_x.numer, big_y.numer),
        suggested_points=((rat(0), rat("3/2")), (rat("1/3"), rat("7/5"))),
        params=(("alpha", alpha), ("m", m)),
        description="C-metric (Hong-Teo form)",
    )


def kerr_extreme() -> MetricSpec:
    """
    Extreme Kerr metric (a = 1) in Boyer-Lindquist coordinates with chi = cos(theta).

    sin^2(theta) becomes 1 - chi^2 and d(theta)^2 becomes d(chi)^2 / (1 - chi^2).
    """
    r, chi = X, Y
    rho2 = r**2 + chi**2
    sin2 = 1 - chi**2
    p_a = chi**2 * r**2 + r**4 - 2 * chi**2 * r + chi**2 + r**2 + 2 * r
    g = symmetric({
        (0, 0): rho2 / (r**2 - 2 * r + 1),
        (1, 1): rho2 / sin2,
        (2, 2): p_a * sin2 / rho2,
        (2, 3): -2 * sin2 * r / rho2,
        (3, 3): -(r**2 - 2 * r + chi**2) / rho2,
    })
    return MetricSpec(
        name="kerr_extreme",
        coords=("r", "chi", "phi", "t"),
        g=g,
        static_flag=False,
        excluded_locus=(RX - 1, 1 - RY**2, RX**2 + RY**2),
        suggested_points=((rat(2), rat("1/2")), (rat(3), rat("1/3"))),
        params=(("a", QQ(1)), ("M", QQ(1))),
        description="extreme Kerr, rationalized chi = cos(theta)",
    )


def flat_cylindrical() -> MetricSpec:
    """Minkowski space in cylindrical coordinates, used as a positive control."""
    g = symmetric({
        (0, 0): ONE,
        (1, 1): ONE,
        (2, 2): X**2,
        (3, 3): -ONE,
    })
    return MetricSpec(
        name="flat_cyl",
        coords=("x", "y", "phi", "t"),
        g=g,
        static_flag=True,
        excluded_locus=(RX,),
        suggested_points=((rat(2), rat("1/3")), (rat("3/2"), rat("2/5"))),
        description="flat space-time, cylindrical coordinates",
    )


BUILTIN_METRICS = {
    "ts2": tomimatsu_sato_2,
    "darmois": darmois,
    "cmetric": c_metric,
    "kerr_extreme": kerr_extreme,
    "flat_cyl": flat_cylindrical,
}

_BUILTIN_CACHE: Dict[str, MetricSpec] = {}


def builtin(name: str) -> MetricSpec:
    """
    Fully substituted catalog metric.

    Raises:
        UnknownMetricError: if the name is not in the catalog
    """
    if name not in BUILTIN_METRICS:
        raise UnknownMetricError(f"Unknown metric {name!r}; available: {', '.join(sorted(BUILTIN_METRICS))}")
    if name not in _BUILTIN_CACHE:
        metric = BUILTIN_METRICS[name]()
        metric.validate()
        logger.debug(f"Built catalog metric {name}")
        _BUILTIN_CACHE[name] = metric
    return _BUILTIN_CACHE[name]


def metric_product(g: Matrix4, h: Sequence[Sequence[RatFunc]]) -> Matrix4:
    """Matrix product of two 4x4 matrices of rational functions."""
    return tuple(
        tuple(sum((g[a][c] * h[c][b] for c in range(4)), FIELD.zero) for b in range(4))
        for a in range(4)
    )

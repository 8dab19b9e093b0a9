import pytest
from sympy.polys.domains import QQ

from killing.curvature import christoffel, is_ricci_flat
from killing.errors import MetricValidationError, UnknownMetricError
from killing.exact_algebra import ONE, ZERO, X, Y
from killing.metric_catalog import BUILTIN_METRICS, MetricSpec, builtin, metric_product, symmetric, tomimatsu_sato_2
from killing.momentum_poly import PPHI, PT, PX, PY, MomPoly

IDENTITY = tuple(tuple(ONE if a == b else ZERO for b in range(4)) for a in range(4))


@pytest.mark.parametrize("name", sorted(BUILTIN_METRICS))
def test_catalog_metrics_are_valid(name):
    metric = builtin(name)
    metric.validate()
    assert metric.name == name
    assert metric.suggested_points
    assert all(metric.is_admissible(point) for point in metric.suggested_points)
    assert metric_product(metric.g, metric.inverse) == IDENTITY


def test_static_flags():
    assert {name for name in BUILTIN_METRICS if builtin(name).static_flag} == {"darmois", "cmetric", "flat_cyl"}


def test_unknown_metric():
    with pytest.raises(UnknownMetricError):
        builtin("schwarzschild")


def test_flat_hamiltonian(flat):
    p_x, p_y, p_phi, p_t = (MomPoly.momentum(i) for i in (PX, PY, PPHI, PT))
    assert flat.hamiltonian == p_x**2 + p_y**2 + p_phi**2 * (ONE / X**2) - p_t**2


def test_kerr_hamiltonian_radial_part(kerr):
    assert kerr.hamiltonian.coefficient((2, 0, 0, 0)) == (X**2 - 2 * X + 1) / (X**2 + Y**2)
    assert kerr.hamiltonian.coefficient((0, 2, 0, 0)) == (1 - Y**2) / (X**2 + Y**2)
    assert kerr.hamiltonian.coefficient((0, 0, 1, 1))


def test_excluded_locus(kerr):
    assert not kerr.is_admissible((QQ(1), QQ(1, 2)))
    assert not kerr.is_admissible((QQ(2), QQ(1)))
    assert kerr.is_admissible((QQ(2), QQ(1, 2)))


def test_tomimatsu_sato_parameters_are_checked():
    with pytest.raises(MetricValidationError) as excinfo:
        tomimatsu_sato_2(p=QQ(1, 2), q=QQ(1, 2))
    assert excinfo.value.check == "parameters"


def _custom(entries, static_flag=True):
    return MetricSpec(name="custom", coords=("x", "y", "phi", "t"), g=symmetric(entries), static_flag=static_flag)


def test_validation_checks():
    diagonal = {(0, 0): ONE, (1, 1): ONE, (2, 2): X**2, (3, 3): -ONE}

    with pytest.raises(MetricValidationError) as excinfo:
        _custom({**diagonal, (2, 3): X}).validate()
    assert excinfo.value.check == "static-flag"

    with pytest.raises(MetricValidationError) as excinfo:
        _custom(diagonal, static_flag=False).validate()
    assert excinfo.value.check == "static-flag"

    with pytest.raises(MetricValidationError) as excinfo:
        _custom({**diagonal, (3, 3): ZERO}).validate()
    assert excinfo.value.check == "nondegeneracy"

    rows = [list(row) for row in symmetric(diagonal)]
    rows[0][1] = Y
    asymmetric = MetricSpec(name="custom", coords=("x", "y", "phi", "t"), g=tuple(map(tuple, rows)), static_flag=True)
    with pytest.raises(MetricValidationError) as excinfo:
        asymmetric.validate()
    assert excinfo.value.check == "symmetry"


def test_christoffel_of_flat_space(flat):
    gamma = christoffel(flat)
    # Gamma^x_{phi phi} = -x, Gamma^phi_{x phi} = 1/x
    assert gamma[0][2][2] == -X
    assert gamma[2][0][2] == ONE / X
    assert gamma[3] == tuple(tuple(ZERO for _ in range(4)) for _ in range(4))


@pytest.mark.parametrize("name", ["flat_cyl", "darmois", "cmetric"])
def test_vacuum_metrics_are_ricci_flat(name):
    assert is_ricci_flat(builtin(name))


@pytest.mark.slow
@pytest.mark.parametrize("name", ["kerr_extreme", "ts2"])
def test_rotating_metrics_are_ricci_flat(name):
    assert is_ricci_flat(builtin(name))


def test_non_vacuum_metric_is_detected():
    metric = _custom({(0, 0): ONE, (1, 1): ONE, (2, 2): X**2, (3, 3): -(1 + X**2)})
    assert not is_ricci_flat(metric)

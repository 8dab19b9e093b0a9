import pytest
from sympy.polys.domains import QQ

from conftest import PROJECT_ROOT
from killing.errors import MetricFileError, MetricValidationError
from killing.exact_algebra import X
from killing.metric_catalog import builtin
from killing.metric_file import format_metric_file, load_metric_file, parse_metric_file

FLAT = """\
# flat space
name flat
coords rho z phi t
static true
exclude rho
point 2,1/3
g[0][0] = 1
g[1][1] = 1
g[2][2] = rho^2
g[3][3] = -1
"""


def test_parse_maps_first_two_labels_to_x_and_y():
    metric = parse_metric_file(FLAT)
    assert metric.name == "flat"
    assert metric.coords == ("rho", "z", "phi", "t")
    assert metric.g[2][2] == X**2
    assert metric.excluded_locus == (X.numer,)
    assert metric.hamiltonian == builtin("flat_cyl").hamiltonian


@pytest.mark.parametrize("name", ["flat_cyl", "darmois"])
def test_shipped_metric_files_match_catalog(name):
    metric = load_metric_file(PROJECT_ROOT / "config" / "metrics" / f"{name}.metric")
    assert metric.name == f"{name}_file"
    assert metric.g == builtin(name).g
    assert metric.static_flag


def test_default_name_is_file_stem(tmp_path):
    path = tmp_path / "my_space.metric"
    path.write_text(FLAT.replace("name flat\n", ""))
    assert load_metric_file(path).name == "my_space"


@pytest.mark.parametrize("name", ["kerr_extreme", "cmetric", "flat_cyl"])
def test_format_round_trip(name):
    metric = builtin(name)
    assert parse_metric_file(format_metric_file(metric)) == metric


def test_format_uses_coordinate_labels():
    text = format_metric_file(builtin("kerr_extreme"))
    assert "coords r chi phi t" in text
    assert "g[0][0] = (r^2 + chi^2)/(r^2 - 2*r + 1)" in text


@pytest.mark.parametrize("text,line,column", [
    (FLAT.replace("g[1][1] = 1", "g[1][0] = 1"), 8, 3),
    (FLAT + "g[0][0] = 2\n", 11, 3),
    (FLAT.replace("g[3][3] = -1", "g[3][4] = -1"), 10, 3),
    (FLAT.replace("g[3][3] = -1", "g[3][3] = -1 + * z"), 10, 16),
    (FLAT.replace("static true", "static maybe"), 4, 8),
    (FLAT.replace("point 2,1/3", "point 2"), 6, 7),
    (FLAT.replace("name flat", "nmae flat"), 2, 1),
])
def test_syntax_errors_carry_positions(text, line, column):
    with pytest.raises(MetricFileError) as excinfo:
        parse_metric_file(text)
    assert (excinfo.value.line, excinfo.value.column) == (line, column)


def test_missing_header_lines():
    with pytest.raises(MetricFileError, match="coords"):
        parse_metric_file("g[0][0] = 1\n")
    with pytest.raises(MetricFileError, match="static"):
        parse_metric_file(FLAT.replace("static true\n", ""))


def test_dependence_on_ignorable_coordinate_is_rejected():
    with pytest.raises(MetricValidationError) as excinfo:
        parse_metric_file(FLAT.replace("g[2][2] = rho^2", "g[2][2] = rho^2 + phi"))
    assert excinfo.value.check == "coordinate-dependence"


def test_static_flag_must_match_components():
    with pytest.raises(MetricValidationError) as excinfo:
        parse_metric_file(FLAT + "g[2][3] = rho\n")
    assert excinfo.value.check == "static-flag"


def test_excluded_locus_must_be_polynomial():
    with pytest.raises(MetricFileError, match="polynomial"):
        parse_metric_file(FLAT.replace("exclude rho", "exclude 1/rho"))


def test_unreadable_file(tmp_path):
    with pytest.raises(MetricFileError, match="Cannot read"):
        load_metric_file(tmp_path / "missing.metric")


def test_parameters_are_substituted_into_components():
    text = FLAT.replace("exclude rho", "param k 3/2\nparam n 2\nexclude rho").replace("g[2][2] = rho^2", "g[2][2] = k*rho^n")
    metric = parse_metric_file(text)
    assert metric.g[2][2] == QQ(3, 2) * X**2
    assert metric.param_map == {"k": QQ(3, 2), "n": QQ(2)}


def test_shipped_darmois_file_uses_its_parameter():
    text = (PROJECT_ROOT / "config" / "metrics" / "darmois.metric").read_text()
    assert "^delta" in text
    metric = parse_metric_file(text)
    assert metric.param_map == {"delta": QQ(2)}
    assert metric.g == builtin("darmois").g


@pytest.mark.parametrize("declaration,message", [
    ("param rho 2", "clashes"),
    ("param t 2", "clashes"),
    ("param k 2\nparam k 3", "twice"),
    ("param 2k 2", "identifier"),
    ("param k two", "rational"),
])
def test_invalid_parameters(declaration, message):
    with pytest.raises(MetricFileError, match=message):
        parse_metric_file(FLAT.replace("exclude rho", f"{declaration}\nexclude rho"))

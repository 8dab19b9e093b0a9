"""
Plain-text metric files.

    # comment
    name darmois
    coords x y phi t
    static true
    param p 3/5
    exclude x^2 - 1
    point 1/2,2
    g[0][0] = (x^2 - y^2)/(x^2 - 1)
    ...

Only upper-triangle components are given; missing components are zero. The
first two coordinate labels name the non-ignorable coordinates and are mapped
onto x and y. Expressions must not mention the two ignorable coordinates.
"""

import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .errors import ExpressionParseError, MetricFileError, MetricValidationError
from .exact_algebra import X, Y, BiPoly, Point, Rat, RatFunc, const, format_point, format_poly, format_rat, format_ratfunc, parse_point, rat
from .expression import parse_expression, tokenize
from .metric_catalog import MetricSpec, symmetric

logger = logging.getLogger(__name__)

_COMPONENT_RE = re.compile(r"^g\[(\d+)\]\[(\d+)\]\s*=\s*")
_HEADER_KEYWORDS = ("name", "coords", "static", "param", "exclude", "point")


class _MetricFileParser:
    def __init__(self, text: str, default_name: str):
        self.text = text
        self.name = default_name
        self.coords: Optional[Tuple[str, str, str, str]] = None
        self.static: Optional[bool] = None
        self.params: List[Tuple[str, Rat]] = []
        self.param_positions: Dict[str, Tuple[int, int]] = {}
        self.exclude_sources: List[Tuple[int, int, str]] = []
        self.points: List[Point] = []
        self.components: Dict[Tuple[int, int], Tuple[int, int, str]] = {}

    def parse(self) -> MetricSpec:
        for number, raw in enumerate(self.text.splitlines(), start=1):
            line = raw.split("#", 1)[0].rstrip()
            stripped = line.lstrip()
            if not stripped:
                continue
            indent = len(line) - len(stripped)
            match = _COMPONENT_RE.match(stripped)
            if match:
                self._component(number, indent, match, stripped)
                continue
            keyword, _, rest = stripped.partition(" ")
            if keyword not in _HEADER_KEYWORDS:
                raise MetricFileError(f"Unrecognized line starting with {keyword!r}", number, indent + 1)
            getattr(self, f"_{keyword}")(number, indent + len(keyword) + 1, rest.strip())

        if self.coords is None:
            raise MetricFileError("Missing 'coords' line")
        if self.static is None:
            raise MetricFileError("Missing 'static' line")

        variables = self._variables()
        entries = {
            key: self._expression(source, number, column, variables)
            for key, (number, column, source) in self.components.items()
        }
        excluded = tuple(self._polynomial(source, number, column, variables) for number, column, source in self.exclude_sources)
        metric = MetricSpec(
            name=self.name,
            coords=self.coords,
            g=symmetric(entries),
            static_flag=self.static,
            excluded_locus=excluded,
            suggested_points=tuple(self.points),
            params=tuple(self.params),
            description="metric file",
        )
        metric.validate()
        return metric

    def _variables(self) -> Dict[str, RatFunc]:
        variables = {self.coords[0]: X, self.coords[1]: Y}
        for name, value in self.params:
            if name in self.coords:
                number, column = self.param_positions[name]
                raise MetricFileError(f"Parameter {name!r} clashes with a coordinate label", number, column)
            variables[name] = const(value)
        return variables

    def _check_ignorable(self, source: str, number: int, column: int) -> None:
        try:
            tokens = tokenize(source, number, column)
        except ExpressionParseError as e:
            raise MetricFileError(e.message, e.line, e.column) from e
        for token in tokens:
            if token.kind == "NAME" and token.text in self.coords[2:]:
                raise MetricValidationError(
                    "coordinate-dependence",
                    f"line {number}, column {token.column}: component depends on ignorable coordinate {token.text!r}",
                )

    def _expression(self, source: str, number: int, column: int, variables: Dict[str, RatFunc]) -> RatFunc:
        self._check_ignorable(source, number, column)
        try:
            return parse_expression(source, variables, number, column)
        except ExpressionParseError as e:
            raise MetricFileError(e.message, e.line, e.column) from e

    def _polynomial(self, source: str, number: int, column: int, variables: Dict[str, RatFunc]) -> BiPoly:
        value = self._expression(source, number, column, variables)
        if not value.denom.is_ground:
            raise MetricFileError("Excluded locus must be a polynomial", number, column + 1)
        if not value:
            raise MetricFileError("Excluded locus must not be the zero polynomial", number, column + 1)
        return value.numer

    def _component(self, number: int, indent: int, match: re.Match, line: str) -> None:
        a, b = int(match.group(1)), int(match.group(2))
        column = indent + match.start(1) + 1
        if a > 3 or b > 3:
            raise MetricFileError(f"Component index g[{a}][{b}] out of range", number, column)
        if a > b:
            raise MetricFileError(f"Give the upper triangle: write g[{b}][{a}] instead of g[{a}][{b}]", number, column)
        if (a, b) in self.components:
            raise MetricFileError(f"Component g[{a}][{b}] given twice", number, column)
        self.components[(a, b)] = (number, indent + match.end(), line[match.end():])

    def _name(self, number: int, column: int, rest: str) -> None:
        if not re.fullmatch(r"[A-Za-z0-9_.-]+", rest):
            raise MetricFileError(f"Invalid metric name {rest!r}", number, column + 1)
        self.name = rest

    def _coords(self, number: int, column: int, rest: str) -> None:
        labels = rest.split()
        if len(labels) != 4 or len(set(labels)) != 4:
            raise MetricFileError("'coords' needs four distinct coordinate labels", number, column + 1)
        if not all(re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", label) for label in labels):
            raise MetricFileError("Coordinate labels must be identifiers", number, column + 1)
        self.coords = tuple(labels)

    def _static(self, number: int, column: int, rest: str) -> None:
        if rest not in ("true", "false"):
            raise MetricFileError(f"'static' must be true or false, got {rest!r}", number, column + 1)
        self.static = rest == "true"

    def _param(self, number: int, column: int, rest: str) -> None:
        parts = rest.split()
        if len(parts) != 2:
            raise MetricFileError("'param' needs a name and a rational value", number, column + 1)
        name, value = parts
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
            raise MetricFileError(f"Parameter name {name!r} is not an identifier", number, column + 1)
        if name in self.param_positions:
            raise MetricFileError(f"Parameter {name!r} declared twice", number, column + 1)
        try:
            self.params.append((name, rat(value)))
        except ValueError as e:
            raise MetricFileError(str(e), number, column + 1) from e
        self.param_positions[name] = (number, column + 1)

    def _exclude(self, number: int, column: int, rest: str) -> None:
        if not rest:
            raise MetricFileError("'exclude' needs a polynomial", number, column + 1)
        self.exclude_sources.append((number, column, rest))

    def _point(self, number: int, column: int, rest: str) -> None:
        try:
            self.points.append(parse_point(rest.replace(" ", "")))
        except ValueError as e:
            raise MetricFileError(str(e), number, column + 1) from e


def parse_metric_file(text: str, name: str = "custom") -> MetricSpec:
    """
    Parse and validate a metric file.

    Raises:
        MetricFileError: on syntax errors, with line and column
        MetricValidationError: if the metric fails a structural check
    """
    metric = _MetricFileParser(text, name).parse()
    logger.debug(f"Parsed metric file for {metric.name}")
    return metric


def load_metric_file(path) -> MetricSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise MetricFileError(f"Cannot read metric file {path}: {e}") from e
    return parse_metric_file(text, name=path.stem)


def _relabel(text: str, coords: Tuple[str, ...]) -> str:
    """Rename the generators x and y to the metric's own coordinate labels."""
    labels = {"x": coords[0], "y": coords[1]}
    return re.sub(r"[xy]", lambda m: labels[m.group()], text)


def format_metric_file(metric: MetricSpec) -> str:
    """Render a metric in the file format; parsing the result gives back an equal metric."""
    lines = [f"# {metric.description or metric.name}", f"name {metric.name}"]
    lines.append("coords " + " ".join(metric.coords))
    lines.append(f"static {'true' if metric.static_flag else 'false'}")
    lines.extend(f"param {key} {format_rat(value)}" for key, value in metric.params)
    lines.extend(f"exclude {_relabel(format_poly(poly), metric.coords)}" for poly in metric.excluded_locus)
    lines.extend(f"point {format_point(point)}" for point in metric.suggested_points)
    for a in range(4):
        for b in range(a, 4):
            if metric.g[a][b]:
                lines.append(f"g[{a}][{b}] = {_relabel(format_ratfunc(metric.g[a][b]), metric.coords)}")
    return "\n".join(lines) + "\n"

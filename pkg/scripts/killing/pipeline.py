"""
Branch analysis and combination of branch bounds into a verdict.

For each parity branch the order-0 system is prolonged, evaluated at a point,
gauge fixed against the trivial integrals, reduced by elimination and its rank
certified. The nullity of the reduced system plus the number of gauged columns
bounds the dimension of integrals in the branch; subtracting the trivial ones
still present gives the dimension of possible additional integrals.
"""

import logging
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ

from .errors import BranchError, InternalConsistencyError, NonGenericPointError
from .exact_algebra import Point, format_point, format_rat
from .exact_rank import (
    METHOD_EXACT,
    METHOD_MODULAR,
    RankCertificate,
    certify_rank,
    choose_primes,
    kernel_basis,
    rank_exact,
    write_triplets,
)
from .killing_system import (
    BranchSpec,
    branch_trivials_count,
    equations,
    static_split_plan,
    trivial_family,
    trivials_count,
    two_parity_plan,
)
from .metric_catalog import MetricSpec, builtin
from .metric_file import parse_metric_file
from .momentum_poly import MOMENTUM_NAMES, exponent_of
from .prolongation import (
    dump_point_system,
    eliminate,
    evaluate,
    family_jets,
    gauge_fix,
    lift_solution,
    prolong,
    rational_rows_to_int,
    to_int_matrix,
)

logger = logging.getLogger(__name__)

MODES = ("static-split", "two-parity", "single-branch")

VERDICT_NONE = "no-additional-KT"
VERDICT_EXTRA = "extra-candidates"
VERDICT_INCONCLUSIVE = "inconclusive"

# Kernel bases are computed for matrices up to this many columns (or on request).
KERNEL_COLUMN_LIMIT = 600

RANDOM_POINT_TRIES = 64

MetricSource = Tuple[str, str]


@dataclass(frozen=True)
class AnalysisOptions:
    """Knobs shared by every branch of one analysis."""
    prolong_offset: int = 0
    gauge_fix: bool = True
    seed: int = 0
    exact: bool = False
    show_kernel: bool = False
    dump_dir: Optional[str] = None

    def order_for(self, branch: BranchSpec) -> int:
        order = branch.d + self.prolong_offset
        if order < 0:
            raise BranchError(f"Prolongation order for {branch.label()} would be negative")
        return order


@dataclass(frozen=True)
class BranchCounts:
    meqns: int
    nvars: int
    rows_nonzero: int
    zero_rows_dropped: int
    rows_after_elim: int
    cols_after_elim: int
    eliminated_cols: int
    gauge_fixed_cols: int

    def to_dict(self) -> Dict[str, int]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class Genericity:
    points: Tuple[str, ...]
    nullities: Tuple[int, ...]

    @property
    def non_generic_suspected(self) -> bool:
        return len(set(self.nullities)) > 1

    def to_dict(self) -> Dict:
        return {
            "points": list(self.points),
            "nullities": list(self.nullities),
            "non_generic_suspected": self.non_generic_suspected,
        }


@dataclass(frozen=True)
class BranchResult:
    """Outcome of one branch at one point (or the worst of several points)."""
    branch: BranchSpec
    point: Point
    order: int
    counts: BranchCounts
    certificate: RankCertificate
    nullity: int
    trivial_span_dim: int
    trivials_in_branch: int
    upper_bound: int
    extra_dim: int
    kernel_order0: Tuple[str, ...] = ()
    genericity: Optional[Genericity] = None
    timings: Tuple[Tuple[str, float], ...] = ()

    def to_dict(self) -> Dict:
        result = {
            "branch": self.branch.label(),
            "d": self.branch.d,
            "e": self.branch.e,
            "phi_parity": self.branch.phi_parity,
            "multiplicity": self.branch.multiplicity,
            "point": format_point(self.point),
            "prolongation_order": self.order,
            "counts": self.counts.to_dict(),
            "rank": self.certificate.rank,
            "certificate": self.certificate.to_dict(),
            "nullity": self.nullity,
            "trivial_span_dim": self.trivial_span_dim,
            "trivials_in_branch": self.trivials_in_branch,
            "upper_bound": self.upper_bound,
            "extra_dim": self.extra_dim,
        }
        if self.genericity is not None:
            result["genericity"] = self.genericity.to_dict()
        if self.kernel_order0:
            result["kernel_order0"] = list(self.kernel_order0)
        return result


@dataclass(frozen=True)
class Verdict:
    kind: str
    extra: int = 0

    def __str__(self) -> str:
        if self.kind == VERDICT_EXTRA:
            return f"{self.kind}({self.extra})"
        return self.kind


@dataclass(frozen=True)
class BoundReport:
    """Combined bound for one metric and valence."""
    metric: MetricSpec
    valence: int
    mode: str
    options: AnalysisOptions
    branches: Tuple[BranchResult, ...]
    total_upper_bound: int
    trivials_expected: int
    total_extra_dim: int
    verdict: Verdict

    def to_dict(self) -> Dict:
        """Deterministic report content (no timings)."""
        return {
            "metric": {
                "name": self.metric.name,
                "coords": list(self.metric.coords),
                "static": self.metric.static_flag,
                "params": {key: format_rat(value) for key, value in self.metric.params},
            },
            "valence": self.valence,
            "mode": self.mode,
            "options": {
                "prolong_offset": self.options.prolong_offset,
                "gauge_fix": self.options.gauge_fix,
                "seed": self.options.seed,
                "exact": self.options.exact,
            },
            "branches": [b.to_dict() for b in self.branches],
            "total_upper_bound": self.total_upper_bound,
            "trivials_expected": self.trivials_expected,
            "total_extra_dim": self.total_extra_dim,
            "verdict": {"kind": self.verdict.kind, "extra": self.verdict.extra},
        }

    def timings(self) -> Dict[str, Dict[str, float]]:
        return {b.branch.label(): dict(b.timings) for b in self.branches}


# Points ----------------------------------------------------------------------


def random_admissible_point(metric: MetricSpec, rng: random.Random, avoid: Sequence[Point] = ()) -> Point:
    """
    Rational point p/q (|p| <= 12, 1 <= q <= 7) off the excluded locus.

    Raises:
        NonGenericPointError: if no admissible point is found
    """
    for _ in range(RANDOM_POINT_TRIES):
        point = (
            QQ(rng.randint(-12, 12), rng.randint(1, 7)),
            QQ(rng.randint(-12, 12), rng.randint(1, 7)),
        )
        if point not in avoid and metric.is_admissible(point):
            return point
        logger.warning(f"Redrawing random point ({format_point(point)}) for {metric.name}")
    raise NonGenericPointError(f"No admissible random point for {metric.name} after {RANDOM_POINT_TRIES} tries")


def analysis_points(metric: MetricSpec, point: Optional[Point], seed: int) -> List[Point]:
    """The primary point (given or first suggested) and a seeded random second point."""
    if point is None:
        if not metric.suggested_points:
            point = random_admissible_point(metric, random.Random(seed))
        else:
            point = metric.suggested_points[0]
    second = random_admissible_point(metric, random.Random(seed + 1), avoid=[point])
    return [point, second]


# Single branch ---------------------------------------------------------------


def _kernel_order0(ps, vectors) -> Tuple[str, ...]:
    """Order-0 part of kernel vectors, rendered as momentum polynomials at the point."""
    d = ps.branch.d
    rendered = []
    for vector in vectors:
        terms = []
        for column, value in sorted(vector.items()):
            u = ps.columns[column]
            if u.m or not value:
                continue
            exponent = exponent_of(u.index, d)
            factors = "*".join(
                name if power == 1 else f"{name}^{power}"
                for name, power in zip(MOMENTUM_NAMES, exponent) if power
            )
            terms.append(f"({format_rat(value)})*{factors}" if factors else f"({format_rat(value)})")
        rendered.append(" + ".join(terms) if terms else "0")
    return tuple(rendered)


def analyze_branch(
    metric: MetricSpec,
    branch: BranchSpec,
    point: Point,
    order: Optional[int] = None,
    options: AnalysisOptions = AnalysisOptions(),
    primes: Optional[Sequence[int]] = None,
) -> BranchResult:
    """
    Upper bound for the dimension of integrals in one branch at one point.

    The prolongation order defaults to d + options.prolong_offset.

    Raises:
        ZeroDenominatorError: if the point is not admissible
        InternalConsistencyError: if a cross-check fails
    """
    branch.check_metric(metric)
    timings: Dict[str, float] = {}
    started = time.perf_counter()

    def lap(name: str) -> None:
        nonlocal started
        now = time.perf_counter()
        timings[name] = round(now - started, 6)
        started = now

    h = metric.hamiltonian
    if order is None:
        order = options.order_for(branch)
    system = prolong(equations(h, branch), order, branch)
    lap("build")

    evaluated = evaluate(system, point, metric)
    jets = family_jets(trivial_family(h, branch), system, point)
    for jet in jets:
        failing = evaluated.residual(jet)
        if failing is not None:
            raise InternalConsistencyError(f"Trivial integral violates equation {failing.label()} of {branch.label()}")
    lap("evaluate")

    gauged = gauge_fix(evaluated, jets) if options.gauge_fix else evaluated
    reduced = eliminate(gauged)
    matrix = to_int_matrix(reduced)
    lap("reduce")

    accounted = matrix.ncols + len(reduced.substitutions) + len(reduced.gauge_log)
    if accounted != system.nvars:
        raise InternalConsistencyError(f"Column accounting mismatch: {accounted} != {system.nvars}")

    certificate = certify_rank(matrix, primes if primes is not None else choose_primes(options.seed), options.exact)
    nullity = matrix.ncols - certificate.rank
    lap("rank")

    kernel_rendered: Tuple[str, ...] = ()
    if nullity and (options.show_kernel or matrix.ncols <= KERNEL_COLUMN_LIMIT):
        basis, kernel_cert = kernel_basis(matrix)
        if kernel_cert.rank != certificate.rank:
            raise InternalConsistencyError(
                f"Echelon rank {kernel_cert.rank} disagrees with certified rank {certificate.rank}"
            )
        lifted = [lift_solution(reduced, {matrix.column_ids[c]: v for c, v in vector.items()}) for vector in basis]
        for vector in lifted:
            failing = gauged.residual(vector)
            if failing is not None:
                raise InternalConsistencyError(f"Lifted kernel vector violates equation {failing.label()}")
        certificate = RankCertificate(
            rank=certificate.rank,
            method=certificate.method,
            primes_used=certificate.primes_used,
            modular_ranks=certificate.modular_ranks,
            kernel_dim=len(basis),
            kernel_verified=True,
        )
        if options.show_kernel:
            kernel_rendered = _kernel_order0(reduced, lifted)
        lap("kernel")

    trivial_span = rank_exact(rational_rows_to_int(jets, system.nvars)) if jets else 0
    gauge_count = len(reduced.gauge_log)
    remaining_trivial = trivial_span - gauge_count
    extra = nullity - remaining_trivial
    if extra < 0:
        raise InternalConsistencyError(
            f"Nullity {nullity} of {branch.label()} is smaller than the {remaining_trivial} trivial solutions left"
        )

    counts = BranchCounts(
        meqns=system.meqns,
        nvars=system.nvars,
        rows_nonzero=len(evaluated.rows),
        zero_rows_dropped=evaluated.zero_rows_dropped,
        rows_after_elim=matrix.nrows,
        cols_after_elim=matrix.ncols,
        eliminated_cols=len(reduced.substitutions),
        gauge_fixed_cols=gauge_count,
    )

    if options.dump_dir:
        target = Path(options.dump_dir)
        target.mkdir(parents=True, exist_ok=True)
        stem = f"{branch.label().replace(',', '_').replace('=', '')}_{format_point(point).replace('/', 'o').replace(',', '_')}"
        (target / f"{stem}.triplets").write_text(write_triplets(matrix))
        (target / f"{stem}.rows").write_text(dump_point_system(reduced))

    logger.info(
        f"{metric.name} {branch.label()} at ({format_point(point)}): rank {certificate.rank}/{matrix.ncols} "
        f"[{certificate.method}], nullity {nullity}, bound {nullity + gauge_count}, extra {extra}"
    )
    return BranchResult(
        branch=branch,
        point=point,
        order=order,
        counts=counts,
        certificate=certificate,
        nullity=nullity,
        trivial_span_dim=trivial_span,
        trivials_in_branch=branch_trivials_count(branch),
        upper_bound=nullity + gauge_count,
        extra_dim=extra,
        kernel_order0=kernel_rendered,
        timings=tuple(timings.items()),
    )


def analyze_branch_at_points(
    metric: MetricSpec,
    branch: BranchSpec,
    points: Sequence[Point],
    options: AnalysisOptions = AnalysisOptions(),
) -> BranchResult:
    """
    Run a branch at several points and keep the largest nullity.

    A nullity that changes between points means at least one point is
    non-generic; the maximum is the safe bound.
    """
    primes = choose_primes(options.seed)
    results = [analyze_branch(metric, branch, point, None, options, primes) for point in points]
    worst = max(results, key=lambda r: r.nullity)
    genericity = Genericity(
        points=tuple(format_point(r.point) for r in results),
        nullities=tuple(r.nullity for r in results),
    )
    if genericity.non_generic_suspected:
        logger.warning(f"{branch.label()}: nullity differs between points {genericity.nullities}")
    merged_timings: Dict[str, float] = {}
    for result in results:
        for name, value in result.timings:
            merged_timings[name] = round(merged_timings.get(name, 0.0) + value, 6)
    return BranchResult(**{
        **worst.__dict__,
        "genericity": genericity,
        "timings": tuple(merged_timings.items()),
    })


def _branch_task(source: MetricSource, branch: BranchSpec, points: Sequence[Point], options: AnalysisOptions) -> BranchResult:
    """Worker entry point: rebuild the metric from its source and analyze one branch."""
    return analyze_branch_at_points(load_metric_source(source), branch, points, options)


def load_metric_source(source: MetricSource) -> MetricSpec:
    kind, value = source
    if kind == "builtin":
        return builtin(value)
    if kind == "file":
        return parse_metric_file(value)
    raise ValueError(f"Unknown metric source kind {kind!r}")


# Combination -----------------------------------------------------------------


def plan_branches(
    metric: MetricSpec,
    d: int,
    mode: Optional[str] = None,
    parity: Optional[int] = None,
    phi_parity: str = "any",
) -> Tuple[str, List[BranchSpec]]:
    """
    Resolve the branch decomposition for a valence.

    Raises:
        BranchError: for an unknown mode or a mode the metric does not support
    """
    if mode is None:
        mode = "single-branch" if parity is not None else ("static-split" if metric.static_flag else "two-parity")
    if mode not in MODES:
        raise BranchError(f"Unknown mode {mode!r}, expected one of {MODES}")
    if mode == "static-split":
        return mode, static_split_plan(d, metric)
    if mode == "two-parity":
        return mode, two_parity_plan(d)
    if parity is None:
        raise BranchError("single-branch mode needs a parity")
    branch = BranchSpec(d, parity, phi_parity)
    branch.check_metric(metric)
    return mode, [branch]


def decide(branches: Sequence[BranchResult]) -> Verdict:
    """
    Verdict from branch results: no additional integrals iff every extra_dim is
    zero; inconclusive if points disagree on a branch and some extra_dim is positive.
    """
    for result in branches:
        if result.certificate.method not in (METHOD_MODULAR, METHOD_EXACT):
            raise InternalConsistencyError(f"Unknown rank method {result.certificate.method!r}")
    total_extra = sum(r.branch.multiplicity * r.extra_dim for r in branches)
    suspected = any(r.genericity is not None and r.genericity.non_generic_suspected for r in branches)
    if total_extra == 0:
        return Verdict(VERDICT_NONE)
    if suspected:
        return Verdict(VERDICT_INCONCLUSIVE, total_extra)
    return Verdict(VERDICT_EXTRA, total_extra)


def full_analysis(
    metric: MetricSpec,
    d: int,
    mode: Optional[str] = None,
    options: AnalysisOptions = AnalysisOptions(),
    point: Optional[Point] = None,
    parity: Optional[int] = None,
    phi_parity: str = "any",
    workers: int = 1,
    source: Optional[MetricSource] = None,
    progress: Optional[Callable[[BranchResult], None]] = None,
) -> BoundReport:
    """
    Bound the number of independent integrals of valence d.

    Branches are independent; with workers > 1 and a metric source they run in
    separate processes and are joined in plan order.
    """
    mode, plan = plan_branches(metric, d, mode, parity, phi_parity)
    points = analysis_points(metric, point, options.seed)
    logger.info(
        f"Analyzing {metric.name} valence {d} ({mode}): branches {', '.join(b.label() for b in plan)}, "
        f"points {'; '.join(format_point(p) for p in points)}"
    )

    results: List[BranchResult] = []
    if workers > 1 and source is not None and len(plan) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_branch_task, source, branch, points, options) for branch in plan]
            for future in futures:
                results.append(future.result())
                if progress:
                    progress(results[-1])
    else:
        for branch in plan:
            results.append(analyze_branch_at_points(metric, branch, points, options))
            if progress:
                progress(results[-1])

    total_bound = sum(r.branch.multiplicity * r.upper_bound for r in results)
    total_extra = sum(r.branch.multiplicity * r.extra_dim for r in results)
    return BoundReport(
        metric=metric,
        valence=d,
        mode=mode,
        options=options,
        branches=tuple(results),
        total_upper_bound=total_bound,
        trivials_expected=trivials_count(d) if mode != "single-branch" else results[0].trivials_in_branch,
        total_extra_dim=total_extra,
        verdict=decide(results),
    )

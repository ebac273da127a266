# coding=utf-8
"""
Experiment sweeps over sample sizes, discounts and seeds, their CSV output and log-log slope fits.

A sweep is a grid of independent (discount, n, seed) cells. Cells may run on several threads; records are sorted by
(discount, n, seed) before they are returned or written, so the output does not depend on scheduling.
"""
import concurrent.futures
import csv
import math
import time
from typing import (
    Any,
    Callable,
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import attr
import numpy as np
import scipy.stats

from . import (
    constants,
    utils,
)
from .bounds import (
    auxiliary_sequence,
    bernstein_condition_check,
    bernstein_error_bound,
    default_beta1,
    eval_bound_report,
    plug_in_evaluate,
)
from .exceptions import (
    InvalidArgumentError,
)
from .families import (
    generate_mdp,
)
from .generative import (
    empirical_mdp,
    sample_empirical_kernel,
)
from .mdp import (
    SolveResult,
    TabularMDP,
    evaluate_policy_exact,
    solve_exact,
)
from .perturb import (
    PerturbationConfig,
    PlannerConfig,
    perturb_rewards,
    perturbation_scale,
    perturbed_decomposition_bound,
    plan_perturbed,
)
from .tiebreak import (
    min_pairwise_gap,
    separation_threshold,
)


def _float_tuple(field: str) -> Callable[[Any], Tuple[float, ...]]:
    def convert(value: Any) -> Tuple[float, ...]:
        try:
            return tuple(float(v) for v in value)
        except (TypeError, ValueError):
            raise InvalidArgumentError('expected a list of numbers', field=field) from None

    return convert


def _int_tuple(field: str) -> Callable[[Any], Tuple[int, ...]]:
    def convert(value: Any) -> Tuple[int, ...]:
        try:
            items = list(value)
        except TypeError:
            raise InvalidArgumentError('expected a list of integers', field=field) from None
        if any(isinstance(v, bool) or not isinstance(v, (int, np.integer)) for v in items):
            raise InvalidArgumentError('expected a list of integers', field=field)
        return tuple(int(v) for v in items)

    return convert


def _nonempty(_instance: Any, attribute: 'attr.Attribute[Any]', value: Sequence[Any]) -> None:
    if not value:
        raise InvalidArgumentError('grid must not be empty', field=attribute.name)


def _discounts(_instance: Any, attribute: 'attr.Attribute[Any]', value: Sequence[float]) -> None:
    _nonempty(_instance, attribute, value)
    for i, gamma in enumerate(value):
        if not 0.0 < gamma < 1.0:
            raise InvalidArgumentError('must lie strictly between 0 and 1', field=f'{attribute.name}[{i}]')


def _sample_sizes(_instance: Any, attribute: 'attr.Attribute[Any]', value: Sequence[int]) -> None:
    _nonempty(_instance, attribute, value)
    for i, n in enumerate(value):
        if n < 1:
            raise InvalidArgumentError('must be at least 1', field=f'{attribute.name}[{i}]')


@attr.s(auto_attribs=True, frozen=True)
class ExperimentSpec:
    """One sweep: the instance family and size, the grids, the mode and where to write the CSV"""

    family: str = attr.ib(validator=utils.one_of(constants.FAMILIES))
    num_states: int = attr.ib(validator=utils.positive_int)
    num_actions: int = attr.ib(validator=utils.positive_int)
    discounts: Tuple[float, ...] = attr.ib(converter=_float_tuple('discounts'), validator=_discounts)
    sample_sizes: Tuple[int, ...] = attr.ib(converter=_int_tuple('sample_sizes'), validator=_sample_sizes)
    epsilon: float = attr.ib(validator=utils.positive)
    delta: float = attr.ib(validator=utils.open_unit_interval)
    seeds: Tuple[int, ...] = attr.ib(converter=_int_tuple('seeds'), validator=_nonempty)
    mode: str = attr.ib(validator=utils.one_of(constants.MODES))
    output_path: Optional[str] = None
    instance_seed: int = 0
    xi: Optional[float] = attr.ib(default=None, validator=attr.validators.optional(utils.nonnegative))
    alpha: float = attr.ib(default=constants.DEFAULT_ALPHA, validator=utils.at_least(1.0))
    c0: float = attr.ib(default=constants.DEFAULT_C0, validator=utils.positive)
    c1: float = attr.ib(default=constants.DEFAULT_C1, validator=utils.positive)
    c2: float = attr.ib(default=constants.DEFAULT_C2, validator=utils.positive)
    method: str = attr.ib(default=constants.METHOD_QVI, validator=utils.one_of(constants.METHODS))
    trials: int = attr.ib(default=200, validator=utils.positive_int)
    workers: int = attr.ib(default=1, validator=utils.positive_int)
    record_timing: bool = False

    @classmethod
    def from_dict(cls, data: Any) -> 'ExperimentSpec':
        return utils.attrs_from_dict(cls, data, field='experiment')  # type: ignore[no-any-return]

    def to_dict(self) -> Dict[str, Any]:
        data = utils.attrs_to_dict(self)
        for key in ('discounts', 'sample_sizes', 'seeds'):
            data[key] = list(data[key])
        return data

    def cells(self) -> List[Tuple[float, int, int]]:
        """Every (discount, n, seed) cell in output order"""
        discounts, sizes, seeds = sorted(set(self.discounts)), sorted(set(self.sample_sizes)), sorted(set(self.seeds))
        return [(g, n, s) for g in discounts for n in sizes for s in seeds]

    def perturbation_for(self, discount: float, seed: int) -> PerturbationConfig:
        """Perturbation of one cell. An explicit xi wins over the scale formula."""
        xi = self.xi
        if xi is None:
            xi = perturbation_scale(self.num_states, self.num_actions, discount, self.epsilon, self.c1, self.alpha)
        return PerturbationConfig(xi=xi, alpha=self.alpha, c1=self.c1, seed=seed)

    def planner(self) -> PlannerConfig:
        return PlannerConfig(epsilon=self.epsilon, delta=self.delta, c0=self.c0, c2=self.c2, method=self.method)


def load_experiment_spec(path: str) -> ExperimentSpec:
    """Read an ExperimentSpec from a JSON file whose keys mirror the field names"""
    return ExperimentSpec.from_dict(utils.load_json_file(path))


@attr.s(auto_attribs=True, frozen=True)
class SweepRecord:
    """One CSV row. In tiebreak mode error_sup is the minimal action gap, which is inf with a single action."""

    family: str
    discount: float
    n: int
    seed: int
    error_sup: float = attr.ib(validator=utils.nonnegative_or_infinite)
    bound_instance: float
    bound_worst: float
    wall_time_ms: int = 0

    @property
    def horizon(self) -> float:
        return utils.discount_horizon(self.discount)

    def to_row(self) -> List[str]:
        """Fields as CSV strings; floats use their shortest round-trip repr"""
        return [
            self.family,
            repr(self.discount),
            str(self.n),
            str(self.seed),
            repr(self.error_sup),
            repr(self.bound_instance),
            repr(self.bound_worst),
            str(self.wall_time_ms),
        ]


def _run_cell(spec: ExperimentSpec, mdp: TabularMDP, optimum: SolveResult, n: int, seed: int) -> Tuple[float, float, float]:
    """(error_sup, bound_instance, bound_worst) of one cell"""
    gamma = mdp.discount
    em = sample_empirical_kernel(mdp, n, seed)
    pi_star = optimum.policy

    if spec.mode == constants.MODE_PLAN:
        pcfg = spec.perturbation_for(gamma, seed)
        plan = plan_perturbed(em, mdp.reward, gamma, pcfg, spec.planner())
        v_pi, _ = evaluate_policy_exact(mdp, plan.policy)
        error = utils.sup_norm(optimum.values.values - v_pi.values)
        instance = eval_bound_report(mdp, em, pi_star, spec.delta).instance_bound
        worst = perturbed_decomposition_bound(n, mdp.num_states, mdp.num_actions, gamma, spec.delta, pcfg.xi)
        return error, instance, worst

    if spec.mode == constants.MODE_EVALUATE:
        report = eval_bound_report(mdp, em, pi_star, spec.delta)
        return report.empirical_error, report.instance_bound, report.worst_case_bound

    if spec.mode == constants.MODE_LEMMAS:
        aux = auxiliary_sequence(mdp, pi_star)
        beta = default_beta1(aux.depth, mdp.num_states, spec.delta)
        bern = bernstein_condition_check(mdp.kernel, em.kernel_hat, pi_star, aux, beta, n)
        v_hat = plug_in_evaluate(em, mdp.reward, gamma, pi_star)
        reward_norm = utils.sup_norm(mdp.reward)
        return (
            utils.sup_norm(v_hat.values - optimum.values.values),
            bernstein_error_bound(n, gamma, bern.minimal_beta1, reward_norm),
            bernstein_error_bound(n, gamma, beta, reward_norm),
        )

    pcfg = spec.perturbation_for(gamma, seed)
    perturbed = perturb_rewards(empirical_mdp(em, mdp.reward, gamma), pcfg)
    gap = min_pairwise_gap(solve_exact(perturbed).q_values)
    omega = separation_threshold(pcfg.xi, spec.delta, gamma, mdp.num_states, mdp.num_actions)
    return gap, omega, pcfg.xi * utils.discount_horizon(gamma)


def run_sweep(spec: ExperimentSpec, *, progress: Optional[Callable[[str], None]] = None) -> List[SweepRecord]:
    """
    Run every cell of a sweep

    :param spec: the sweep
    :param progress: optional callback receiving one message per discount
    :return: records sorted by (discount, n, seed); also written to spec.output_path when it is set
    :raises OSError: if the CSV cannot be written
    """
    instances: Dict[float, Tuple[TabularMDP, SolveResult]] = {}
    for gamma in sorted(set(spec.discounts)):
        mdp = generate_mdp(spec.family, spec.num_states, spec.num_actions, gamma, spec.instance_seed)
        instances[gamma] = (mdp, solve_exact(mdp))

    def run(cell: Tuple[float, int, int]) -> SweepRecord:
        gamma, n, seed = cell
        mdp, optimum = instances[gamma]
        start = time.perf_counter()
        error, instance, worst = _run_cell(spec, mdp, optimum, n, seed)
        elapsed = int(round((time.perf_counter() - start) * 1000)) if spec.record_timing else 0
        return SweepRecord(spec.family, gamma, n, seed, error, instance, worst, elapsed)

    cells = spec.cells()
    if progress is not None:
        progress(f'Running {len(cells)} {spec.mode} cells on {spec.family} with {spec.workers} worker(s)')
    if spec.workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=spec.workers) as executor:
            records = list(executor.map(run, cells))
    else:
        records = [run(cell) for cell in cells]
    records.sort(key=lambda r: (r.discount, r.n, r.seed))

    if spec.output_path:
        write_sweep_csv(records, spec.output_path)
    return records


def write_sweep_csv(records: Sequence[SweepRecord], path: str) -> None:
    """Write records under the fixed header, one per line"""
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(constants.CSV_FIELDS)
        for record in records:
            writer.writerow(record.to_row())


def read_sweep_csv(path: str) -> List[SweepRecord]:
    """Read records written by write_sweep_csv"""
    with open(path, newline='', encoding='utf-8') as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != constants.CSV_FIELDS:
            raise InvalidArgumentError(f'unexpected header {reader.fieldnames}', field=path)
        return [
            SweepRecord(
                family=row['family'],
                discount=float(row['discount']),
                n=int(row['n']),
                seed=int(row['seed']),
                error_sup=float(row['error_sup']),
                bound_instance=float(row['bound_instance']),
                bound_worst=float(row['bound_worst']),
                wall_time_ms=int(row['wall_time_ms']),
            )
            for row in reader
        ]


@attr.s(auto_attribs=True, frozen=True)
class SlopeFit:
    """Least-squares line through (log x, log median y)"""

    slope: float
    intercept: float
    r2: float
    points: int
    excluded: int


def _field_value(record: Union[SweepRecord, Mapping[str, Any]], name: str) -> float:
    if isinstance(record, Mapping):
        if name == constants.FIELD_HORIZON and name not in record:
            return utils.discount_horizon(float(record['discount']))
        return float(record[name])
    return float(getattr(record, name))


def fit_loglog_slope(records: Sequence[Union[SweepRecord, Mapping[str, Any]]], x_field: str, y_field: str) -> SlopeFit:
    """
    Fit log(median y) = slope * log(x) + intercept with y aggregated by median over records sharing an x

    Points whose x or median y is not positive and finite are dropped and counted in ``excluded``.

    :param records: SweepRecords or mappings with the named fields
    :param x_field: e.g. 'n', 'discount' or the derived 'horizon' = 1/(1 - discount)
    :param y_field: e.g. 'error_sup'
    :raises InvalidArgumentError: if fewer than 3 distinct usable x values remain
    """
    groups: Dict[float, List[float]] = {}
    for record in records:
        try:
            x, y = _field_value(record, x_field), _field_value(record, y_field)
        except (AttributeError, KeyError):
            raise InvalidArgumentError('records have no such field', field=x_field + '/' + y_field) from None
        groups.setdefault(x, []).append(y)

    xs, ys = [], []
    excluded = 0
    for x in sorted(groups):
        y = float(np.median(groups[x]))
        if x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y):
            xs.append(math.log(x))
            ys.append(math.log(y))
        else:
            excluded += 1
    if len(xs) < 3:
        raise InvalidArgumentError(f'need at least 3 distinct positive x values, got {len(xs)}', field=x_field)
    fit = scipy.stats.linregress(xs, ys)
    return SlopeFit(
        slope=float(fit.slope), intercept=float(fit.intercept), r2=float(fit.rvalue) ** 2, points=len(xs), excluded=excluded
    )

# coding=utf-8
"""
Command line interface.

``MdpCertApp`` is a cmd2 application, so every command works interactively and in scripts. ``cli_main`` runs a
single command from an argument vector and turns its outcome into a process exit code: 0 on success, 1 on invalid
input and 2 when the lemma battery finds a violation.
"""
import argparse
import shlex
import sys
from typing import (
    Any,
    Dict,
    List,
    Optional,
    Sequence,
    TextIO,
)

import attr

import cmd2
from cmd2 import (
    Cmd2ArgumentParser,
    Settable,
    Statement,
    with_argparser,
    with_category,
)
from cmd2.table_creator import (
    Column,
    HorizontalAlignment,
    SimpleTable,
)

from . import (
    constants,
    utils,
)
from .bounds import (
    default_beta1,
    default_depth,
    eval_bound_report,
)
from .exceptions import (
    InvalidArgumentError,
    MdpCertError,
)
from .families import (
    generate_mdp,
)
from .generative import (
    EmpiricalModel,
    empirical_mdp,
    sample_empirical_kernel,
)
from .lemmas import (
    CHECK_NAMES,
    LemmaCheck,
    run_lemma_battery,
)
from .mdp import (
    TabularMDP,
    coerce_policy,
    load_mdp,
    policy_to_dict,
    solve_exact,
    solve_optimal,
)
from .perturb import (
    PerturbationConfig,
    PlannerConfig,
    certify_recovery,
    end_to_end,
    required_sample_size,
)
from .sweep import (
    fit_loglog_slope,
    load_experiment_spec,
    run_sweep,
)
from .tiebreak import (
    certify_tie_breaking,
)

CATEGORY = 'MDP Certification'

SUBCOMMANDS = ['solve', 'evaluate', 'plan', 'sweep', 'verify-lemmas', 'certify-tiebreak']

USAGE = (
    f"Usage: mdpcert {{{','.join(SUBCOMMANDS)}}} [options]\n"
    'Run "mdpcert <command> --help" for the options of a command.'
)

EXIT_SUCCESS = 0
EXIT_INVALID = 1
EXIT_VIOLATION = 2


def _positive_float(text: Any) -> float:
    value = float(text)
    if not value > 0:
        raise ValueError('must be positive')
    return value


def _alpha(text: Any) -> float:
    value = float(text)
    if not value >= 1:
        raise ValueError('must be at least 1')
    return value


def _unit_interval(text: Any) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise ValueError('must lie strictly between 0 and 1')
    return value


def _method(text: Any) -> str:
    if text not in constants.METHODS:
        raise ValueError(f"must be one of {', '.join(constants.METHODS)}")
    return str(text)


def _action_list(text: str) -> List[int]:
    """Parse a comma-separated policy such as 0,1,1"""
    try:
        return [int(item) for item in text.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected comma-separated action indices, got {text!r}') from None


class MdpCertApp(cmd2.Cmd):
    """Solve, evaluate, plan and certify tabular MDPs"""

    def __init__(self, stdin: Optional[TextIO] = None, stdout: Optional[TextIO] = None) -> None:
        super().__init__(stdin=stdin, stdout=stdout, allow_cli_args=False)
        self.prompt = 'mdpcert> '
        self.intro = 'Tabular MDP certification shell. Type "help" for a list of commands.'
        self.default_category = 'Built-in Commands'

        self.aliases['verify-lemmas'] = 'verify_lemmas'
        self.aliases['certify-tiebreak'] = 'certify_tiebreak'

        # Defaults that command line flags override
        self.method = constants.METHOD_QVI
        self.c0 = constants.DEFAULT_C0
        self.c1 = constants.DEFAULT_C1
        self.c2 = constants.DEFAULT_C2
        self.alpha = constants.DEFAULT_ALPHA
        self.delta = 0.05
        self.add_settable(Settable('method', _method, 'Solver: qvi or pi', self, choices=constants.METHODS))
        self.add_settable(Settable('c0', _positive_float, 'Sample size constant', self))
        self.add_settable(Settable('c1', _positive_float, 'Perturbation scale constant', self))
        self.add_settable(Settable('c2', _positive_float, 'Planner iteration constant', self))
        self.add_settable(Settable('alpha', _alpha, 'Perturbation scale exponent (>= 1)', self))
        self.add_settable(Settable('delta', _unit_interval, 'Failure probability', self))

    def default(self, statement: Statement) -> Optional[bool]:  # type: ignore[override]
        """Reject unknown commands with usage text"""
        self.perror(f"Unknown command '{statement.command}'")
        self.perror(USAGE)
        self.exit_code = EXIT_INVALID
        return None

    def _fail(self, ex: BaseException) -> None:
        self.perror(str(ex))
        self.exit_code = EXIT_INVALID
        self.last_result = None

    def _emit(self, data: Any) -> None:
        self.poutput(utils.to_json(data))
        self.last_result = data

    # -----------------------------------------------------------------------------------------------------------
    solve_parser = Cmd2ArgumentParser(description='Solve an MDP exactly and print the optimal policy and values')
    solve_parser.add_argument('mdp_file', help='MDP JSON file', completer=cmd2.Cmd.path_complete)
    solve_parser.add_argument('--method', choices=constants.METHODS, help='solver (default: the method setting)')
    solve_parser.add_argument('--max-iters', type=int, default=10_000, help='iteration limit')
    solve_parser.add_argument('--tol', type=float, default=1e-10, help='target accuracy')

    @with_argparser(solve_parser)
    @with_category(CATEGORY)
    def do_solve(self, args: argparse.Namespace) -> None:
        """Solve an MDP"""
        try:
            mdp = load_mdp(args.mdp_file)
            method = args.method or self.method
            result = solve_optimal(mdp, method, args.max_iters, args.tol)
        except (MdpCertError, OSError) as ex:
            self._fail(ex)
            return
        if not result.converged:
            self.pwarning(f'{method} did not converge within {args.max_iters} iterations')
        data = policy_to_dict(result.policy, result.values, result.q_values)
        data.update({'method': method, 'iterations': result.iterations, 'converged': result.converged})
        self._emit(data)

    # -----------------------------------------------------------------------------------------------------------
    evaluate_parser = Cmd2ArgumentParser(
        description='Plug-in evaluation of a policy from generative-model samples, with its error bounds'
    )
    evaluate_parser.add_argument('mdp_file', help='MDP JSON file of the true model', completer=cmd2.Cmd.path_complete)
    evaluate_parser.add_argument('--policy', type=_action_list, help='comma-separated actions (default: optimal policy)')
    samples_group = evaluate_parser.add_mutually_exclusive_group()
    samples_group.add_argument('--counts', help='empirical model JSON file to use instead of sampling')
    samples_group.add_argument('--n', type=int, default=1000, help='samples per state-action pair')
    evaluate_parser.add_argument('--seed', type=int, default=0, help='sampling seed')
    evaluate_parser.add_argument('--delta', type=float, help='failure probability (default: the delta setting)')
    evaluate_parser.add_argument('--bernstein', action='store_true', help='also check the Bernstein condition')
    evaluate_parser.add_argument('--beta1', type=float, help='beta1 for the Bernstein check (default: 2 log(4 m S / delta))')

    @with_argparser(evaluate_parser)
    @with_category(CATEGORY)
    def do_evaluate(self, args: argparse.Namespace) -> None:
        """Evaluate a policy on samples"""
        try:
            mdp = load_mdp(args.mdp_file)
            delta = self.delta if args.delta is None else args.delta
            pi = solve_exact(mdp).policy if args.policy is None else coerce_policy(args.policy, mdp)
            if args.counts is not None:
                em = EmpiricalModel.from_dict(utils.load_json_file(args.counts), num_actions=mdp.num_actions)
                if em.counts.shape != mdp.kernel.shape:
                    raise InvalidArgumentError(f'shape {em.counts.shape} does not match the MDP', field='counts')
            else:
                em = sample_empirical_kernel(mdp, args.n, args.seed)
            beta1 = args.beta1
            if beta1 is None and args.bernstein:
                beta1 = default_beta1(default_depth(mdp.discount), mdp.num_states, delta)
            report = eval_bound_report(mdp, em, pi, delta, beta1=beta1)
        except (MdpCertError, OSError) as ex:
            self._fail(ex)
            return
        if not report.premise_holds:
            self.pwarning(f'n = {em.samples_per_pair} is below the sample size the evaluation bound assumes')
        data = report.to_dict()
        data['policy'] = list(pi.action_of)
        self._emit(data)

    # -----------------------------------------------------------------------------------------------------------
    plan_parser = Cmd2ArgumentParser(
        description='Sample the model, plan on the perturbed empirical MDP and measure the learned policy'
    )
    plan_parser.add_argument('mdp_file', help='MDP JSON file of the true model', completer=cmd2.Cmd.path_complete)
    plan_parser.add_argument('--epsilon', type=float, required=True, help='target accuracy')
    plan_parser.add_argument('--delta', type=float, help='failure probability (default: the delta setting)')
    plan_parser.add_argument('--n', type=int, help='samples per pair (default: the required sample size)')
    plan_parser.add_argument('--seed', type=int, default=0, help='sampling and perturbation seed')
    plan_parser.add_argument('--xi', type=float, help='perturbation width (default: c1 (1-g) epsilon / (S A)^alpha)')
    plan_parser.add_argument('--alpha', type=float, help='perturbation scale exponent (default: the alpha setting)')
    plan_parser.add_argument('--method', choices=constants.METHODS, help='planner (default: the method setting)')
    plan_parser.add_argument('--workers', type=int, default=1, help='threads used for sampling')
    plan_parser.add_argument('--certify', action='store_true', help='check exact recovery of the perturbed optimum')

    @with_argparser(plan_parser)
    @with_category(CATEGORY)
    def do_plan(self, args: argparse.Namespace) -> None:
        """Learn a policy from samples"""
        try:
            mdp = load_mdp(args.mdp_file)
            cfg = PlannerConfig(
                epsilon=args.epsilon,
                delta=self.delta if args.delta is None else args.delta,
                c0=self.c0,
                c2=self.c2,
                method=args.method or self.method,
            )
            cfg.check_discount(mdp.discount)
            alpha = self.alpha if args.alpha is None else args.alpha
            if args.xi is None:
                pcfg = PerturbationConfig.from_scale(
                    mdp.num_states, mdp.num_actions, mdp.discount, args.epsilon, c1=self.c1, alpha=alpha, seed=args.seed
                )
            else:
                pcfg = PerturbationConfig(xi=args.xi, alpha=alpha, c1=self.c1, seed=args.seed)
            if args.n is None:
                needed = required_sample_size(cfg, mdp.num_states, mdp.num_actions, mdp.discount)
                self.pfeedback(f'Using n = {needed} samples per pair')
            result = end_to_end(mdp, cfg, pcfg, args.seed, n=args.n, workers=args.workers)
            data: Dict[str, Any] = result.to_dict()
            if args.certify:
                data['certificate'] = certify_recovery(result.plan).to_dict()
        except (MdpCertError, OSError) as ex:
            self._fail(ex)
            return
        self._emit(data)

    # -----------------------------------------------------------------------------------------------------------
    sweep_parser = Cmd2ArgumentParser(description='Run an experiment sweep and write one CSV row per cell')
    sweep_parser.add_argument('--config', required=True, help='experiment JSON file', completer=cmd2.Cmd.path_complete)
    sweep_parser.add_argument('--out', help='CSV path (overrides output_path)', completer=cmd2.Cmd.path_complete)
    sweep_parser.add_argument('--seeds', type=int, help='use seeds 0..k-1 instead of the configured list')
    sweep_parser.add_argument('--trials', type=int, help='tie-breaking trials per cell')
    sweep_parser.add_argument('--method', choices=constants.METHODS, help='planner')
    sweep_parser.add_argument('--xi', type=float, help='fixed perturbation width')
    sweep_parser.add_argument('--alpha', type=float, help='perturbation scale exponent')
    sweep_parser.add_argument('--workers', type=int, help='threads running cells')
    sweep_parser.add_argument('--fit', metavar='X_FIELD', help='fit log median error_sup against log X_FIELD')

    @with_argparser(sweep_parser)
    @with_category(CATEGORY)
    def do_sweep(self, args: argparse.Namespace) -> None:
        """Run an experiment sweep"""
        try:
            spec = load_experiment_spec(args.config)
            spec = attr.evolve(spec, **self._sweep_overrides(args))
            records = run_sweep(spec, progress=self.pfeedback)
            fit = None
            if args.fit:
                fit = fit_loglog_slope(records, args.fit, 'error_sup')
        except (MdpCertError, OSError) as ex:
            self._fail(ex)
            return
        data: Dict[str, Any] = {'records': len(records), 'output_path': spec.output_path}
        if fit is not None:
            if fit.excluded:
                self.pwarning(f'{fit.excluded} nonpositive point(s) excluded from the fit')
            data['fit'] = utils.attrs_to_dict(fit)
        if spec.output_path is None:
            self.pwarning('No output path configured; records were not written')
        self._emit(data)

    @staticmethod
    def _sweep_overrides(args: argparse.Namespace) -> Dict[str, Any]:
        overrides: Dict[str, Any] = {}
        if args.out is not None:
            overrides['output_path'] = args.out
        if args.seeds is not None:
            if args.seeds < 1:
                raise InvalidArgumentError('must be at least 1', field='seeds')
            overrides['seeds'] = list(range(args.seeds))
        for name in ('trials', 'method', 'xi', 'alpha', 'workers'):
            value = getattr(args, name)
            if value is not None:
                overrides[name] = value
        return overrides

    # -----------------------------------------------------------------------------------------------------------
    verify_parser = Cmd2ArgumentParser(description='Run the lemma battery over seeded random instances')
    verify_parser.add_argument('--seeds', type=int, default=100, help='instances per check')
    verify_parser.add_argument('--seed', type=int, default=0, help='base seed of the instance stream')
    verify_parser.add_argument('--check', action='append', choices=CHECK_NAMES, help='run only this check (repeatable)')

    @with_argparser(verify_parser)
    @with_category(CATEGORY)
    def do_verify_lemmas(self, args: argparse.Namespace) -> None:
        """Verify the lemma battery"""
        try:
            results = run_lemma_battery(args.seeds, args.seed, names=args.check, progress=self.pfeedback)
        except MdpCertError as ex:
            self._fail(ex)
            return
        self.poutput(self._lemma_table(results))
        failed = [r for r in results if not r.passed]
        for row in failed:
            self.perror(
                f'{row.name} failed on {row.failures} of {row.instances} instances; first: {row.first_failure}'
            )
        self.last_result = results
        if failed:
            self.exit_code = EXIT_VIOLATION

    @staticmethod
    def _lemma_table(results: Sequence[LemmaCheck]) -> str:
        right = HorizontalAlignment.RIGHT
        columns = [
            Column('Check', width=24),
            Column('Description', width=38),
            Column('Instances', width=9, data_horiz_align=right),
            Column('Skipped', width=7, data_horiz_align=right),
            Column('Failures', width=8, data_horiz_align=right),
            Column('Worst margin', width=12, data_horiz_align=right),
            Column('Result', width=6),
        ]
        rows = [
            [
                r.name,
                r.description,
                r.instances,
                r.skipped,
                r.failures,
                f'{r.worst_margin:.3e}',
                'PASS' if r.passed else 'FAIL',
            ]
            for r in results
        ]
        return SimpleTable(columns).generate_table(rows, row_spacing=0)

    # -----------------------------------------------------------------------------------------------------------
    tiebreak_parser = Cmd2ArgumentParser(
        description='Count how often reward perturbation fails to separate the actions of an MDP by the threshold'
    )
    tiebreak_parser.add_argument('mdp_file', nargs='?', help='MDP JSON file (default: a generated family instance)')
    tiebreak_parser.add_argument('--family', choices=constants.FAMILIES, default=constants.FAMILY_SYMMETRIC_ADVERSARIAL)
    tiebreak_parser.add_argument('--states', type=int, default=4, help='states of the generated instance')
    tiebreak_parser.add_argument('--actions', type=int, default=3, help='actions of the generated instance')
    tiebreak_parser.add_argument('--discount', type=float, default=0.9, help='discount of the generated instance')
    tiebreak_parser.add_argument('--instance-seed', type=int, default=0, help='seed of the generated instance')
    tiebreak_parser.add_argument('--n', type=int, help='certify on an empirical MDP with n samples per pair')
    tiebreak_parser.add_argument('--xi', type=float, required=True, help='perturbation width (0 for the control run)')
    tiebreak_parser.add_argument('--delta', type=float, help='target failure probability (default: the delta setting)')
    tiebreak_parser.add_argument('--trials', type=int, default=1000, help='number of perturbations, at least 100')
    tiebreak_parser.add_argument('--seed', type=int, default=0, help='perturbation and sampling seed')
    tiebreak_parser.add_argument('--workers', type=int, default=1, help='threads running trials')

    @with_argparser(tiebreak_parser)
    @with_category(CATEGORY)
    def do_certify_tiebreak(self, args: argparse.Namespace) -> None:
        """Certify tie-breaking by reward perturbation"""
        try:
            mdp = self._tiebreak_mdp(args)
            report = certify_tie_breaking(
                mdp,
                args.xi,
                self.delta if args.delta is None else args.delta,
                args.trials,
                args.seed,
                workers=args.workers,
                progress=self.pfeedback,
            )
        except (MdpCertError, OSError) as ex:
            self._fail(ex)
            return
        if not report.passed:
            self.pwarning(
                f'Failure rate {report.failure_rate:.4f} exceeds delta plus three standard deviations '
                f'({report.allowed_rate:.4f})'
            )
        self._emit(report.to_dict())

    @staticmethod
    def _tiebreak_mdp(args: argparse.Namespace) -> TabularMDP:
        if args.mdp_file is not None:
            mdp = load_mdp(args.mdp_file)
        else:
            mdp = generate_mdp(args.family, args.states, args.actions, args.discount, args.instance_seed)
        if args.n is not None:
            em = sample_empirical_kernel(mdp, args.n, args.seed)
            mdp = empirical_mdp(em, mdp.reward, mdp.discount)
        return mdp


def cli_main(argv: Optional[Sequence[str]] = None, *, stdout: Optional[TextIO] = None) -> int:
    """
    Run one command and return its exit code

    :param argv: command name and its arguments, sys.argv[1:] when omitted
    :param stdout: stream for results, sys.stdout when omitted
    :return: 0 on success, 1 on invalid input or an unknown command, 2 on a lemma violation
    """
    args = list(sys.argv[1:] if argv is None else argv)
    app = MdpCertApp(stdout=stdout)
    if not args:
        app.perror(USAGE)
        return EXIT_INVALID

    app.exit_code = EXIT_SUCCESS
    app.onecmd_plus_hooks(' '.join(shlex.quote(arg) for arg in args), add_to_history=False)
    if app.exit_code == EXIT_SUCCESS and app.last_result is None:
        # argparse rejected the arguments, or only printed help
        help_requested = '-h' in args or '--help' in args or args[0] == 'help'
        return EXIT_SUCCESS if help_requested else EXIT_INVALID
    return int(app.exit_code)


def main() -> None:
    """Console entry point. Without arguments on a terminal, start the interactive shell."""
    if len(sys.argv) == 1 and sys.stdin.isatty():
        sys.exit(MdpCertApp().cmdloop())
    sys.exit(cli_main())

"""Command-line entry point for the analysis-LASSO experiments.

    python run.py phase-diagram --config configs/phase_diagram.cfg --trials 10 --out grid.csv
    python run.py estimate-iters --eps 1e-3 --lambda 0.004 --p 144
"""
import argparse
import logging
import os
import sys

from certify.bounds import iteration_estimates
from harness.experiments import (ExperimentConfig, certify_experiment, compare_solvers, comparison_configs,
                                 comparison_problem, drip_experiment, phantom_from_config, phase_diagram)
from harness.persistence import (read_config, resolve_output, save_image, write_grid_csv, write_manifest,
                                 write_rows)
from misc.errors import AfistaError, ConfigError
from misc.utils import setup_logging
from solvers.analysis import lipschitz_g

logger = logging.getLogger('run')

DEFAULT_OUTPUTS = {
    'phase-diagram': 'phase_diagram.csv',
    'compare': 'compare',
    'phantom': 'phantom_trace.csv',
    'certify': 'certificate.csv',
    'drip': 'drip.csv',
}
# argparse dest -> config-file key
OVERRIDES = {
    'lam': 'lambda',
    'trials': 'trials',
    'iters': 'iters',
    'solver': 'solver',
    'mu': 'mu',
    'rho': 'rho',
    'noise_sigma': 'noise_sigma',
    'n_jobs': 'n_jobs',
    'seed': 'master_seed',
    'out': 'output_path',
}


def _add_experiment_args(sub):
    sub.add_argument("--config", type=str, default=None, help="flat key = value config file")
    sub.add_argument("--out", type=str, default=None, help="output path (relative paths go under $AFISTA_OUTPUT_DIR)")
    sub.add_argument("--seed", type=int, default=None, help="master seed, overrides master_seed")
    sub.add_argument("--lambda", dest="lam", type=float, default=None, help="regularization weight")
    sub.add_argument("--trials", type=int, default=None, help="Monte Carlo trials per grid cell")
    sub.add_argument("--iters", type=int, default=None, help="MFISTA iterations per run (per stage with continuation)")
    sub.add_argument("--solver", type=str, default=None, choices=['sfista', 'dfista'], help="solver to run")
    sub.add_argument("--mu", type=float, default=None, help="smoothing parameter for sfista")
    sub.add_argument("--rho", type=float, default=None, help="penalty parameter for dfista")
    sub.add_argument("--noise_sigma", type=float, default=None, help="measurement noise standard deviation")
    sub.add_argument("--n_jobs", type=int, default=None, help="parallel workers (joblib)")


def build_parser():
    parser = argparse.ArgumentParser(description="smoothing and decomposition MFISTA for analysis LASSO")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    parser.add_argument("--quiet", action="store_true", help="warnings and errors only")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (('phase-diagram', 'Monte Carlo reconstruction-error grid over (alpha, beta)'),
                            ('compare', 'SFISTA vs DFISTA traces over mu/rho grids on one instance'),
                            ('phantom', 'radial-sampling reconstruction of the ellipse phantom'),
                            ('certify', 'recovery-bound certificate on a tiny tight-frame instance'),
                            ('drip', 'D-RIP constant of a random instance')):
        _add_experiment_args(subparsers.add_parser(name, help=help_text))
    est = subparsers.add_parser('estimate-iters', help='worst-case iteration counts for eps-optimality')
    est.add_argument("--eps", type=float, required=True, help="target accuracy")
    est.add_argument("--lambda", dest="lam", type=float, default=0.004, help="regularization weight")
    est.add_argument("--p", type=int, default=144, help="number of analysis coefficients")
    est.add_argument("--lgradf", type=float, default=1.0, help="Lipschitz constant of the data-fit gradient")
    est.add_argument("--lambda1", type=float, default=1.0, help="||x0 - x_hat_mu||")
    est.add_argument("--lambda2", type=float, default=None, help="||x0 - x_hat_rho||^2 + ||z0 - z_hat_rho||^2")
    est.add_argument("--h0", type=float, default=1.0, help="objective at the initial point")
    est.add_argument("--d_norm", type=float, default=1.0, help="||D||_2")
    return parser


def load_experiment(kind, args):
    mapping = read_config(args.config) if args.config else {}
    mapping['kind'] = kind
    for dest, key in OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            mapping[key] = value
    config = ExperimentConfig.from_mapping(mapping)
    out = resolve_output(config.output_path or DEFAULT_OUTPUTS[kind])
    return config, out


def cmd_phase_diagram(args):
    config, out = load_experiment('phase-diagram', args)
    result = phase_diagram(config, progress=not args.quiet)
    write_grid_csv(out, result)
    mapping = config.to_mapping()
    mapping['failed_trials'] = result.failures
    write_manifest(out, mapping, config.master_seed)
    for cell in result.cells:
        print('alpha={:.3f} beta={:.3f} m={} l={} mean_err={:.4e} std_err={:.4e} trials={}'.format(
            cell.alpha, cell.beta, cell.m, cell.l, cell.mean_err, cell.std_err, cell.trials))
    return 0


def cmd_compare(args):
    config, prefix = load_experiment('compare', args)
    problem, x_true = comparison_problem(config)
    comparison = compare_solvers(problem, comparison_configs(config), x_true=x_true,
                                 checkpoints=config.checkpoints)
    for label, trace in comparison.traces.items():
        trace.write_csv('{}_{}.csv'.format(prefix, label))
    summary_path = '{}_summary.csv'.format(prefix)
    write_rows(summary_path, comparison.SUMMARY_HEADER, comparison.summary)
    write_manifest(summary_path, config.to_mapping(), config.master_seed)
    for row in comparison.summary:
        print('{:<22} iter={:<6d} objective={:.6e} true={:.6e} rel_err={:.4e}'.format(*row))
    return 0


def cmd_phantom(args):
    config, out = load_experiment('phantom', args)
    result = phantom_from_config(config)
    result.trace.write_csv(out, include_seconds=False)
    image_path = os.path.splitext(out)[0] + '.png'
    save_image(image_path, result.reconstruction)
    mapping = config.to_mapping()
    mapping['rel_error'] = result.rel_error
    write_manifest(out, mapping, config.master_seed)
    print('relative error {:.4%} after {} iterations, image written to {}'.format(
        result.rel_error, len(result.trace), image_path))
    return 0


def cmd_certify(args):
    config, out = load_experiment('certify', args)
    report = certify_experiment(config)
    report.to_csv(out)
    write_manifest(out, config.to_mapping(), config.master_seed)
    print(report.to_text())
    return 0


def cmd_drip(args):
    config, out = load_experiment('drip', args)
    estimate = drip_experiment(config)
    write_rows(out, ('s', 'sigma_s', 'method', 'supports_checked'),
               [(estimate.s, estimate.sigma_s, estimate.method, estimate.supports_checked)])
    write_manifest(out, config.to_mapping(), config.master_seed)
    print('sigma_{} = {:.6f} ({}, {} supports)'.format(estimate.s, estimate.sigma_s, estimate.method,
                                                       estimate.supports_checked))
    return 0


def cmd_estimate_iters(args):
    l_g = lipschitz_g(args.lam, args.p)
    est = iteration_estimates(l_g, args.lgradf, args.lambda1, args.eps, args.h0, args.d_norm, lambda2=args.lambda2)
    print('L_g             {:.6g}'.format(l_g))
    print('K_smoothing     {:.6g} (mu = {:.6g})'.format(est.K_smoothing, est.mu_star))
    print('K_decomposition {:.6g} (rho = {:.6g})'.format(est.K_decomposition, est.rho_star))
    return 0


COMMANDS = {
    'phase-diagram': cmd_phase_diagram,
    'compare': cmd_compare,
    'phantom': cmd_phantom,
    'certify': cmd_certify,
    'drip': cmd_drip,
    'estimate-iters': cmd_estimate_iters,
}


def run_cli(argv):
    """Exit codes: 0 success, 1 runtime failure, 2 configuration error."""
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else (logging.WARNING if args.quiet else logging.INFO)
    setup_logging(level)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error('configuration error: %s', e)
        print('configuration error: {}'.format(e), file=sys.stderr)
        return 2
    except (AfistaError, OSError, ArithmeticError, ValueError) as e:
        logger.error('%s failed: %s', args.command, e)
        print('{} failed: {}'.format(args.command, e), file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(run_cli(sys.argv[1:]))

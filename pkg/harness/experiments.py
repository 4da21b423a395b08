"""Monte Carlo phase diagrams, solver comparisons, phantom reconstruction and certification runs."""
import itertools
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from certify.bounds import error_bound
from certify.drip import ENUMERATION_BUDGET, drip_exhaustive, drip_randomized_lb
from dataset.phantom import PhantomSpec, ellipse_phantom, partial_fourier_operator, radial_mask
from dataset.problems import cell_dimensions, make_problem, near_isometric_matrix
from misc.errors import AfistaError, ConfigError
from misc.utils import make_rng, relative_error
from operators.frames import cosparse_signal, gradient_frame, random_tight_frame
from operators.linops import DenseMatrix
from solvers.analysis import AnalysisProblem, SolverConfig, continuation, dfista, sfista

logger = logging.getLogger(__name__)

KINDS = ('phase-diagram', 'compare', 'phantom', 'certify', 'drip')
SOLVERS = ('sfista', 'dfista')


def _float_list(raw):
    return tuple(float(v) for v in raw.split(',') if v.strip())


def _int_list(raw):
    return tuple(int(v) for v in raw.split(',') if v.strip())


def _bool(raw):
    lowered = raw.strip().lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError('not a boolean: {!r}'.format(raw))


# config-file key -> (dataclass field, parser)
CONFIG_KEYS = {
    'kind': ('kind', str),
    'n': ('n', int),
    'p': ('p', int),
    'm': ('m', int),
    's': ('s', int),
    'alpha_grid': ('alpha_grid', _float_list),
    'beta_grid': ('beta_grid', _float_list),
    'lambda': ('lam', float),
    'mu': ('mu', float),
    'rho': ('rho', float),
    'iters': ('iters', int),
    'trials': ('trials', int),
    'noise_sigma': ('noise_sigma', float),
    'master_seed': ('master_seed', int),
    'output_path': ('output_path', str),
    'solver': ('solver', str),
    'n_jobs': ('n_jobs', int),
    'mu_scales': ('mu_scales', _float_list),
    'rho_scales': ('rho_scales', _float_list),
    'checkpoints': ('checkpoints', _int_list),
    'side': ('side', int),
    'num_radial_lines': ('num_radial_lines', int),
    'continuation': ('continuation', _bool),
    'mu0': ('mu0', float),
    'mu_final': ('mu_final', float),
    'gamma': ('gamma', float),
    'drip_trials': ('drip_trials', int),
    'monotone': ('monotone', _bool),
    'isometry_defect': ('isometry_defect', float),
}
REQUIRED_KEYS = ('lambda',)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    lam: float
    n: int = 120
    p: int = 144
    m: int = 10
    s: int = 1
    alpha_grid: Tuple[float, ...] = (0.5,)
    beta_grid: Tuple[float, ...] = (0.5,)
    mu: Optional[float] = None
    rho: Optional[float] = None
    iters: int = 3000
    trials: int = 10
    noise_sigma: float = 0.0
    master_seed: int = 0
    output_path: str = ''
    solver: str = 'sfista'
    n_jobs: int = 1
    mu_scales: Tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    rho_scales: Tuple[float, ...] = (1e2, 1e3, 1e4)
    checkpoints: Tuple[int, ...] = (100, 500, 1000, 3000)
    side: int = 64
    num_radial_lines: int = 15
    continuation: bool = False
    mu0: Optional[float] = None
    mu_final: Optional[float] = None
    gamma: float = 10.0
    drip_trials: int = 1000
    monotone: bool = True
    isometry_defect: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError('kind', 'must be one of {}, got {!r}'.format(', '.join(KINDS), self.kind))
        if not self.lam > 0:
            raise ConfigError('lambda', 'must be > 0, got {}'.format(self.lam))
        for key, grid in (('alpha_grid', self.alpha_grid), ('beta_grid', self.beta_grid)):
            if not grid or any(not 0 < v <= 1 for v in grid):
                raise ConfigError(key, 'values must lie in (0, 1], got {}'.format(list(grid)))
        if self.trials < 1:
            raise ConfigError('trials', 'must be >= 1, got {}'.format(self.trials))
        if self.iters < 1:
            raise ConfigError('iters', 'must be >= 1, got {}'.format(self.iters))
        if self.solver not in SOLVERS:
            raise ConfigError('solver', 'must be sfista or dfista, got {!r}'.format(self.solver))
        if self.noise_sigma < 0:
            raise ConfigError('noise_sigma', 'must be >= 0, got {}'.format(self.noise_sigma))
        for key in ('mu', 'rho', 'mu0', 'mu_final'):
            value = getattr(self, key)
            if value is not None and not (value > 0 and math.isfinite(value)):
                raise ConfigError(key, 'must be a finite positive number, got {}'.format(value))
        if self.gamma <= 1:
            raise ConfigError('gamma', 'must be > 1, got {}'.format(self.gamma))
        if self.p < self.n and self.kind in ('phase-diagram', 'compare', 'certify', 'drip'):
            raise ConfigError('p', 'a tight frame needs p >= n, got n={}, p={}'.format(self.n, self.p))
        if self.isometry_defect is not None:
            if not 0 <= self.isometry_defect < 1:
                raise ConfigError('isometry_defect', 'must lie in [0, 1), got {}'.format(self.isometry_defect))
            if self.m < self.n:
                raise ConfigError('isometry_defect', 'a near-isometric A needs m >= n, got n={}, m={}'.format(
                    self.n, self.m))

    @classmethod
    def from_mapping(cls, mapping):
        """Build from string values keyed by config-file names; unknown keys are rejected."""
        kwargs = {}
        for key, raw in mapping.items():
            if raw is None:
                continue
            if key not in CONFIG_KEYS:
                raise ConfigError(key, 'unknown configuration key')
            name, parse = CONFIG_KEYS[key]
            try:
                kwargs[name] = parse(raw) if isinstance(raw, str) else raw
            except ValueError as e:
                raise ConfigError(key, 'bad value {!r} ({})'.format(raw, e))
        for key in REQUIRED_KEYS:
            if CONFIG_KEYS[key][0] not in kwargs:
                raise ConfigError(key, 'required key missing')
        kwargs.setdefault('kind', 'phase-diagram')
        return cls(**kwargs)

    def to_mapping(self):
        values = asdict(self)
        return {key: values[name] for key, (name, _) in CONFIG_KEYS.items()}

    @property
    def mu_value(self):
        # default smoothing 1e-3 / lambda
        return self.mu if self.mu is not None else 1e-3 / self.lam

    @property
    def rho_value(self):
        # default penalty 1e3 * lambda
        return self.rho if self.rho is not None else 1e3 * self.lam

    def solver_config(self, solver=None, **overrides):
        solver = solver or self.solver
        kwargs = dict(max_iters=self.iters, monotone=self.monotone, record_seconds=False)
        kwargs.update(overrides)
        if solver == 'sfista':
            kwargs.setdefault('mu', self.mu_value)
        else:
            kwargs.setdefault('rho', self.rho_value)
        return SolverConfig(**kwargs)


def run_solver(problem, config, x_true=None):
    if config.mu is not None:
        return sfista(problem, config, x_true=x_true)
    return dfista(problem, config, x_true=x_true)


@dataclass(frozen=True)
class GridCell:
    alpha: float
    beta: float
    m: int
    l: int
    mean_err: float
    std_err: float
    trials: int
    failures: Tuple[str, ...] = ()


@dataclass
class GridResult:
    cells: List[GridCell] = field(default_factory=list)
    solver: str = ''

    def cell(self, alpha, beta):
        for c in self.cells:
            if c.alpha == alpha and c.beta == beta:
                return c
        raise KeyError((alpha, beta))

    @property
    def failures(self):
        return sum(len(c.failures) for c in self.cells)


def trial_seeds(master_seed, cell_index, trial):
    """(frame seed, problem seed) for one Monte Carlo trial, independent of scheduling."""
    rng = make_rng(master_seed, cell_index, trial)
    frame_seed, problem_seed = rng.integers(0, 2 ** 62, size=2)
    return int(frame_seed), int(problem_seed)


def _grid_trial(config, cell_index, alpha, beta, trial):
    m, l = cell_dimensions(config.n, alpha, beta)
    frame_seed, problem_seed = trial_seeds(config.master_seed, cell_index, trial)
    try:
        frame = random_tight_frame(config.n, config.p, seed=frame_seed)
        problem, x_true = make_problem(config.n, m, frame, l, config.noise_sigma, problem_seed, lam=config.lam)
        trace = run_solver(problem, config.solver_config())
        return cell_index, trial, relative_error(trace.x, x_true), None
    except (AfistaError, FloatingPointError) as e:
        return cell_index, trial, None, '{}: {}'.format(type(e).__name__, e)


def phase_diagram(config, progress=True):
    """Mean and stddev of the relative error over trials for every (alpha, beta) cell.

    Failed trials are logged and left out of the statistics; the sweep goes on.
    """
    grid = list(itertools.product(config.alpha_grid, config.beta_grid))
    jobs = [(idx, alpha, beta, trial) for idx, (alpha, beta) in enumerate(grid) for trial in range(config.trials)]
    logger.info('[phase diagram] %d cells x %d trials, solver=%s, iters=%d',
                len(grid), config.trials, config.solver, config.iters)
    outcomes = Parallel(n_jobs=config.n_jobs)(
        delayed(_grid_trial)(config, idx, alpha, beta, trial)
        for idx, alpha, beta, trial in tqdm(jobs, desc='trials', disable=not progress))

    errors = {idx: {} for idx in range(len(grid))}
    failures = {idx: [] for idx in range(len(grid))}
    for idx, trial, err, message in outcomes:
        if message is None:
            errors[idx][trial] = err
        else:
            logger.warning('[cell %d trial %d] %s', idx, trial, message)
            failures[idx].append('trial {}: {}'.format(trial, message))

    result = GridResult(solver=config.solver)
    for idx, (alpha, beta) in enumerate(grid):
        # reduce in trial order so the result does not depend on scheduling
        values = np.array([errors[idx][t] for t in sorted(errors[idx])])
        m, l = cell_dimensions(config.n, alpha, beta)
        mean = float(values.mean()) if values.size else math.nan
        std = float(values.std()) if values.size else math.nan
        result.cells.append(GridCell(alpha, beta, m, l, mean, std, int(values.size), tuple(failures[idx])))
        logger.info('[alpha %.2f beta %.2f] [mean err: %.4e] [std: %.4e] [trials: %d]',
                    alpha, beta, mean, std, values.size)
    return result


@dataclass
class Comparison:
    traces: dict
    summary: List[tuple]

    SUMMARY_HEADER = ('label', 'iter', 'objective', 'true_objective', 'rel_error')


def solver_label(config):
    if config.mu is not None:
        return 'sfista_mu{:.3g}'.format(config.mu)
    return 'dfista_rho{:.3g}'.format(config.rho)


def compare_solvers(problem, configs, x_true=None, checkpoints=(100, 500, 1000, 3000)):
    """Run every config on the same problem; summarize at fixed iterations."""
    traces = {}
    summary = []
    for config in configs:
        label = solver_label(config)
        trace = run_solver(problem, config, x_true=x_true)
        traces[label] = trace
        for k in checkpoints:
            if k <= len(trace):
                summary.append((label, k, trace.objective[k - 1], trace.true_objective[k - 1],
                                trace.rel_error[k - 1]))
    return Comparison(traces=traces, summary=summary)


def comparison_configs(config):
    """SFISTA at mu = scale/lambda and DFISTA at rho = scale*lambda."""
    configs = [config.solver_config('sfista', mu=scale / config.lam) for scale in config.mu_scales]
    configs += [config.solver_config('dfista', rho=scale * config.lam) for scale in config.rho_scales]
    return configs


def comparison_problem(config):
    alpha, beta = config.alpha_grid[0], config.beta_grid[0]
    m, l = cell_dimensions(config.n, alpha, beta)
    frame_seed, problem_seed = trial_seeds(config.master_seed, 0, 0)
    frame = random_tight_frame(config.n, config.p, seed=frame_seed)
    return make_problem(config.n, m, frame, l, config.noise_sigma, problem_seed, lam=config.lam)


@dataclass
class PhantomResult:
    trace: object
    image: np.ndarray
    reconstruction: np.ndarray
    rel_error: float
    mask: np.ndarray


def phantom_problem(spec, lam, mask=None):
    image = ellipse_phantom(spec.side, scale=spec.scale)
    if mask is None:
        mask = radial_mask(spec.side, spec.num_radial_lines)
    op = partial_fourier_operator(mask)
    x_true = image.ravel()
    b = op.apply(x_true)
    if spec.noise_sigma > 0:
        b = b + spec.noise_sigma * make_rng(spec.seed).standard_normal(op.out_dim)
    problem = AnalysisProblem(A=op, b=b, frame=gradient_frame(spec.side, spec.side), lam=lam)
    return problem, image, mask


def phantom_experiment(spec, lam, solver_config, continuation_schedule=None, mask=None, stage_iters=None):
    """Reconstruct the phantom from radial Fourier samples.

    continuation_schedule=(mu0, mu_final, gamma) runs warm-started stages of
    the configured solver (DFISTA stages use rho = 1/mu), each of
    solver_config.max_iters iterations unless stage_iters gives one count per stage.
    """
    problem, image, mask = phantom_problem(spec, lam, mask)
    logger.info('[phantom] side=%d lines=%d samples=%d sigma=%g', spec.side, spec.num_radial_lines,
                int(mask.sum()), spec.noise_sigma)
    x_true = image.ravel()
    if continuation_schedule is not None:
        mu0, mu_final, gamma = continuation_schedule
        method = 'dfista' if solver_config.rho is not None else 'sfista'
        iters = solver_config.max_iters if stage_iters is None else stage_iters
        trace = continuation(problem, mu0, mu_final, gamma, iters, method=method, x_true=x_true,
                             monotone=solver_config.monotone, record_seconds=solver_config.record_seconds,
                             spectral_iters=solver_config.spectral_iters, log_every=solver_config.log_every)
    else:
        trace = run_solver(problem, solver_config, x_true=x_true)
    reconstruction = trace.x.reshape(image.shape)
    return PhantomResult(trace=trace, image=image, reconstruction=reconstruction,
                         rel_error=relative_error(trace.x, x_true), mask=mask)


def phantom_from_config(config):
    spec = PhantomSpec(side=config.side, num_radial_lines=config.num_radial_lines,
                       noise_sigma=config.noise_sigma, seed=config.master_seed)
    schedule = None
    if config.continuation:
        mu0 = config.mu0 if config.mu0 is not None else 1e-1 / config.lam
        mu_final = config.mu_final if config.mu_final is not None else 1e-4 / config.lam
        schedule = (mu0, mu_final, config.gamma)
    return phantom_experiment(spec, config.lam, config.solver_config(), continuation_schedule=schedule)


def _certify_matrix(config, seed):
    """Gaussian A scaled by 1/sqrt(m), or a near-isometry when isometry_defect is set."""
    if config.isometry_defect is not None:
        return near_isometric_matrix(config.m, config.n, config.isometry_defect, seed=seed)
    return make_rng(seed).standard_normal((config.m, config.n)) / math.sqrt(config.m)


def certify_experiment(config):
    """Solve one tiny tight-frame instance and evaluate the recovery bound."""
    frame_seed, problem_seed = trial_seeds(config.master_seed, 0, 0)
    frame = random_tight_frame(config.n, config.p, seed=frame_seed)
    a = _certify_matrix(config, problem_seed)
    rng = make_rng(problem_seed, 1)
    x_true = cosparse_signal(frame, config.n - 1, seed=problem_seed).x
    b = a.dot(x_true)
    if config.noise_sigma > 0:
        b = b + config.noise_sigma * rng.standard_normal(config.m)
    problem = AnalysisProblem(A=DenseMatrix(a, name='A'), b=b, frame=frame, lam=config.lam)
    drip = drip_level(problem.A, frame, 2 * config.s, config.drip_trials, config.master_seed)
    trace = run_solver(problem, config.solver_config(), x_true=x_true)
    if config.solver == 'sfista':
        return error_bound(problem, x_true, trace.x, config.mu_value, config.s, drip, transform='smoothing')
    return error_bound(problem, x_true, trace.x, config.rho_value, config.s, drip)


def drip_level(A, frame, s, trials, seed, n_jobs=1):
    """Exhaustive constant when the support count fits the budget, else a sampled lower bound."""
    if math.comb(frame.p, s) <= ENUMERATION_BUDGET:
        return drip_exhaustive(A, frame, s, n_jobs=n_jobs)
    logger.warning('C(%d, %d) supports exceed the budget, reporting a randomized lower bound', frame.p, s)
    return drip_randomized_lb(A, frame, s, trials, seed=seed, n_jobs=n_jobs)


def drip_experiment(config):
    frame_seed, problem_seed = trial_seeds(config.master_seed, 0, 0)
    frame = random_tight_frame(config.n, config.p, seed=frame_seed)
    a = _certify_matrix(config, problem_seed)
    return drip_level(DenseMatrix(a, name='A'), frame, config.s, config.drip_trials, config.master_seed,
                      n_jobs=config.n_jobs)

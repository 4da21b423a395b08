from harness.experiments import (ExperimentConfig, GridCell, GridResult, Comparison, PhantomResult,
                                 phase_diagram, compare_solvers, comparison_configs, comparison_problem,
                                 phantom_problem, phantom_experiment, phantom_from_config, certify_experiment,
                                 drip_experiment, drip_level, run_solver, solver_label, trial_seeds)
from harness.persistence import (read_config, write_manifest, write_grid_csv, read_grid_csv, write_rows,
                                 save_image, resolve_output, GRID_HEADER, OUTPUT_DIR_ENV)

from solvers.prox import (SoftThresholdParams, EnvelopeParams, soft_threshold, huber, envelope_value,
                          envelope_gradient, partial_min_z, l1_prox_residual)
from solvers.mfista import (CompositeProblem, IterateTrace, next_momentum, mfista_rate_bound,
                            proximal_gradient, mfista)
from solvers.analysis import (AnalysisProblem, SolverConfig, operator_norms, alasso_objective,
                              ralasso_objective, smoothed_objective, smoothed_gradient, lipschitz_g,
                              feasibility_bound, sfista, dfista, continuation_schedule, continuation)

from certify.drip import (DripEstimate, ENUMERATION_BUDGET, support_sigma, drip_exhaustive,
                          drip_randomized_lb, drip_inner_product_check)
from certify.bounds import (BoundConstants, CertificateReport, IterationEstimate, EXACT_THRESHOLD,
                            ROUNDED_THRESHOLD, bound_constants, d_star_d_norm11, best_s_term_tail,
                            error_bound, optimality_certificate, cone_certificate, drip_property_check,
                            tail_block_check, iteration_estimates, noise_calibrated_lambda)

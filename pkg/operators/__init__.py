from operators.linops import (LinearOperator, DenseMatrix, SAFETY_FACTOR, compose, identity, to_dense,
                              spectral_norm, lipschitz_factor, norm_11, adjoint_mismatch)
from operators.frames import (TightFrame, CosparseSignal, random_tight_frame, difference_operator_2d,
                              gradient_frame, cosparse_signal, write_arrays, read_arrays, save_frame,
                              load_frame, save_signal, load_signal)

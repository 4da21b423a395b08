from dataset.problems import DEFAULT_LAMBDA, cell_dimensions, make_problem
from dataset.phantom import PhantomSpec, ellipse_phantom, radial_mask, partial_fourier_operator

class AfistaError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(AfistaError, ValueError):
    pass


class SolverDivergence(AfistaError, RuntimeError):
    def __init__(self, message, iteration):
        super(SolverDivergence, self).__init__('{} (iteration {})'.format(message, iteration))
        self.iteration = iteration


class CosparseGenerationError(AfistaError, RuntimeError):
    pass


class EnumerationBudgetError(AfistaError, ValueError):
    pass


class NonTightFrameError(AfistaError, ValueError):
    pass


class ConfigError(AfistaError, ValueError):
    def __init__(self, key, message):
        super(ConfigError, self).__init__('{}: {}'.format(key, message))
        self.key = key

"""Error taxonomy shared by all modules.

Plain ``ValueError`` is used for violated call preconditions (negative radii,
indices out of range, malformed argument shapes).  The classes below cover the
remaining failure modes and map onto the command line exit codes: configuration
problems exit with 2, numerical failures with 3.
"""


class ConfigurationError(Exception):
    """A run description is invalid: unknown preset, bad parameter combination,
    or geometry that cannot support the requested discretization."""


class NumericalError(Exception):
    """A numerical quantity came out non-finite or an a-posteriori check failed.

    The message always names the offending location (quadrature node, matrix
    entry) so failed runs can be diagnosed from logs alone.
    """


class SingularSystemError(NumericalError):
    """The saddle point matrix could not be factorized reliably.

    Carries the parameter record of the offending run; a too-small pivot
    usually means the discrete stability condition was violated for the
    given (h_X, k, r) combination.
    """

    def __init__(self, message, params=None):
        super().__init__(message)
        self.params = params


class ConditioningError(NumericalError):
    """A kernel interpolation matrix was too ill-conditioned to factorize.

    Carries the separation-to-scale ratio q_X / r that drives the conditioning
    of the kernel matrix.
    """

    def __init__(self, message, separation_ratio=None):
        super().__init__(message)
        self.separation_ratio = separation_ratio

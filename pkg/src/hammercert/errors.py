"""Exception hierarchy.

Validation problems (bad parameters, bad files, degenerate data) and numeric
failures (non-convergence, singular systems) are kept apart because the CLI
maps them to different exit codes.
"""


class HammerError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(HammerError, ValueError):
    """Input rejected before or during computation (exit code 1)."""


class KernelError(ValidationError):
    pass


class BoundError(ValidationError):
    pass


class NonnegativityError(ValidationError):
    pass


class ProblemFileError(ValidationError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NumericError(HammerError):
    """A numerical procedure failed to deliver a result (exit code 2)."""


class QuadratureError(NumericError):
    def __init__(self, message, estimate, error):
        super().__init__(f"{message} (best estimate {estimate!r}, achieved error {error:.3e})")
        self.estimate = estimate
        self.error = error


class SpectralError(NumericError):
    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class ConvergenceError(NumericError):
    """Iteration stopped without meeting its tolerance.

    ``last`` holds the final iterate and ``residual`` its residual so callers
    can still inspect the divergence report.
    """

    def __init__(self, message, last=None, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.last = last
        self.residual = residual
        self.iterations = iterations


class SingularJacobianError(ConvergenceError):
    pass

"""Exception types. The CLI maps InputError to exit code 1 and
NumericalError to exit code 2."""


class MscalingError(Exception):
    pass


class InputError(MscalingError, ValueError):
    """Bad user input: malformed file, parameter out of range."""


class NumericalError(MscalingError, ArithmeticError):
    """A computation cannot produce a meaningful result."""


class ConvergenceError(NumericalError):
    def __init__(self, message, grad_norm=float("nan"), iterations=0):
        super().__init__(f"{message} (gradient norm {grad_norm:.3e} after {iterations} iterations)")
        self.grad_norm = grad_norm
        self.iterations = iterations


class CalibrationError(NumericalError):
    pass

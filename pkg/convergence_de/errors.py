class ConvergenceDEError(Exception):
    """
    Base class for every error raised by the package.
    """


class ConfigurationError(ConvergenceDEError, ValueError):
    """
    Invalid configuration: unknown names, out-of-range parameters, bad files.
    """


class BudgetExhausted(ConvergenceDEError):
    """
    Raised by the evaluator once the evaluation budget is spent.

    Optimizers catch it and close the run; it never escapes a run loop.
    """

    def __init__(self, used: int, max_evaluations: int):
        super().__init__(f"Evaluation budget exhausted ({used}/{max_evaluations})")
        self.used = used
        self.max_evaluations = max_evaluations


class DegenerateDirectionsError(ConvergenceDEError, ArithmeticError):
    """
    The moving-vector system is singular or too ill-conditioned to solve.
    """

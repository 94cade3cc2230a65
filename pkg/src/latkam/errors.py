"""Exception types shared across the engine."""


class LatkamError(Exception):
    """Base class for all engine errors."""


class WidthError(LatkamError):
    """Analyticity-width request outside a series' valid domain."""


class SchemaError(LatkamError):
    """Malformed model document."""


class AssumptionError(LatkamError):
    """A structural model assumption failed validation.

    ``code`` names the assumption ("B1", "I0", "A2", ...).
    """

    def __init__(self, code, message):
        self.code = code
        super().__init__(f"[{code}] {message}")


class DecayError(LatkamError):
    """Coupling coefficient exceeds the allowed decay envelope."""


class ResonanceError(LatkamError):
    """A small divisor fell below the Diophantine threshold."""

    def __init__(self, mode, value, threshold):
        self.mode = mode
        self.value = value
        self.threshold = threshold
        super().__init__(
            f"resonant mode nu={dict(mode)}: |<omega,nu>|={value:.6e} < {threshold:.6e}"
        )


class SingularHessianError(LatkamError):
    """Frequency-map Hessian is singular or too ill-conditioned to trust."""

    def __init__(self, cond, message="twist matrix not safely invertible"):
        self.cond = cond
        super().__init__(f"{message} (condition estimate {cond:.3e})")


class ZeroModeError(LatkamError):
    """Averaged forcing inconsistent with the frequency-fixing translation."""


class DivergenceError(LatkamError):
    """Lie series failed to contract; generator too large for the domain."""


class EscapeError(LatkamError):
    """A flow trajectory left its enclosing domain."""


class ContractionError(LatkamError):
    """Post-step perturbation norm exceeded the allowed contraction slack."""

    def __init__(self, k, measured, bound):
        self.k = k
        self.measured = measured
        self.bound = bound
        super().__init__(
            f"step {k}: |P_low| = {measured:.6e} exceeds slack bound {bound:.6e}"
        )


class ModeExplosionError(LatkamError):
    """Mode enumeration would exceed the configured budget."""


class ParameterError(LatkamError):
    """Parameter outside its documented range."""

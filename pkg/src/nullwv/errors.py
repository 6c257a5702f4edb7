"""Exception hierarchy shared by every module of the package."""


class NwvError(Exception):
    """Base class for all errors raised by nullwv."""


class DimensionError(NwvError, ValueError):
    pass


class DegenerateStateError(NwvError, ValueError):
    """Raised when a zero vector is asked to become a state."""


class HermiticityError(NwvError, ValueError):
    pass


class UnitarityError(NwvError, ValueError):
    pass


class DomainError(NwvError, ValueError):
    pass


class OrthogonalPostselectionError(NwvError):
    """Pre- and postselected states are (numerically) orthogonal."""

    def __init__(self, overlap: float, floor: float):
        self.overlap = overlap
        self.floor = floor
        super().__init__(f"|<f|i>| = {overlap:.3e} is below the overlap floor {floor:.1e}")


class PostselectionAnnihilatedError(NwvError):
    """The postselected branch has vanishing norm."""


class StateDestroyedError(NwvError):
    """A null outcome is impossible: the first measurement clicks with certainty."""


class CalibrationError(NwvError, ValueError):
    def __init__(self, message: str, index: int | None = None):
        self.index = index
        super().__init__(message)


class InsufficientStatisticsError(NwvError):
    """No sampled trajectory satisfied the conditioning event."""

    def __init__(self, n_samples: int, n_conditioning: int):
        self.n_samples = n_samples
        self.n_conditioning = n_conditioning
        super().__init__(
            f"{n_conditioning} conditioning events out of {n_samples} samples"
        )


class ConfigError(NwvError, ValueError):
    """Invalid experiment configuration; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class ConfigMismatchError(NwvError, ValueError):
    def __init__(self, fields: list[str]):
        self.fields = list(fields)
        super().__init__("configs differ in shared fields: " + ", ".join(self.fields))

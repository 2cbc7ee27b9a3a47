"""Exception and warning types shared across the package."""


class LoopShaperError(Exception):
    """Base class for all errors raised by this package."""


class SampleRateMismatch(LoopShaperError):
    """Two objects with different sample rates were combined."""


class ImproperTransferFunction(LoopShaperError):
    """A transfer function with negative relative order was used where a
    proper one is required (simulation, reference generation)."""


class PoleOnGrid(LoopShaperError):
    """Frequency response requested at (or numerically on top of) a pole."""

    def __init__(self, omega: float):
        self.omega = omega
        super().__init__(f"transfer function has a pole at grid point omega={omega!r}")


class RootFindingError(LoopShaperError):
    """Simultaneous root iteration failed to reach the residual target."""

    def __init__(self, residuals):
        self.residuals = list(residuals)
        super().__init__(f"root refinement did not converge; residuals={self.residuals!r}")


class AssumptionViolation(LoopShaperError):
    """Target loop gain relative order is below the plant relative order,
    which would force a non-causal controller."""

    def __init__(self, plant_order: int, target_order: int):
        self.plant_order = plant_order
        self.target_order = target_order
        super().__init__(
            f"relative order of desired loop gain ({target_order}) is below "
            f"the plant relative order ({plant_order}); controller would be non-causal"
        )


class DivergenceError(LoopShaperError):
    """Iterative learning diverged (non-finite values or sustained error growth)."""

    def __init__(self, iteration: int, message: str):
        self.iteration = iteration
        super().__init__(f"iteration {iteration}: {message}")


class DegenerateOracle(LoopShaperError):
    """Plant trial produced an all-zero (or otherwise unusable) response."""


class UnstableReference(LoopShaperError):
    """Reference system has a pole on or outside the unit circle, so its
    impulse response cannot settle; enlarge the frequency weight."""


class UnstableReduction(LoopShaperError):
    """Reduced realization has spectral radius >= 1."""

    def __init__(self, pole_magnitudes):
        self.pole_magnitudes = list(pole_magnitudes)
        super().__init__(f"reduced model unstable; pole magnitudes={self.pole_magnitudes!r}")


class AnticausalController(LoopShaperError):
    """Learned controller carries significant anticausal tap energy,
    indicating a mis-measured plant relative order."""

    def __init__(self, energy_fraction: float):
        self.energy_fraction = energy_fraction
        super().__init__(
            f"anticausal tap energy fraction {energy_fraction:.3e} exceeds 1e-6"
        )


class UnstableSystem(LoopShaperError):
    """Closed-loop system has poles on or outside the unit circle."""


class NoCrossover(LoopShaperError):
    """Loop gain magnitude never crosses unity on the evaluation grid."""


class ConfigError(LoopShaperError):
    """Pipeline configuration file is missing, malformed, or inconsistent."""


class TailSettlingWarning(UserWarning):
    """Reference impulse response has not settled below the truncation
    threshold by the end of the horizon."""


class SettlingHorizonWarning(UserWarning):
    """Step-response horizon too short for the response to settle into the band."""


class BoundCertificationWarning(UserWarning):
    """Measured reduction error exceeds the Hankel singular value bound
    (happens when the FIR data is not a settled impulse response)."""

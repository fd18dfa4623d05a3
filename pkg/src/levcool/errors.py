"""Exception hierarchy shared by all levcool modules."""


class LevcoolError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(LevcoolError, ValueError):
    """A physical parameter breaks a hard invariant (e.g. kappa <= 0)."""


class Unstable(LevcoolError):
    """The drift matrix is not Hurwitz, so no steady state exists."""


class DarkModeDecoupled(Unstable):
    """Degenerate mechanical modes leave an undamped collective mode."""


class SolverFailure(LevcoolError):
    """The Lyapunov solve returned a non-finite or inaccurate answer."""


class NoNetCooling(LevcoolError):
    """Stokes scattering outweighs anti-Stokes scattering for a mode."""


class StepTooLarge(LevcoolError, ValueError):
    """Integration step does not resolve the fastest rate of the model."""


class FitDiverged(LevcoolError):
    """Least-squares sideband fit failed or produced meaningless parameters."""


class PeaksUnresolvable(LevcoolError):
    """Sidebands of two modes overlap too much to be assigned separately."""


class Unphysical(LevcoolError):
    """Corrected sideband ratio >= 1, which implies an infinite occupation."""


class ZeroCoupling(LevcoolError, ValueError):
    """Both couplings vanish, so the bright mode is undefined."""


class MalformedCsv(LevcoolError, ValueError):
    """A spectrum file does not follow the documented CSV layout."""


class NonMonotoneFrequencies(MalformedCsv):
    """The frequency column is not strictly increasing."""

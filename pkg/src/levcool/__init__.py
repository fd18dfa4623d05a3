"""Two-mode cavity cooling of a levitated nanoparticle: dynamics, spectra and sideband thermometry."""

__version__ = "0.1.0"

from .params import (  # noqa: E402
    CavityParams,
    MechMode,
    SystemParams,
    Thresholds,
    coupling_from_polarisation,
    hz,
    khz,
    operating_point,
    to_hz,
    to_khz,
    validate,
)
from .dynamics import (  # noqa: E402
    build_model,
    mode_occupations,
    rate_equation_occupation,
    solve_steady_state,
    time_domain_oracle,
)
from .spectra import (  # noqa: E402
    Spectrum,
    TransferFunction,
    cavity_gain,
    heterodyne_psd,
    synthesize_measurement,
)

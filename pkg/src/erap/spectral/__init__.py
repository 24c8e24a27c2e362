"""Special functions, Kronecker/Robin masses and explicit Laplace spectra."""

from erap.spectral.masses import (
    MORPURGO_SHIFT,
    MassReport,
    fundamental_region_grid,
    kronecker_mass,
    mass_report,
    robin_mass,
    tau_scan,
    tau_scan_argmin,
    torus_green,
    torus_robin_numeric,
)
from erap.spectral.special import (
    EULER_GAMMA,
    dedekind_eta,
    digamma,
    digamma_rational,
    jacobi_theta1,
    log_abs_eta,
    log_dedekind_eta,
)
from erap.spectral.spectra import (
    RegularizationEstimate,
    SpectrumStream,
    boundary_length,
    heat_kernel_mass,
    sharp_mass,
    spectrum,
)

__all__ = [
    "MORPURGO_SHIFT",
    "MassReport",
    "fundamental_region_grid",
    "kronecker_mass",
    "mass_report",
    "robin_mass",
    "tau_scan",
    "tau_scan_argmin",
    "torus_green",
    "torus_robin_numeric",
    "EULER_GAMMA",
    "dedekind_eta",
    "digamma",
    "digamma_rational",
    "jacobi_theta1",
    "log_abs_eta",
    "log_dedekind_eta",
    "RegularizationEstimate",
    "SpectrumStream",
    "boundary_length",
    "heat_kernel_mass",
    "sharp_mass",
    "spectrum",
]

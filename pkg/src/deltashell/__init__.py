"""Delta-shell two-body scattering and dilute-gas transport and thermodynamics."""

__version__ = "0.1.0"

from .numerics import QuadratureError, QuadratureSpec
from .scattering import (BoundState, Interaction, LowEnergyParams, bound_state, bound_states,
                         low_energy_params, phase_shift, phase_shift_derivative)
from .thermo import (GasState, VirialResult, entropy_density, eta_over_s, min_eta_over_s,
                     second_virial)
from .transport import (OmegaSpec, TransportResult, asymptotic_first, coefficients_first,
                        diffusion_viscosity_ratio, omega, second_order_eta)
from .xsection import Statistics, differential_sigma, q1, q2

__all__ = [
    "BoundState", "GasState", "Interaction", "LowEnergyParams", "OmegaSpec",
    "QuadratureError", "QuadratureSpec", "Statistics", "TransportResult", "VirialResult",
    "asymptotic_first", "bound_state", "bound_states", "coefficients_first",
    "differential_sigma", "diffusion_viscosity_ratio", "entropy_density", "eta_over_s",
    "low_energy_params", "min_eta_over_s", "omega", "phase_shift", "phase_shift_derivative",
    "q1", "q2", "second_order_eta", "second_virial",
]

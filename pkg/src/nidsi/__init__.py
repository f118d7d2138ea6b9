"""Explode-decay dromions and line solitons of the non-isospectral
Davey-Stewartson I system: closed forms, bilinear and grid verifiers, a
method-of-lines integrator and a small CLI."""

from .exact import (DegenerateDromionError, DromionParams, FieldSnapshot, Grid,
                    LineSolitonParams, boundary_potentials, demo_dromion, dromion, dromion_dt,
                    dromion_field, dromion_potentials, exact_field, gauge_dt, gauge_phase,
                    gauge_to_isospectral, line_soliton, line_soliton_dt, snapshot)
from .model import (NonisoCoefficients, SpectralMode, accumulated_phase, chi, dispersion,
                    evolve_k, evolve_l)

__all__ = [
    "DegenerateDromionError", "DromionParams", "FieldSnapshot", "Grid", "LineSolitonParams",
    "NonisoCoefficients", "SpectralMode", "accumulated_phase", "boundary_potentials", "chi",
    "demo_dromion", "dispersion", "dromion", "dromion_dt", "dromion_field",
    "dromion_potentials", "evolve_k", "evolve_l", "exact_field", "gauge_dt", "gauge_phase",
    "gauge_to_isospectral", "line_soliton", "line_soliton_dt", "snapshot",
]

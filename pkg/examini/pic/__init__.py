"""
2D3V semi-implicit particle-in-cell mini-app
"""

from .fields import ImplicitFieldSolver, explicit_cfl, field_solve
from .gmres import GmresResult, gmres
from .models import FieldGrid, Moments, ParticleSet, PicConfig, SpeciesSpec
from .moments import field_energy, gather_moments, kinetic_energy
from .mover import particle_mover
from .particles import init_maxwellian, interpolate_to_particles
from .services import PicRunResult, PicService, get_pic_service, run_pic

__all__ = [
    "PicConfig", "SpeciesSpec", "ParticleSet", "FieldGrid", "Moments", "init_maxwellian", "particle_mover",
    "interpolate_to_particles", "gather_moments", "field_energy", "kinetic_energy", "gmres", "GmresResult",
    "ImplicitFieldSolver", "field_solve", "explicit_cfl", "run_pic", "PicRunResult", "PicService",
    "get_pic_service",
]

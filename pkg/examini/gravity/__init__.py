"""
Barnes-Hut gravity with Hilbert ordering, grouped walks and SPH smoothing lengths
"""

from .hilbert import hilbert_index, hilbert_key, hilbert_sort
from .models import Bodies, GravityConfig, KeyDomain, OctTree, SphParams, WalkParams
from .services import GravityRunResult, GravityService, get_gravity_service, make_bodies, run_gravity
from .sph import find_hsml, kernel_w, sph_density
from .tree import audit_tree, build_tree, locate
from .walks import bh_force, direct_sum, grouped_walk_force, interaction_list

__all__ = [
    "Bodies", "KeyDomain", "OctTree", "WalkParams", "SphParams", "GravityConfig", "hilbert_key",
    "hilbert_index", "hilbert_sort", "build_tree", "locate", "audit_tree", "direct_sum", "bh_force",
    "grouped_walk_force", "interaction_list", "find_hsml", "sph_density", "kernel_w", "make_bodies",
    "run_gravity", "GravityRunResult", "GravityService", "get_gravity_service",
]

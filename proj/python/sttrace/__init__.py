"""Trace finite elements for advection-diffusion on evolving closed surfaces."""

from ._sttrace import (
    convergence_study,
    cross_section_area,
    mass_study,
    mesh_info,
    observed_order,
    problems,
    run,
    slab_surface_measure,
)

__all__ = [
    "convergence_study",
    "cross_section_area",
    "mass_study",
    "mesh_info",
    "observed_order",
    "problems",
    "run",
    "slab_surface_measure",
]

"""Magnetostatic field computation for magnetization patterns.

Three independent backends compute the field of a pattern outside the film:

- ``edge_current``: equivalent bound edge currents integrated with an
  analytic straight-segment kernel (default).
- ``charge_sheet``: equivalent magnetic surface charges on the two film
  faces, integrated with an exact rectangle-patch kernel.
- ``spectral``: planar FFT evaluation for fast heatmap grids.

Uniform bias (optionally time-modulated) and an auxiliary analytic
quadrupole superpose on top via :func:`total_field`.
"""

from .bias import AuxQuadrupole, BiasField, FieldSource, Modulation, total_field
from .cache import CachedPatternField
from .charge_sheet import field_charge_sheet
from .edge_current import boundary_loops, boundary_segments, field_edge_current
from .oracle import on_axis_disk_oracle, on_axis_rectangle_quadrature
from .slab import SlabError, require_outside_slab
from .spectral import field_spectral_grid

__all__ = [
    "AuxQuadrupole",
    "BiasField",
    "CachedPatternField",
    "FieldSource",
    "Modulation",
    "SlabError",
    "boundary_loops",
    "boundary_segments",
    "field_charge_sheet",
    "field_edge_current",
    "field_spectral_grid",
    "on_axis_disk_oracle",
    "on_axis_rectangle_quadrature",
    "require_outside_slab",
    "total_field",
]

"""Shared fixtures: reference film, calibrated disk pattern, field sources.

Expensive objects (the calibrated-disk trap, the cached pattern-field
interpolator) are session-scoped so the whole suite builds them once.
"""

from __future__ import annotations

import numpy as np
import pytest

from magchip.fields.bias import BiasField, FieldSource
from magchip.fields.cache import CachedPatternField
from magchip.fields.oracle import calibrated_disk_radius
from magchip.geometry import Disk
from magchip.pattern import (
    EditOp,
    FilmSpec,
    apply_edit,
    create_uniform,
    default_film,
)
from magchip.traps import SearchRegion, find_zeros

WRITE_POWER = 20e-3  # W, comfortably above threshold for a 10 um spot
SPOT = 10e-6  # m


def reversing_stamp(shape) -> EditOp:
    return EditOp(
        kind="stamp",
        shape=shape,
        write_field_sign=-1,
        beam_power=WRITE_POWER,
        spot_diameter=SPOT,
    )


@pytest.fixture(scope="session")
def film() -> FilmSpec:
    return default_film()


@pytest.fixture(scope="session")
def small_film() -> FilmSpec:
    """A 100x100-cell film for fast pattern-semantics tests."""
    return FilmSpec(
        thickness=1.8e-6,
        remanence=20e-3,
        coercive_field=10e-3,
        extent=(200e-6, 200e-6),
        cell_size=2e-6,
    )


@pytest.fixture(scope="session")
def disk_radius(film) -> float:
    """Disk radius calibrated so the on-axis surface field is 130 uT."""
    return calibrated_disk_radius(130e-6, 2.0 * film.remanence, film.thickness)


@pytest.fixture(scope="session")
def disk_pattern(film, disk_radius):
    """Saturated film with one reversed calibrated disk at the origin."""
    return apply_edit(
        create_uniform(film, +1),
        reversing_stamp(Disk(center=(0.0, 0.0), radius=disk_radius)),
    )


@pytest.fixture(scope="session")
def disk_source(disk_pattern) -> FieldSource:
    """Calibrated disk plus the 60 uT opposing bias that forms the trap."""
    return FieldSource(
        pattern=disk_pattern, bias=BiasField(static=(0.0, 0.0, 60e-6))
    )


@pytest.fixture(scope="session")
def trap_region() -> SearchRegion:
    return SearchRegion(
        box=((-300e-6, 300e-6), (-300e-6, 300e-6), (60e-6, 500e-6)),
        seed_grid=(3, 3, 4),
    )


@pytest.fixture(scope="session")
def disk_trap(disk_source, trap_region):
    traps = find_zeros(disk_source, trap_region)
    assert len(traps) == 1
    return traps[0]


@pytest.fixture(scope="session")
def cached_disk_source(disk_pattern) -> FieldSource:
    """Disk source with an interpolator cache, for many-step integrations."""
    cache = CachedPatternField.build(
        disk_pattern,
        ((-2e-3, 2e-3), (-2e-3, 2e-3), (20e-6, 4e-3)),
        resolution=(41, 41, 41),
    )
    return FieldSource(
        pattern=disk_pattern,
        bias=BiasField(static=(0.0, 0.0, 60e-6)),
        pattern_cache=cache,
    )


@pytest.fixture(scope="session")
def annulus_pattern(film):
    """Saturated film with a reversed annulus (torus-trap geometry)."""
    from magchip.geometry import Annulus

    return apply_edit(
        create_uniform(film, +1),
        reversing_stamp(Annulus(center=(0.0, 0.0), r_inner=350e-6, r_outer=650e-6)),
    )


@pytest.fixture(scope="session")
def ring_source(annulus_pattern) -> FieldSource:
    """Annulus plus the opposing bias that puts the ring ~200 um up."""
    return FieldSource(
        pattern=annulus_pattern, bias=BiasField(static=(0.0, 0.0, 45e-6))
    )


@pytest.fixture(scope="session")
def ring_region() -> SearchRegion:
    """Search box for the ring; the tolerance admits the rasterized locus,
    whose residual field ripples at the ~15 nT level around the ring."""
    return SearchRegion(
        box=((-800e-6, 800e-6), (-800e-6, 800e-6), (60e-6, 500e-6)),
        seed_grid=(4, 4, 4),
        zero_tolerance=50e-9,
    )


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20260824)

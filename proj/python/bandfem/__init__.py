"""Narrow-band finite element solver for elliptic PDEs on implicit surfaces.

The heavy lifting lives in the compiled extension ``bandfem._core``; this
package re-exports the public pieces: implicit surfaces (circle, sphere,
torus), narrow-band mesh generation and refinement, the Jacobi-PCG solver,
and the benchmark study driver.
"""

from ._core import (
    BandMesh2,
    BandMesh3,
    ConfigError,
    SolverError,
    Surface2,
    Surface3,
    build_band_mesh,
    pcg,
    refine,
    run_study,
)

__all__ = [
    "BandMesh2",
    "BandMesh3",
    "ConfigError",
    "SolverError",
    "Surface2",
    "Surface3",
    "build_band_mesh",
    "pcg",
    "refine",
    "run_study",
]

__version__ = "0.1.0"

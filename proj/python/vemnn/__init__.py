"""Divergence-free virtual elements for generalized Newtonian Stokes flow."""

from ._vemnn import (
    UsageError,
    VemnnError,
    aeoc,
    convergence,
    mesh,
    solve,
    verify,
    version,
)

__version__ = version()

__all__ = [
    "UsageError",
    "VemnnError",
    "aeoc",
    "convergence",
    "mesh",
    "solve",
    "verify",
    "version",
]

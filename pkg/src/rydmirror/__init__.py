"""
Module: rydmirror
=================
Sub-wavelength atomic mirrors with Rydberg blockade, simulated in JAX.

Two-dimensional arrays of two-level atoms reflect light almost perfectly
when their spacing is below the transition wavelength. Dressing the
excited state with a Rydberg level makes that mirror nonlinear: one
excitation blockades its neighbours and punches a hole into the mirror.
This package computes the linear and nonlinear optical response of such
arrays, optimizes a single-photon switch built on them, and compares a
semi-classical stochastic model of the saturated mirror against exact
master-equation solutions.

Submodules
----------
- `arrays`:
    Geometry, Green's-tensor couplings, spin-wave dispersion and
    weak-drive scattering of the bare array
- `rydberg`:
    Dressing potentials, two-photon correlations, the photon switch, the
    strong-drive master equation and the stochastic mirror
- `tools`:
    Logging, worker pools, scalar optimizers and least-squares fits
- `harness`:
    Experiment configs, result files, figure presets and the `rydmirror`
    command

Examples
--------
Reflectance of a 20 × 20 array probed with a Gaussian beam:
    >>> from rydmirror.arrays import build_square_array, reflectance_sweep
    >>> geometry = build_square_array(20, 0.5)
    >>> rows = reflectance_sweep(geometry, [1.5, 2.0])

Reproducing a figure dataset from the command line:
    $ rydmirror preset fig2 --output-dir results

Notes
-----
Lengths are in units of the transition wavelength λ₀ and rates in units
of the single-atom linewidth Γ₀. Double precision is enabled on import of
every numerical module.
"""

from . import arrays, errors, harness, rydberg, tools

__all__: list[str] = [
    "arrays",
    "errors",
    "harness",
    "rydberg",
    "tools",
]

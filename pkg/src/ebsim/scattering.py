"""Steady-state input-output amplitudes of a charged quantum dot in a double-sided cavity.

All rates and frequencies are expressed in units of the port decay rate ``kappa``;
the probe is described by its detuning ``omega - omega_0``. Amplitudes follow the
``exp(-i omega t)`` convention, so the cold cavity transmits with ``t0 = -1`` on
resonance.

Both amplitude functions broadcast over numpy arrays of detunings.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, fields, replace

import numpy as np

from ._validation import (
    DomainError,
    EmptyInputError,
    InvalidParameterError,
    as_detuning,
    check_finite,
    check_nonnegative,
)

__all__ = [
    "CavityParams",
    "ScatterAmplitudes",
    "SpectrumTable",
    "coupled_amplitudes",
    "cold_amplitudes",
    "scatter_amplitudes",
    "sweep_spectra",
    "critical_photon_number",
    "local_maxima",
]


@dataclass(frozen=True)
class CavityParams:
    """Rates and frequencies of the spin-cavity system.

    Defaults are the strong-coupling working point: ``g = 2.4``, ``gamma = 0.1``,
    no side leakage, cavity and trion both resonant with ``omega_0``.
    ``gamma`` is the full dipole linewidth; ``gamma / 2`` enters the amplitudes.
    """

    g: float = 2.4
    kappa: float = 1.0
    kappa_s: float = 0.0
    gamma: float = 0.1
    omega_c: float = 0.0
    omega_x: float = 0.0

    def __post_init__(self):
        for name in ("g", "kappa_s", "gamma"):
            object.__setattr__(self, name, check_nonnegative(name, getattr(self, name)))
        for name in ("omega_c", "omega_x"):
            object.__setattr__(self, name, check_finite(name, getattr(self, name)))
        kappa = check_finite("kappa", self.kappa)
        if kappa <= 0:
            raise InvalidParameterError(f"kappa must be > 0, got {kappa!r}")
        object.__setattr__(self, "kappa", kappa)

    @property
    def resonant(self) -> bool:
        return self.omega_c == 0.0 and self.omega_x == 0.0

    def normalized(self) -> "CavityParams":
        """Rescale every rate and frequency so that ``kappa == 1``."""
        k = self.kappa
        return CavityParams(
            g=self.g / k,
            kappa=1.0,
            kappa_s=self.kappa_s / k,
            gamma=self.gamma / k,
            omega_c=self.omega_c / k,
            omega_x=self.omega_x / k,
        )

    def with_(self, **changes) -> "CavityParams":
        return replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class ScatterAmplitudes:
    t: complex
    r: complex
    t0: complex
    r0: complex
    detuning: float

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return self.t, self.r, self.t0, self.r0


def _check_params(params) -> CavityParams:
    if not isinstance(params, CavityParams):
        raise InvalidParameterError(f"expected CavityParams, got {type(params).__name__}")
    return params


def cold_amplitudes(params: CavityParams, detuning):
    """Transmission and reflection ``(t0, r0)`` of the uncoupled cavity.

    Independent of ``g`` and ``gamma``.
    """
    params = _check_params(params)
    detuning = as_detuning(detuning)
    denom = 1j * (params.omega_c - detuning) + params.kappa + params.kappa_s / 2
    t0 = -params.kappa / denom
    return t0, 1 + t0


def _coupling_term(g: float, dipole: np.ndarray) -> np.ndarray:
    # g**2 / dipole in scaled real arithmetic; complex division misbehaves for subnormal divisors
    a, b = dipole.real, dipole.imag
    s = np.maximum(np.abs(a), np.abs(b))
    with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
        a, b = a / s, b / s
        w = (g / s) * g / (a * a + b * b)
        re = np.where(a == 0, 0.0, w * a)
        im = np.where(b == 0, 0.0, -w * b)
    out = np.empty(dipole.shape, dtype=complex)
    out.real = np.where(s == 0, np.inf, re)
    out.imag = im
    return out


def coupled_amplitudes(params: CavityParams, detuning):
    """Transmission and reflection ``(t, r)`` with the dot coupled at strength ``g``.

    ``g == 0`` goes through :func:`cold_amplitudes` so the two agree bitwise.
    """
    params = _check_params(params)
    if params.g == 0:
        return cold_amplitudes(params, detuning)
    detuning = as_detuning(detuning)
    if not isinstance(detuning, np.ndarray):
        return _coupled_scalar(params, detuning)
    w = detuning
    dipole = 1j * (params.omega_x - w) + params.gamma / 2
    cavity = 1j * (params.omega_c - w) + params.kappa + params.kappa_s / 2
    with np.errstate(invalid="ignore"):
        t = -params.kappa / (cavity + _coupling_term(params.g, dipole))
    # a lossless dipole driven on resonance blocks transmission entirely
    t = np.where(np.isfinite(t), t, 0j)
    return t, 1 + t


def _coupled_scalar(params: CavityParams, detuning: float) -> tuple[complex, complex]:
    # plain complex arithmetic: same formula as the array path, without numpy call overhead
    dipole = complex(params.gamma / 2, params.omega_x - detuning)
    if dipole == 0:
        return 0j, 1 + 0j
    cavity = complex(params.kappa + params.kappa_s / 2, params.omega_c - detuning)
    t = -params.kappa / (cavity + params.g**2 / dipole)
    if not cmath.isfinite(t):
        t = 0j
    return t, 1 + t


def scatter_amplitudes(params: CavityParams, detuning: float) -> ScatterAmplitudes:
    detuning = as_detuning(detuning)
    if isinstance(detuning, np.ndarray):
        raise InvalidParameterError("scatter_amplitudes takes a single detuning")
    t, r = coupled_amplitudes(params, detuning)
    t0, r0 = cold_amplitudes(params, detuning)
    return ScatterAmplitudes(complex(t), complex(r), complex(t0), complex(r0), detuning)


SPECTRUM_COLUMNS = (
    "detuning", "abs_t", "abs_r", "abs_t0", "abs_r0", "arg_t", "arg_r", "arg_t0", "arg_r0",
)


@dataclass(frozen=True)
class SpectrumTable:
    """Column-oriented spectra; each attribute is an array aligned with ``detuning``."""

    detuning: np.ndarray
    t: np.ndarray
    r: np.ndarray
    t0: np.ndarray
    r0: np.ndarray

    columns = SPECTRUM_COLUMNS

    def __len__(self) -> int:
        return len(self.detuning)

    def as_array(self) -> np.ndarray:
        """``(n, 9)`` real array in :attr:`columns` order."""
        amps = (self.t, self.r, self.t0, self.r0)
        return np.column_stack(
            [self.detuning] + [np.abs(a) for a in amps] + [np.angle(a) for a in amps]
        )

    def rows(self) -> list[tuple[float, ...]]:
        return [tuple(float(v) for v in row) for row in self.as_array()]


def sweep_spectra(params: CavityParams, grid) -> SpectrumTable:
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise EmptyInputError("detuning grid is empty")
    grid = as_detuning(grid)
    if np.any(np.diff(grid) <= 0):
        raise InvalidParameterError("detuning grid must be strictly increasing")
    t, r = coupled_amplitudes(params, grid)
    t0, r0 = cold_amplitudes(params, grid)
    return SpectrumTable(grid, t, r, t0, r0)


def local_maxima(values) -> np.ndarray:
    """Indices of interior strict local maxima (plateaus count once, at their left edge)."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return np.array([], dtype=int)
    out = []
    i = 1
    while i < v.size - 1:
        if v[i] > v[i - 1]:
            j = i
            while j < v.size - 1 and v[j + 1] == v[i]:
                j += 1
            if j < v.size - 1 and v[j + 1] < v[i]:
                out.append(i)
            i = j + 1
        else:
            i += 1
    return np.array(out, dtype=int)


def critical_photon_number(params: CavityParams) -> float:
    """Saturation photon number ``gamma**2 / (2 g**2)``."""
    params = _check_params(params)
    if params.g == 0:
        raise DomainError("critical photon number is undefined for g = 0")
    return params.gamma**2 / (2 * params.g**2)

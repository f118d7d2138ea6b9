"""Coefficients and spectral-parameter dynamics of the non-isospectral DSI system.

Every closed form here is exact; the only branch is ``omega1 == 0``, where the
``omega0 / omega1`` term of the general solution is replaced by the polynomial
limit obtained by integrating ``k_t = omega1 * k + i * omega0`` directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

VARIANTS = ("full", "xi", "eta")


@dataclass(frozen=True)
class NonisoCoefficients:
    """Real constants of the reduced system.

    ``a0`` does not enter the reduced equations; it is kept so the field of the
    original variables, ``q * exp(-2i a0 t)``, can be emitted on request.
    """

    omega0: float = 0.0
    omega1: float = 0.0
    a1: float = 0.0
    a0: float = 0.0

    def __post_init__(self):
        for name in ("omega0", "omega1", "a1", "a0"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    def restore_a0(self, q, t):
        """Return the field of the un-scaled equation, ``q * exp(-2i a0 t)``."""
        return q * np.exp(-2j * self.a0 * t)


@dataclass(frozen=True)
class SpectralMode:
    """One pair ``(k(t), l(t))`` fixed by its integration constants.

    ``kI0`` and ``lI0`` are integration constants, not values at ``t = 0``:
    for ``omega1 != 0`` the imaginary part at ``t = 0`` is ``kI0 - omega0/omega1``.
    Use :meth:`from_initial` to build a mode from values at ``t = 0``.
    """

    kR0: float
    kI0: float
    lR0: float
    lI0: float
    coeffs: NonisoCoefficients = field(default_factory=NonisoCoefficients)

    def __post_init__(self):
        for name in ("kR0", "kI0", "lR0", "lI0"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.kR0 <= 0 or self.lR0 <= 0:
            raise ValueError("kR0 and lR0 must be strictly positive")
        w0, w1 = self.coeffs.omega0, self.coeffs.omega1
        if w1 != 0 and not math.isfinite(w0 / w1):
            raise ValueError("omega0 / omega1 overflows; use omega1 = 0 exactly")

    @classmethod
    def from_initial(cls, k0: complex, l0: complex, coeffs: NonisoCoefficients):
        """Build the mode whose ``k(0), l(0)`` equal the given values."""
        shift = 0.0 if coeffs.omega1 == 0 else coeffs.omega0 / coeffs.omega1
        k0, l0 = complex(k0), complex(l0)
        return cls(k0.real, k0.imag + shift, l0.real, l0.imag + shift, coeffs)

    # -- evolution -----------------------------------------------------------

    def _amp_offset(self, c0: complex):
        # k(t) = amp * exp(omega1 t) + offset  (omega1 != 0)
        w = self.coeffs.omega1
        return c0, -1j * self.coeffs.omega0 / w

    def _value(self, c0: complex, t):
        w, w0 = self.coeffs.omega1, self.coeffs.omega0
        if w == 0:
            return c0 + 1j * w0 * np.asarray(t, dtype=float)
        amp, offset = self._amp_offset(c0)
        return amp * np.exp(w * np.asarray(t, dtype=float)) + offset

    def k(self, t):
        return self._value(complex(self.kR0, self.kI0), t)

    def l(self, t):  # noqa: E743
        return self._value(complex(self.lR0, self.lI0), t)

    def k_dot(self, t):
        return self.coeffs.omega1 * self.k(t) + 1j * self.coeffs.omega0

    def l_dot(self, t):
        return self.coeffs.omega1 * self.l(t) + 1j * self.coeffs.omega0

    def product_real(self, t):
        """``kR(t) * lR(t)``, which grows exactly as ``exp(2 omega1 t)``."""
        return self.kR0 * self.lR0 * np.exp(2 * self.coeffs.omega1 * np.asarray(t, dtype=float))

    # -- phases ---------------------------------------------------------------

    def _integrals(self, c0: complex, t):
        """Return ``(int_0^t k ds, int_0^t k^2 ds)`` for the pair member ``c0``."""
        w, w0 = self.coeffs.omega1, self.coeffs.omega0
        t = np.asarray(t, dtype=float)
        if w == 0:
            first = c0 * t + 0.5j * w0 * t**2
            second = c0**2 * t + 1j * w0 * c0 * t**2 - w0**2 * t**3 / 3.0
            return first, second
        amp, offset = self._amp_offset(c0)
        phi1 = np.expm1(w * t) / w
        phi2 = np.expm1(2 * w * t) / (2 * w)
        first = amp * phi1 + offset * t
        second = amp**2 * phi2 + 2 * amp * offset * phi1 + offset**2 * t
        return first, second

    def omega(self, t, variant: str = "full"):
        """Frequency ``Omega(t)``: the time derivative of the accumulated phase."""
        a1 = self.coeffs.a1
        k, l = self.k(t), self.l(t)
        if variant == "full":
            return dispersion(k, l, self.coeffs)
        if variant == "xi":
            return 1j * k**2 + a1 * k
        if variant == "eta":
            return 1j * l**2 - a1 * l
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")

    def accumulated_phase(self, t, variant: str = "full"):
        return accumulated_phase(self, t, variant)


def evolve_k(mode: SpectralMode, t):
    return mode.k(t)


def evolve_l(mode: SpectralMode, t):
    return mode.l(t)


def dispersion(k, l, coeffs: NonisoCoefficients):
    """Solve ``i Omega + k^2 + l^2 - i a1 (k - l) - i omega1 = 0`` for ``Omega``."""
    return 1j * (k**2 + l**2) + coeffs.a1 * (k - l) + coeffs.omega1


def accumulated_phase(mode: SpectralMode, t, variant: str = "full"):
    """Closed-form ``int_0^t Omega(s) ds`` for the requested phase variant.

    ``"full"`` is the plane-wave frequency (dispersion relation); ``"xi"`` and
    ``"eta"`` are the factored dromion frequencies ``i k^2 + a1 k`` and
    ``i l^2 - a1 l``.
    """
    a1, w1 = mode.coeffs.a1, mode.coeffs.omega1
    k1, k2 = mode._integrals(complex(mode.kR0, mode.kI0), t)
    l1, l2 = mode._integrals(complex(mode.lR0, mode.lI0), t)
    if variant == "full":
        return 1j * (k2 + l2) + a1 * (k1 - l1) + w1 * np.asarray(t, dtype=float)
    if variant == "xi":
        return 1j * k2 + a1 * k1
    if variant == "eta":
        return 1j * l2 - a1 * l1
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def chi(mode: SpectralMode, xi, eta, t, variant: str = "full"):
    """Phase ``k xi + l eta + int Omega dt``; the factored variants drop one term."""
    phase = mode.accumulated_phase(t, variant)
    if variant == "full":
        return mode.k(t) * xi + mode.l(t) * eta + phase
    if variant == "xi":
        return mode.k(t) * xi + phase + 0 * np.asarray(eta)
    return mode.l(t) * eta + phase + 0 * np.asarray(xi)


def chi_dot(mode: SpectralMode, xi, eta, t, variant: str = "full"):
    """Time derivative of :func:`chi` at fixed ``(xi, eta)``."""
    om = mode.omega(t, variant)
    if variant == "full":
        return mode.k_dot(t) * xi + mode.l_dot(t) * eta + om
    if variant == "xi":
        return mode.k_dot(t) * xi + om + 0 * np.asarray(eta)
    return mode.l_dot(t) * eta + om + 0 * np.asarray(xi)

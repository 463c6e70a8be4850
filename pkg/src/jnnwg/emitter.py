"""Closed-form and quadrature predictions for emitters on a chiral linear waveguide.

These are the Markovian cascaded-emitter results: an atom coupled to sites
``(l, l+1)`` with strength ``g`` sees only the ``k ~ 0`` branch, so its
amplitude decays at ``2 g^2 / v_g`` and the photon reaches a downstream atom
after ``t0 = (l2 - l1) / v_g``. Amplitudes are interaction-picture values;
compare ``|.|^2`` against the lattice simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .lattice import CouplingProfile

QUAD_EPSABS = 1e-10
QUAD_LIMIT = 400


def profile_emit(g_max: float, t_m: float, v_g: float, t, rate_factor: float = 2.0):
    """Rising coupling ``g_max sqrt(r/(2-r))``, ``r = exp(rate_factor g_max^2 (t - t_m) / v_g)``; flat after t_m."""
    return CouplingProfile("shaped_emit", g_max=g_max, t_m=t_m, v_g=v_g, rate_factor=rate_factor)(t)


def profile_absorb(g_max: float, t_m: float, t_0: float, v_g: float, t, rate_factor: float = 2.0):
    """Time mirror of :func:`profile_emit` about ``t_m + t_0``."""
    return CouplingProfile("shaped_absorb", g_max=g_max, t_m=t_m, t_0=t_0, v_g=v_g,
                           rate_factor=rate_factor)(t)


@dataclass(frozen=True)
class EmitterPair:
    """Radiating atom at ``(l1, l1+1)`` and target atom at ``(l2, l2+1)``."""

    l1: int
    l2: int
    g1: CouplingProfile
    g2: CouplingProfile
    v_g: float = 1.0

    def __post_init__(self):
        if not self.l1 + 1 < self.l2:
            raise ValueError(f"need l1 + 1 < l2, got l1={self.l1}, l2={self.l2}")
        if self.v_g <= 0:
            raise ValueError("v_g must be positive")

    @property
    def t0(self) -> float:
        return (self.l2 - self.l1) / self.v_g


def _as_profile(g) -> Callable[[float], float]:
    if isinstance(g, CouplingProfile):
        return g
    if callable(g):
        return g
    return CouplingProfile.constant(float(g))


def _integrate(f, a: float, b: float, points=()) -> float:
    if b <= a:
        return 0.0
    pts = [p for p in points if a < p < b] or None
    val, _ = quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=1e-10, limit=QUAD_LIMIT, points=pts)
    return val


def _breaks(g) -> tuple[float, ...]:
    return getattr(g, "breakpoints", ())


def decay_exponent(g, v_g: float, a: float, b: float) -> float:
    """``int_a^b 2 |g(tau)|^2 / v_g dtau``."""
    g = _as_profile(g)
    if isinstance(g, CouplingProfile) and g.is_constant:
        return 2.0 * g.g ** 2 * max(b - a, 0.0) / v_g
    return _integrate(lambda s: 2.0 * float(g(s)) ** 2 / v_g, a, b, _breaks(g))


def analytic_b1(g1, v_g: float, t: float) -> complex:
    """Radiating-atom amplitude ``exp(-int_0^t 2|g1|^2/v_g)``."""
    if t <= 0:
        return complex(1.0)
    return complex(math.exp(-decay_exponent(g1, v_g, 0.0, t)))


def _b2_constant(g1: float, g2: float, v_g: float, s: float) -> float:
    if s <= 0:
        return 0.0
    if g1 == g2:
        gamma = 2.0 * g1 ** 2 / v_g
        return -(4.0 * g1 ** 2 / v_g) * s * math.exp(-gamma * s)
    gam1 = 2.0 * g1 ** 2 / v_g
    gam2 = 2.0 * g2 ** 2 / v_g
    # e^{-gam1 s} - e^{-gam2 s} without cancellation near g1 = g2
    diff = -math.exp(-gam1 * s) * math.expm1(-(gam2 - gam1) * s)
    return -2.0 * g2 * g1 / (g2 ** 2 - g1 ** 2) * diff


def analytic_b2(pair: EmitterPair, t: float) -> complex:
    """Target-atom amplitude for the cascaded pair.

    ``b2(t) = -int_{t0}^t dt' 4 g2(t') g1(t'-t0) b1(t'-t0) / v_g
    * exp(-int_{t'}^t 2|g2|^2 / v_g)``. Constant profiles use the closed
    forms (unequal and equal couplings); anything else goes through nested
    adaptive quadrature.
    """
    s = t - pair.t0
    if s <= 0:
        return complex(0.0)
    g1, g2, v = pair.g1, pair.g2, pair.v_g
    if g1.is_constant and g2.is_constant:
        return complex(_b2_constant(g1.g, g2.g, v, s))

    t0 = pair.t0

    def integrand(tp: float) -> float:
        b1 = math.exp(-decay_exponent(g1, v, 0.0, tp - t0))
        tail = math.exp(-decay_exponent(g2, v, tp, t))
        return 4.0 * float(g2(tp)) * float(g1(tp - t0)) * b1 * tail / v

    points = [bp + t0 for bp in _breaks(g1)] + list(_breaks(g2))
    return complex(-_integrate(integrand, t0, t, points))


def analytic_b2_series(pair: EmitterPair, times) -> np.ndarray:
    return np.array([analytic_b2(pair, float(t)) for t in np.atleast_1d(times)])


def peak_absorption(g: float, v_g: float, t0: float) -> tuple[float, float]:
    """Time and height of the equal-coupling absorption maximum: ``(t0 + v_g/(2g^2), 4/e^2)``."""
    if g <= 0:
        raise ValueError("g must be positive")
    return t0 + v_g / (2.0 * g ** 2), 4.0 / math.e ** 2


def lorentzian_reflection(delta, gamma: float):
    """Single-atom reflectance ``Gamma^2 / (Delta^2 + Gamma^2)``."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    delta = np.asarray(delta, dtype=float)
    out = gamma ** 2 / (delta ** 2 + gamma ** 2)
    return float(out) if out.ndim == 0 else out


def rabi_prediction(g3: float) -> float:
    """Vacuum Rabi frequency ``2 g3`` of a probe atom inside an atomic-mirror cavity."""
    if g3 <= 0:
        raise ValueError("g3 must be positive")
    return 2.0 * g3


def rabi_population(g3: float, t):
    return np.cos(rabi_prediction(g3) * np.asarray(t, dtype=float) / 2.0) ** 2


def mirror_cavity_kappa(r: float, d: float, v_g: float = 1.0) -> float:
    """Leak rate ``-(v_g/d) ln r`` for photon number falling as ``r^{v_g t / d}``."""
    if r <= 0 or r > 1:
        raise ValueError("reflection probability must lie in (0, 1]")
    if d < 1:
        raise ValueError("mirror separation must be >= 1 site")
    return -(v_g / d) * math.log(r)

"""Independent reference computations used by the test suite.

Nothing here imports the package's solvers or evolvers: designs come from
sympy, Hamiltonians from explicit loops, emitter amplitudes from an ODE
integration of the cascaded equations.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp

K = sp.Symbol("k", real=True)


def _band(hs, thetas):
    return -sum(2 * h * sp.cos(j * K + th) for j, (h, th) in enumerate(zip(hs, thetas), start=1))


def sympy_chiral(J: int, v_g=sp.Integer(1)) -> list[sp.Rational]:
    """Sine-channel hoppings with omega'(0) = v_g and the next J-1 odd derivatives zero."""
    hs = sp.symbols(f"h1:{J + 1}")
    w = _band(hs, [sp.pi / 2] * J)
    eqs = [sp.diff(w, K, 1).subs(K, 0) - v_g]
    eqs += [sp.diff(w, K, 2 * i - 1).subs(K, 0) for i in range(2, J + 1)]
    sol = sp.solve(eqs, hs, dict=True)[0]
    return [sp.nsimplify(sol[h]) for h in hs]


def sympy_symmetric(J: int, v_g=sp.Integer(1)) -> list[sp.Rational]:
    """Cosine hoppings on odd offsets with slope v_g at pi/2 and higher odd derivatives zero."""
    odd = list(range(1, J + 1, 2))
    hs = sp.symbols(f"h1:{J + 1}")
    sub = {hs[j - 1]: 0 for j in range(2, J + 1, 2)}
    w = _band(hs, [0] * J).subs(sub)
    unknowns = [hs[j - 1] for j in odd]
    eqs = [sp.diff(w, K, 1).subs(K, sp.pi / 2) - v_g]
    eqs += [sp.diff(w, K, 2 * i + 1).subs(K, sp.pi / 2) for i in range(1, len(odd))]
    sol = sp.solve(eqs, unknowns, dict=True)[0]
    return [sp.nsimplify(sol.get(h, 0)) for h in hs]


def sympy_quadratic(J: int, q_g=sp.Integer(1)) -> list[sp.Rational]:
    """Cosine hoppings with omega''(0)/2 = q_g, then omega(0) = 0, then higher even derivatives zero."""
    hs = sp.symbols(f"h1:{J + 1}")
    w = _band(hs, [0] * J)
    eqs = [sp.diff(w, K, 2).subs(K, 0) / 2 - q_g, w.subs(K, 0)]
    eqs += [sp.diff(w, K, 2 * i).subs(K, 0) for i in range(2, J)]
    sol = sp.solve(eqs[:J], hs, dict=True)[0]
    return [sp.nsimplify(sol[h]) for h in hs]


def sympy_cubic(J: int, c_g=sp.Integer(1)) -> list[sp.Rational]:
    """Sine hoppings with omega'''(0)/6 = c_g, omega'(0) = 0, higher odd derivatives zero."""
    hs = sp.symbols(f"h1:{J + 1}")
    w = _band(hs, [sp.pi / 2] * J)
    eqs = [sp.diff(w, K, 3).subs(K, 0) / 6 - c_g, sp.diff(w, K, 1).subs(K, 0)]
    eqs += [sp.diff(w, K, 2 * i - 1).subs(K, 0) for i in range(3, J + 1)]
    sol = sp.solve(eqs[:J], hs, dict=True)[0]
    return [sp.nsimplify(sol[h]) for h in hs]


def dense_waveguide(L: int, hops: list[tuple[int, float, float]], omega0: float, periodic: bool) -> np.ndarray:
    """Element-by-element transcription: -h e^{i theta} on (l, l+j), conjugate below."""
    H = np.zeros((L, L), dtype=complex)
    for l in range(L):
        H[l, l] = omega0
        for j, h, th in hops:
            m = l + j
            if m >= L:
                if not periodic:
                    continue
                m -= L
            H[l, m] += -h * cmath.exp(1j * th)
            H[m, l] += -h * cmath.exp(-1j * th)
    return H


def band_values(hops: list[tuple[int, float, float]], omega0: float, k: np.ndarray) -> np.ndarray:
    out = np.full_like(k, omega0, dtype=float)
    for j, h, th in hops:
        out -= 2 * h * np.cos(j * k + th)
    return out


def cascaded_b2(g1, g2, v_g: float, t0: float, t: float) -> float:
    """b2(t) by integrating the cascaded amplitude equations with an adaptive RK solver.

    Works in the retarded time u = t' - t0 so the delayed source b1(u) is
    carried along as a state variable.
    """
    if t <= t0:
        return 0.0

    def rhs(u, y):
        i1, b2 = y
        a, b = g1(u), g2(u + t0)
        return [2 * a * a / v_g, -2 * b * b / v_g * b2 - 4 * b * a * math.exp(-i1) / v_g]

    sol = solve_ivp(rhs, (0.0, t - t0), [0.0, 0.0], method="DOP853", rtol=1e-11, atol=1e-13)
    return float(sol.y[1, -1])


def cascaded_b1(g1, v_g: float, t: float) -> float:
    sol = solve_ivp(lambda s, y: [-2 * g1(s) ** 2 / v_g * y[0]], (0.0, t), [1.0],
                    method="DOP853", rtol=1e-12, atol=1e-14)
    return float(sol.y[0, -1])

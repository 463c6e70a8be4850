"""Builtin scenarios, one per reproduced figure panel.

Rates are in units of v_g = 1 and omega0 = 0 throughout. Values not given
in the figure captions (t_end, dt, the emitter switch time t_m) are fixed
here so that every run is explicit.
"""

from __future__ import annotations

import copy
import math

CHIRAL_J5 = {"kind": "chiral_linear", "J": 5, "coefficient": 1.0}
NEAREST_NEIGHBOUR = {"kind": "chiral_linear", "J": 1, "coefficient": 1.0}
SYMMETRIC_J5 = {"kind": "symmetric_linear", "J": 5, "coefficient": 1.0}

_PACKET = {"kind": "packet", "sigma": 3.0, "l0": 10.0, "k0": 0.0}


def _emitters(g: float, L: int = 400, t_end: float = 340.0) -> dict:
    return {
        "kind": "emit-absorb",
        "waveguide": {"L": L, "boundary": "open", "design": CHIRAL_J5},
        "atoms": [
            {"id": "1", "sites": [50, 51], "omega": 0.0, "profile": {"kind": "constant", "g": g}},
            {"id": "2", "sites": [150, 151], "omega": 0.0, "profile": {"kind": "constant", "g": g}},
        ],
        "initial": {"kind": "atom_excited", "atom": "1"},
        "evolution": {"t_end": t_end, "dt": 0.25, "method": "exact_diagonal", "record_every": 1},
        "outputs": {"record_sites": 1, "pivot": 50},
    }


_SCENARIOS: dict[str, dict] = {
    "fig2a": {
        "kind": "dispersion",
        "description": "chiral linear band from J = 5 sine-channel hoppings",
        "waveguide": {"design": CHIRAL_J5},
        "outputs": {"rel_tol": 0.01, "n_k": 1025},
    },
    "fig2b": {
        "kind": "dispersion",
        "description": "nearest-neighbour band v_g sin(k) for comparison",
        "waveguide": {"design": NEAREST_NEIGHBOUR},
        "outputs": {"rel_tol": 0.01, "n_k": 1025},
    },
    "fig2c": {
        "kind": "propagate",
        "description": "initial Gaussian packet and its momentum distribution",
        "waveguide": {"L": 300, "boundary": "periodic", "design": CHIRAL_J5},
        "initial": _PACKET,
        "evolution": {"t_end": 0.0, "dt": 1.0, "method": "exact_diagonal", "record_every": 1},
        "outputs": {"record_sites": 1, "momentum": True},
    },
    "fig2d": {
        "kind": "propagate",
        "description": "packet transport in the J = 5 chiral waveguide",
        "waveguide": {"L": 300, "boundary": "periodic", "design": CHIRAL_J5},
        "initial": _PACKET,
        "evolution": {"t_end": 200.0, "dt": 1.0, "method": "exact_diagonal", "record_every": 1},
        "outputs": {"record_sites": 1},
    },
    "fig2e": {
        "kind": "propagate",
        "description": "packet spreading with nearest-neighbour hopping only",
        "waveguide": {"L": 300, "boundary": "periodic", "design": NEAREST_NEIGHBOUR},
        "initial": _PACKET,
        "evolution": {"t_end": 200.0, "dt": 1.0, "method": "exact_diagonal", "record_every": 1},
        "outputs": {"record_sites": 1},
    },
    "fig2f": {
        "kind": "propagate",
        "description": "propagating fidelity, J = 5 chiral vs nearest-neighbour",
        "waveguide": {"L": 300, "boundary": "periodic", "design": CHIRAL_J5},
        "reference_waveguide": {"L": 300, "boundary": "periodic", "design": NEAREST_NEIGHBOUR},
        "initial": _PACKET,
        "evolution": {"t_end": 200.0, "dt": 1.0, "method": "exact_diagonal", "record_every": 1},
        "outputs": {"record_sites": 1},
    },
    "fig3_weak": {
        **_emitters(0.1),
        "description": "directional emission and partial reabsorption, g = 0.1",
    },
    "fig3_moderate": {
        **_emitters(0.5, t_end=200.0),
        "description": "moderate coupling g = 0.5: compact packet, high reabsorption",
    },
    "fig4": {
        "kind": "emit-absorb",
        "description": "shaped emission/absorption profiles for complete transfer",
        "waveguide": {"L": 200, "boundary": "open", "design": CHIRAL_J5},
        "atoms": [
            {"id": "1", "sites": [50, 51], "omega": 0.0,
             "profile": {"kind": "shaped_emit", "g_max": 0.2, "t_m": 40.0, "rate_factor": 4.0}},
            {"id": "2", "sites": [150, 151], "omega": 0.0,
             "profile": {"kind": "shaped_absorb", "g_max": 0.2, "t_m": 40.0, "t_0": 100.0,
                         "rate_factor": 4.0}},
        ],
        "initial": {"kind": "atom_excited", "atom": "1"},
        "evolution": {"t_end": 300.0, "dt": 0.05, "method": "stepped_unitary", "record_every": 10},
        # the target absorbs the photon before it can reach the far edge
        "outputs": {"record_sites": 1, "pivot": 50, "skew_time": 100.0, "allow_boundary_echo": True},
    },
    "fig5_quadratic": {
        "kind": "dispersion",
        "description": "quadratic band q_g k^2 from J = 5 cosine-channel hoppings",
        "waveguide": {"design": {"kind": "quadratic", "J": 5, "coefficient": 1.0}},
        "outputs": {"rel_tol": 0.01, "n_k": 1025, "fit_halfwidth": math.pi / 2},
    },
    "fig5_cubic": {
        "kind": "dispersion",
        "description": "cubic band c_g k^3 (c_g = 1/3 reproduces the printed hoppings)",
        "waveguide": {"design": {"kind": "cubic", "J": 5, "coefficient": 1.0 / 3.0}},
        "outputs": {"rel_tol": 0.01, "n_k": 1025, "fit_halfwidth": math.pi / 2},
    },
    "fig6a": {
        "kind": "dispersion",
        "description": "symmetric band, linear around k = +-pi/2",
        "waveguide": {"design": SYMMETRIC_J5},
        "outputs": {"rel_tol": 0.01, "n_k": 1025},
    },
    "fig6b": {
        "kind": "propagate",
        "description": "packet at k0 = pi/2 in the symmetric linear waveguide",
        "waveguide": {"L": 1000, "boundary": "periodic", "design": SYMMETRIC_J5},
        "initial": {"kind": "packet", "sigma": 3.0, "l0": 10.0, "k0": math.pi / 2},
        "evolution": {"t_end": 400.0, "dt": 1.0, "method": "exact_diagonal", "record_every": 1},
        "outputs": {"record_sites": 5},
    },
    "fig6_rabi": {
        "kind": "rabi",
        "description": "probe atom between two atomic mirrors (vacuum Rabi oscillation)",
        "waveguide": {"L": 24, "boundary": "open", "design": SYMMETRIC_J5},
        "atoms": [
            {"id": "1", "sites": [11], "omega": 0.0, "profile": {"kind": "constant", "g": 10.0}},
            {"id": "2", "sites": [13], "omega": 0.0, "profile": {"kind": "constant", "g": 10.0}},
            {"id": "3", "sites": [12], "omega": 0.0, "profile": {"kind": "constant", "g": 0.1}},
        ],
        "initial": {"kind": "atom_excited", "atom": "3"},
        "evolution": {"t_end": 120.0, "dt": 0.05, "method": "exact_diagonal", "record_every": 1},
        "outputs": {"record_sites": 1, "probe": "3", "mirrors": ["1", "2"]},
    },
}


def names() -> list[str]:
    return sorted(_SCENARIOS)


def get(name: str) -> dict:
    """A fresh copy of the builtin config document ``name``."""
    try:
        doc = copy.deepcopy(_SCENARIOS[name])
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(names())}") from None
    doc["name"] = name
    doc.setdefault("v_g", 1.0)
    return doc

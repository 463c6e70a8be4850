"""Single-excitation lattice model: waveguide + two-level atoms.

Sites are numbered ``1..L`` at every public interface; internally they are
rows ``0..L-1`` of the Hamiltonian, followed by one row per atom.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dispersion import HoppingSet

NORM_TOL = 1e-10
CLIP_TOL = 1e-6

BOUNDARIES = ("periodic", "open")
PROFILE_KINDS = ("constant", "shaped_emit", "shaped_absorb")


@dataclass(frozen=True)
class WaveguideSpec:
    L: int
    hops: HoppingSet
    boundary: str = "periodic"

    def __post_init__(self):
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if self.L <= 2 * self.hops.J:
            raise ValueError(f"L = {self.L} must exceed 2J = {2 * self.hops.J}")


@dataclass(frozen=True)
class CouplingProfile:
    """Atom-waveguide coupling magnitude as a function of time.

    The shaped profiles rise (emit) or fall (absorb) as
    ``g_max sqrt(r / (2 - r))`` with ``r = exp(kappa (t - t_switch))``.
    ``kappa = rate_factor * g_max**2 / v_g``; the default factor of 2 is
    the textbook form, while 4 (the population decay rate at ``g_max`` for a
    two-point-coupled atom) gives a time-symmetric photon.
    """

    kind: str = "constant"
    g: float = 0.0
    g_max: float = 0.0
    t_m: float = 0.0
    t_0: float = 0.0
    v_g: float = 1.0
    rate_factor: float = 2.0

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"profile kind must be one of {PROFILE_KINDS}, got {self.kind!r}")
        if self.kind == "constant" and self.g < 0:
            raise ValueError("constant coupling must be non-negative")
        if self.kind != "constant" and self.g_max <= 0:
            raise ValueError("shaped profiles need g_max > 0")
        if self.v_g <= 0 or self.rate_factor <= 0:
            raise ValueError("v_g and rate_factor must be positive")

    @classmethod
    def constant(cls, g: float) -> "CouplingProfile":
        return cls("constant", g=g)

    @property
    def kappa(self) -> float:
        return self.rate_factor * self.g_max ** 2 / self.v_g

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    @property
    def peak(self) -> float:
        return self.g if self.kind == "constant" else self.g_max

    @property
    def breakpoints(self) -> tuple[float, ...]:
        if self.kind == "shaped_emit":
            return (self.t_m,)
        if self.kind == "shaped_absorb":
            return (self.t_m + self.t_0,)
        return ()

    def __call__(self, t):
        if self.kind == "constant":
            return np.full_like(np.asarray(t, dtype=float), self.g)[()]
        if self.kind == "shaped_emit":
            return _rise(self.g_max, self.kappa, np.asarray(t, dtype=float) - self.t_m)
        return _rise(self.g_max, self.kappa, self.t_m + self.t_0 - np.asarray(t, dtype=float))

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "g": self.g}
        doc = {"kind": self.kind, "g_max": self.g_max, "t_m": self.t_m, "v_g": self.v_g,
               "rate_factor": self.rate_factor}
        if self.kind == "shaped_absorb":
            doc["t_0"] = self.t_0
        return doc


def _rise(g_max: float, kappa: float, s):
    """``g_max sqrt(r/(2-r))`` for s < 0, ``g_max`` for s >= 0, with r = exp(kappa s)."""
    s = np.asarray(s, dtype=float)
    r = np.exp(kappa * np.minimum(s, 0.0))
    out = np.where(s < 0, g_max * np.sqrt(r / (2.0 - r)), g_max)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class AtomSpec:
    """A two-level atom coupled to one site or to two consecutive sites (1-based)."""

    id: str
    sites: tuple[int, ...]
    omega: float = 0.0
    profile: CouplingProfile = field(default_factory=CouplingProfile)

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if len(sites) not in (1, 2):
            raise ValueError(f"atom {self.id}: couple to one or two sites, got {sites}")
        if len(sites) == 2 and sites[1] != sites[0] + 1:
            raise ValueError(f"atom {self.id}: two-point coupling needs consecutive sites, got {sites}")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "id", str(self.id))


@dataclass(frozen=True)
class ExcitationState:
    """Amplitudes over L sites and N atoms, unit norm."""

    site_amps: np.ndarray
    atom_amps: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.site_amps, dtype=complex).copy()
        a = np.asarray(self.atom_amps, dtype=complex).copy()
        s.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "site_amps", s)
        object.__setattr__(self, "atom_amps", a)
        n = self.norm
        if abs(n - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {n!r} is not 1 within {NORM_TOL}")

    @classmethod
    def from_vector(cls, vec, L: int, time: float = 0.0) -> "ExcitationState":
        vec = np.asarray(vec)
        return cls(vec[:L], vec[L:], time)

    @classmethod
    def atom_excited(cls, L: int, n_atoms: int, index: int) -> "ExcitationState":
        a = np.zeros(n_atoms, dtype=complex)
        a[index] = 1.0
        return cls(np.zeros(L, dtype=complex), a)

    @property
    def L(self) -> int:
        return self.site_amps.size

    @property
    def n_atoms(self) -> int:
        return self.atom_amps.size

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.site_amps, self.atom_amps])

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.site_amps) ** 2) + np.sum(np.abs(self.atom_amps) ** 2)))

    def momentum_amplitudes(self) -> tuple[np.ndarray, np.ndarray]:
        """``c_k = sum_l e^{-ikl} a_l / sqrt(L)`` on the grid k = 2 pi m / L in [-pi, pi)."""
        L = self.L
        m = np.arange(L) - L // 2
        k = 2 * np.pi * m / L
        l = np.arange(1, L + 1)
        ck = np.exp(-1j * np.outer(k, l)) @ self.site_amps / math.sqrt(L)
        return k, ck

    def to_csv(self, path) -> None:
        """Columns index, kind, re, im, abs2; indices are 1-based per kind."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "kind", "re", "im", "abs2"])
            for kind, amps in (("site", self.site_amps), ("atom", self.atom_amps)):
                for i, z in enumerate(amps, 1):
                    w.writerow([i, kind, repr(float(z.real)), repr(float(z.imag)), repr(float(abs(z) ** 2))])


def waveguide_hamiltonian(wg: WaveguideSpec) -> np.ndarray:
    """L x L block: omega0 on the diagonal, ``-h_j e^{i theta_j}`` at (l, l + j)."""
    L = wg.L
    H = np.zeros((L, L), dtype=complex)
    H[np.diag_indices(L)] = wg.hops.omega0
    rows = np.arange(L)
    for j, h, th in wg.hops.terms:
        c = -h * np.exp(1j * th)
        cols = rows + j
        keep = cols < L if wg.boundary == "open" else np.ones(L, dtype=bool)
        r, cidx = rows[keep], cols[keep] % L
        H[r, cidx] += c
        H[cidx, r] += np.conj(c)
    return H


def _check_atoms(wg: WaveguideSpec, atoms: Sequence[AtomSpec]) -> None:
    ids = [a.id for a in atoms]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate atom ids {ids}")
    for a in atoms:
        for s in a.sites:
            if not 1 <= s <= wg.L:
                raise ValueError(f"atom {a.id}: site {s} outside [1, {wg.L}]")


def coupling_vectors(wg: WaveguideSpec, atoms: Sequence[AtomSpec]) -> list[np.ndarray]:
    """0/1 site-coupling pattern of each atom (length L)."""
    _check_atoms(wg, atoms)
    out = []
    for a in atoms:
        v = np.zeros(wg.L)
        v[[s - 1 for s in a.sites]] = 1.0
        out.append(v)
    return out


def build_hamiltonian(wg: WaveguideSpec, atoms: Sequence[AtomSpec] = (), t: float = 0.0,
                      base: np.ndarray | None = None) -> np.ndarray:
    """Dense Hermitian single-excitation Hamiltonian at time ``t``.

    ``base`` may pass a precomputed :func:`waveguide_hamiltonian` block.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    _check_atoms(wg, atoms)
    L, N = wg.L, len(atoms)
    H = np.zeros((L + N, L + N), dtype=complex)
    H[:L, :L] = waveguide_hamiltonian(wg) if base is None else base
    for n, a in enumerate(atoms):
        row = L + n
        H[row, row] = a.omega
        g = float(a.profile(t))
        for s in a.sites:
            H[row, s - 1] = g
            H[s - 1, row] = g
    return H


def hamiltonian_triplets(H: np.ndarray, path) -> None:
    """Write nonzero entries as ``row col re im`` lines (1-based)."""
    rows, cols = np.nonzero(H)
    with open(path, "w") as fh:
        for r, c in zip(rows, cols):
            z = H[r, c]
            fh.write(f"{r + 1} {c + 1} {float(z.real)!r} {float(z.imag)!r}\n")


def gaussian_packet(wg: WaveguideSpec, sigma: float, l0: float, k0: float = 0.0,
                    n_atoms: int = 0) -> ExcitationState:
    """Gaussian packet ``exp(-(l-l0)^2 / (2 sigma^2)) exp(i k0 l)``, normalised on the lattice.

    The centre must lie in [1, L]. On an open chain the packet is also
    rejected when more than 1e-6 of its continuum weight falls outside
    [1, L]. On a ring the formula is applied to sites 1..L as written
    and renormalised, so a wide packet near site 1 is truncated, not wrapped.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if not 1 <= l0 <= wg.L:
        raise ValueError(f"packet centre l0={l0} must lie in [1, {wg.L}]")
    l = np.arange(1, wg.L + 1)
    if wg.boundary == "open":
        wide = np.arange(1 - 10 * wg.L, 11 * wg.L + 1)
        weight = np.exp(-((wide - l0) ** 2) / sigma ** 2)
        outside = weight[(wide < 1) | (wide > wg.L)].sum() / weight.sum()
        if outside > CLIP_TOL:
            raise ValueError(f"packet (sigma={sigma}, l0={l0}) is clipped by the boundary: "
                             f"{outside:.2e} of its weight lies outside [1, {wg.L}]")
    amps = np.exp(-((l - l0) ** 2) / (2 * sigma ** 2)) * np.exp(1j * k0 * l)
    amps /= np.linalg.norm(amps)
    return ExcitationState(amps, np.zeros(n_atoms, dtype=complex))


def translate_state(state: ExcitationState, shift: int, boundary: str = "periodic") -> ExcitationState:
    """Move every site amplitude ``shift`` sites to the right; atoms untouched.

    With an open boundary amplitude pushed past the edge is dropped (at most
    1e-6 of the weight, else an error) and the result renormalised.
    """
    if int(shift) != shift:
        raise ValueError("shift must be an integer number of sites")
    shift = int(shift)
    if boundary == "periodic":
        return ExcitationState(np.roll(state.site_amps, shift), state.atom_amps, state.time)
    if boundary != "open":
        raise ValueError(f"unknown boundary {boundary!r}")
    L = state.L
    amps = np.zeros(L, dtype=complex)
    if abs(shift) >= L:
        lost = state.site_amps
    elif shift >= 0:
        lost = state.site_amps[L - shift:]
        amps[shift:] = state.site_amps[:L - shift]
    else:
        lost = state.site_amps[:-shift]
        amps[:L + shift] = state.site_amps[-shift:]
    lost_w = float(np.sum(np.abs(lost) ** 2))
    if lost_w > CLIP_TOL:
        raise ValueError(f"open-boundary shift by {shift} moves {lost_w:.2e} of the weight off the lattice")
    scale = 1.0 / math.sqrt(1.0 - lost_w) if lost_w else 1.0
    return ExcitationState(amps * scale, state.atom_amps * scale, state.time)

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from jnnwg import (
    AtomSpec,
    CouplingProfile,
    EvolutionConfig,
    ExcitationState,
    HoppingSet,
    StepSizeError,
    WaveguideSpec,
    build_hamiltonian,
    directional_split,
    evolve_static,
    evolve_timedep,
    gaussian_packet,
    propagating_fidelity,
    solve_chiral_linear,
)
from jnnwg.evolution import energy, fit_decay_rate, fit_rabi_frequency, packet_moments, pf_series


def _shaped_pair(L=80, l1=10, l2=50):
    wg = WaveguideSpec(L, solve_chiral_linear(5), "open")
    atoms = [
        AtomSpec("1", (l1, l1 + 1), 0.0, CouplingProfile("shaped_emit", g_max=0.2, t_m=15.0, rate_factor=4)),
        AtomSpec("2", (l2, l2 + 1), 0.0,
                 CouplingProfile("shaped_absorb", g_max=0.2, t_m=15.0, t_0=l2 - l1, rate_factor=4)),
    ]
    return wg, atoms, ExcitationState.atom_excited(L, 2, 0)


def _random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (A + A.conj().T) / 2


def test_config_validation():
    with pytest.raises(ValueError):
        EvolutionConfig(1.0, 0.3)
    with pytest.raises(ValueError):
        EvolutionConfig(1.0, 0.1, method="rk4")
    cfg = EvolutionConfig(1.0, 0.1, record_every=3)
    assert cfg.n_steps == 10
    assert np.allclose(cfg.record_times, [0.0, 0.3, 0.6, 0.9, 1.0])


def test_identity_hamiltonian_keeps_populations():
    rng = np.random.default_rng(1)
    v = rng.normal(size=6) + 0j
    psi = ExcitationState.from_vector(v / np.linalg.norm(v), 6)
    tr = evolve_static(0.7 * np.eye(6), psi, EvolutionConfig(5.0, 0.5), keep_amplitudes=True)
    assert np.allclose(tr.site_pops, tr.site_pops[0], atol=1e-15)
    assert np.allclose(tr.amplitudes[-1], np.exp(-0.7j * 5.0) * psi.vector, atol=1e-14)


def test_static_matches_scipy_expm():
    rng = np.random.default_rng(2)
    H = _random_hermitian(rng, 9)
    psi = ExcitationState.from_vector(np.eye(9)[0].astype(complex), 9)
    tr = evolve_static(H, psi, EvolutionConfig(2.0, 0.5), keep_amplitudes=True)
    assert np.allclose(tr.amplitudes[-1], expm(-2j * H) @ psi.vector, atol=1e-12)


def test_static_dimension_mismatch():
    psi = ExcitationState.atom_excited(3, 1, 0)
    with pytest.raises(ValueError):
        evolve_static(np.eye(5), psi, EvolutionConfig(1.0, 0.5))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_unitarity_energy_and_time_reversal(seed):
    rng = np.random.default_rng(seed)
    H = _random_hermitian(rng, 30)
    v = rng.normal(size=30) + 1j * rng.normal(size=30)
    psi = ExcitationState.from_vector(v / np.linalg.norm(v), 28)
    cfg = EvolutionConfig(20.0, 0.5)
    tr = evolve_static(H, psi, cfg, keep_amplitudes=True)
    assert np.max(np.abs(tr.norms - 1)) <= 1e-8
    e = [energy(H, a) for a in tr.amplitudes]
    assert np.ptp(e) <= 1e-8 * np.linalg.norm(H, 2)
    back = evolve_static(-H, tr.state(len(tr.times) - 1), cfg, keep_amplitudes=True)
    assert abs(np.vdot(psi.vector, back.amplitudes[-1])) ** 2 >= 1 - 1e-8


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000), g=st.floats(0.01, 0.8))
def test_stepped_matches_static_for_constant_couplings(seed, g):
    rng = np.random.default_rng(seed)
    hops = HoppingSet.from_arrays(rng.normal(size=3) * 0.5, rng.uniform(-math.pi, math.pi, 3))
    wg = WaveguideSpec(16, hops, "periodic")
    atoms = [AtomSpec("1", (3, 4), rng.normal() * 0.2, CouplingProfile.constant(g)),
             AtomSpec("2", (10,), 0.0, CouplingProfile.constant(0.5 * g))]
    v = rng.normal(size=18) + 1j * rng.normal(size=18)
    psi = ExcitationState.from_vector(v / np.linalg.norm(v), 16)
    H = build_hamiltonian(wg, atoms)
    dt = 0.1 / np.max(np.abs(np.linalg.eigvalsh(H)))
    cfg_s = EvolutionConfig(200 * dt, dt, "stepped_unitary", 20)
    cfg_e = EvolutionConfig(200 * dt, dt, "exact_diagonal", 20)
    a = evolve_timedep(wg, atoms, psi, cfg_s)
    b = evolve_static(H, psi, cfg_e)
    assert np.max(np.abs(a.site_pops - b.site_pops)) <= 1e-8
    assert np.max(np.abs(a.atom_pops - b.atom_pops)) <= 1e-8


def test_step_guard_reports_suggestion():
    wg, atoms, psi = _shaped_pair()
    with pytest.raises(StepSizeError) as info:
        evolve_timedep(wg, atoms, psi, EvolutionConfig(10.0, 0.5, "stepped_unitary"))
    assert info.value.suggested_dt < 0.5
    evolve_timedep(wg, atoms, psi, EvolutionConfig(1.0, 0.02, "stepped_unitary"))


def test_timedep_norm_and_second_order_convergence():
    wg, atoms, psi = _shaped_pair()
    t_end = 30.0

    def final(dt):
        tr = evolve_timedep(wg, atoms, psi, EvolutionConfig(t_end, dt, "stepped_unitary", 10 ** 6),
                            keep_amplitudes=True)
        assert np.max(np.abs(tr.norms - 1)) <= 1e-8
        return tr.amplitudes[-1]

    ref = final(0.0125)
    e1 = np.linalg.norm(final(0.05) - ref)
    e2 = np.linalg.norm(final(0.025) - ref)
    # with a dt/4 reference a pure dt^2 error gives e1/e2 = (1 - 1/16)/(1/4 - 1/16) = 5
    assert 5 / 2 <= e1 / e2 <= 5 * 2


def test_halving_dt_moves_final_atom_populations_below_1e6():
    wg, atoms, psi = _shaped_pair()
    cfg = dict(t_end=120.0, method="stepped_unitary", record_every=10 ** 6)
    a = evolve_timedep(wg, atoms, psi, EvolutionConfig(dt=0.05, **cfg)).atom_pops[-1]
    b = evolve_timedep(wg, atoms, psi, EvolutionConfig(dt=0.025, **cfg)).atom_pops[-1]
    assert np.max(np.abs(a - b)) <= 1e-6


# -- observables -----------------------------------------------------------------

def test_pf_trivial_and_chiral_transport():
    wg = WaveguideSpec(300, solve_chiral_linear(5), "periodic")
    psi = gaussian_packet(wg, 3.0, 10.0)
    assert propagating_fidelity(psi, psi, 0) == pytest.approx(1.0, abs=1e-14)
    H = build_hamiltonian(wg)
    tr = evolve_static(H, psi, EvolutionConfig(200.0, 1.0), keep_amplitudes=True)
    times, pf = pf_series(tr, psi)
    assert times.size == 201 and np.min(pf) >= 0.99
    centroids = np.array([packet_moments(p)[0] for p in tr.site_pops])
    assert np.max(np.abs(centroids - 10.0 - tr.times)[1:] / tr.times[1:]) <= 0.01


def test_nearest_neighbour_packet_spreads():
    wg = WaveguideSpec(300, solve_chiral_linear(1), "periodic")
    psi = gaussian_packet(wg, 3.0, 10.0)
    tr = evolve_static(build_hamiltonian(wg), psi, EvolutionConfig(200.0, 1.0), keep_amplitudes=True)
    var = np.array([packet_moments(p)[1] for p in tr.site_pops])
    # k0 = 0 is the inflection point of sin(k): spreading is third order and a
    # ~0.02 lattice breathing masks it during the first few time units
    assert np.all(np.diff(var[::10]) > 0) and np.all(np.diff(var[10:]) > 0)
    assert var[-1] > 10 * var[0]
    _, pf = pf_series(tr, psi)
    assert pf[-1] < pf[0]


def test_directional_split_cases():
    wg = WaveguideSpec(101, solve_chiral_linear(2), "periodic")
    s = gaussian_packet(wg, 4.0, 51.0)
    left, right = directional_split(s, 51)
    assert left == pytest.approx(right, abs=1e-10)
    assert directional_split(ExcitationState.atom_excited(20, 1, 0), 5) == (0.0, 0.0)
    with pytest.raises(ValueError):
        directional_split(s, 0)


def _moderate_run():
    wg = WaveguideSpec(400, solve_chiral_linear(5), "open")
    atoms = [AtomSpec("1", (50, 51), 0.0, CouplingProfile.constant(0.5)),
             AtomSpec("2", (150, 151), 0.0, CouplingProfile.constant(0.5))]
    psi = ExcitationState.atom_excited(400, 2, 0)
    return evolve_static(build_hamiltonian(wg, atoms), psi, EvolutionConfig(60.0, 0.25),
                         keep_amplitudes=True)


def test_emitter_directionality_within_criterion_bound():
    tr = _moderate_run()
    left, right = directional_split(tr.state(tr.index_of(40.0)), 50)
    assert left <= 0.02 and right >= 0.97


@pytest.mark.xfail(strict=True, reason="moderate coupling leaks about 0.018 upstream; see notes")
def test_emitter_directionality_after_decay_below_one_percent():
    tr = _moderate_run()
    left, _ = directional_split(tr.state(tr.index_of(40.0)), 50)
    assert left <= 0.01


def test_fit_helpers():
    t = np.linspace(0, 50, 501)
    assert fit_decay_rate(t, np.exp(-0.3 * t), 1.0, 10.0) == pytest.approx(0.3, rel=1e-10)
    pops = 0.9 * np.cos(0.37 * t / 2) ** 2 + 0.05
    assert fit_rabi_frequency(t, pops) == pytest.approx(0.37, rel=1e-6)
    mean, var, skew = packet_moments(np.array([0.0, 1.0, 2.0, 1.0, 0.0]))
    assert (mean, skew) == (3.0, 0.0) and var == pytest.approx(0.5)

"""Scattering-force model, time stepping, and cloud-level behavior."""

import numpy as np
import pytest

from magchip.constants import G_EARTH, HBAR, KB
from magchip.fields.bias import AuxQuadrupole, BiasField, FieldSource
from magchip.mot.config import Beam, MOTConfig, rb85, six_beam_config
from magchip.mot.forces import (
    beam_scattering_forces,
    saturation_parameters,
    total_force,
)
from magchip.mot.integrate import (
    AtomEnsemble,
    StepSizeError,
    step_atom,
    step_ensemble,
    verlet_step,
)
from magchip.mot.sim import capture_metric, simulate_cloud, transport_following
from magchip.traps import SearchRegion

SPECIES = rb85()
G_AUX = 0.03  # T/m


def quad_source(center=(0.0, 0.0, 0.0), g=G_AUX) -> FieldSource:
    return FieldSource(aux_quadrupole=AuxQuadrupole(center=center, axial_gradient=g))


def quad_config(center=(0.0, 0.0, 0.0), **kw) -> MOTConfig:
    return six_beam_config(SPECIES, center=center, axial_gradient_sign=1, **kw)


class TestConfigValidation:
    def test_six_beam_geometry(self):
        cfg = quad_config()
        assert len(cfg.beams) == 6
        dirs = np.array([b.direction for b in cfg.beams])
        for i in (0, 2, 4):
            np.testing.assert_allclose(dirs[i] + dirs[i + 1], 0.0, atol=1e-12)

    def test_red_detuning_required(self):
        with pytest.raises(ValueError):
            six_beam_config(SPECIES, detuning=+1e6)

    def test_default_detuning_one_linewidth(self):
        cfg = quad_config()
        assert cfg.detuning == pytest.approx(-SPECIES.linewidth)

    def test_broken_pair_rejected(self):
        cfg = quad_config()
        beams = list(cfg.beams)
        beams[1] = Beam((0, 1, 0), -1, 20e-3, 10e-3)
        with pytest.raises(ValueError):
            MOTConfig(
                beams=tuple(beams),
                detuning=cfg.detuning,
                wavelength=cfg.wavelength,
                linewidth=cfg.linewidth,
                saturation_intensity=cfg.saturation_intensity,
                zeeman_rate=cfg.zeeman_rate,
            )

    def test_film_absorption_attenuates_retro_leg(self):
        cfg = six_beam_config(SPECIES, film_absorption=0.1)
        assert cfg.beams[5].power == pytest.approx(0.9 * cfg.beams[4].power)

    def test_handedness_values(self):
        cfg = quad_config()
        assert cfg.beams[4].handedness == +1  # axial pair
        assert cfg.beams[0].handedness == -1  # transverse pairs


class TestForceModel:
    def test_pair_cancellation_at_null(self):
        cfg = quad_config()
        f = beam_scattering_forces(
            cfg, SPECIES, np.zeros(3), np.zeros(3), np.zeros(3)
        )
        single = np.linalg.norm(f[0])
        for i in (0, 2, 4):
            assert np.linalg.norm(f[i] + f[i + 1]) < 1e-12 * single

    def test_doppler_cooling_sign(self):
        cfg = quad_config()
        f = total_force(cfg, SPECIES, quad_source(g=1e-12), np.zeros(3), [1.0, 0, 0])
        assert f[0] < 0
        assert abs(f[1]) < abs(f[0]) * 1e-9 and abs(f[2]) < abs(f[0]) * 1e-9

    def test_restoring_on_all_axes(self):
        src = quad_source()
        cfg = quad_config()
        for axis in range(3):
            for sgn in (+1, -1):
                p = np.zeros(3)
                p[axis] = sgn * 50e-6
                f = total_force(cfg, SPECIES, src, p, np.zeros(3))
                assert f[axis] * sgn < 0, (axis, sgn, f)

    def test_gravity_toggle_is_exact(self):
        src = quad_source()
        cfg = quad_config()
        p, v = np.array([10e-6, 0, 0]), np.zeros(3)
        f0 = total_force(cfg, SPECIES, src, p, v, include_gravity=False)
        f1 = total_force(cfg, SPECIES, src, p, v, include_gravity=True)
        np.testing.assert_allclose(f1 - f0, [0, 0, -SPECIES.mass * G_EARTH], rtol=1e-12)

    def test_saturated_momentum_bound(self, rng):
        cfg = quad_config()
        src = quad_source()
        bound = 6 * HBAR * cfg.k * cfg.linewidth / 2
        for _ in range(25):
            p = rng.uniform(-1e-3, 1e-3, 3)
            v = rng.uniform(-10, 10, 3)
            f = total_force(cfg, SPECIES, src, p, v)
            assert np.linalg.norm(f) <= bound

    def test_force_linearization_near_zero(self):
        """Finite-difference force gradient matches local linearization."""
        cfg = quad_config()
        src = quad_source()
        h = 1e-6
        grad = np.empty(3)
        for axis in range(3):
            e = np.zeros(3)
            e[axis] = h
            fp = total_force(cfg, SPECIES, src, e, np.zeros(3))[axis]
            fm = total_force(cfg, SPECIES, src, -e, np.zeros(3))[axis]
            grad[axis] = (fp - fm) / (2 * h)
        # compare against a 10x larger displacement: linear within 5%
        for axis in range(3):
            e = np.zeros(3)
            e[axis] = 10 * h
            f = total_force(cfg, SPECIES, src, e, np.zeros(3))[axis]
            assert f == pytest.approx(grad[axis] * 10 * h, rel=0.05)

    def test_gaussian_beam_profile(self):
        cfg = quad_config()
        s0 = saturation_parameters(cfg, np.zeros(3))[0]
        w = cfg.beams[0].waist_radius
        # on the beam axis, transverse offset w gives exp(-2) of the peak
        off = saturation_parameters(cfg, np.array([0.0, w, 0.0]))[0]
        assert off[0] == pytest.approx(s0[0] * np.exp(-2.0), rel=1e-9)


class TestIntegrator:
    def test_free_flight_exact(self):
        def no_force(p, v, t):
            return np.zeros_like(p)

        p0 = np.array([[1e-3, 0, 0]])
        v0 = np.array([[0.1, -0.2, 0.05]])
        p1, v1 = verlet_step(p0, v0, no_force, SPECIES.mass, 1e-4)
        np.testing.assert_allclose(p1, p0 + v0 * 1e-4, rtol=1e-15)
        np.testing.assert_allclose(v1, v0, rtol=1e-15)

    def test_damped_oscillator_matches_closed_form(self):
        """x'' + 2 zeta w x' + w^2 x = 0 against the analytic solution."""
        m = SPECIES.mass
        omega = 2 * np.pi * 100.0
        zeta = 0.05
        k_spring = m * omega**2
        c_damp = 2 * zeta * omega * m

        def force(p, v, t):
            return -k_spring * p - c_damp * v

        period = 2 * np.pi / omega
        dt = period / 1000
        n = int(round(10 * period / dt))
        x0 = 1e-4
        p = np.array([[x0, 0, 0]])
        v = np.zeros((1, 3))
        t = 0.0
        for _ in range(n):
            p, v = verlet_step(p, v, force, m, dt, t)
            t += dt
        wd = omega * np.sqrt(1 - zeta**2)
        expect = (
            x0
            * np.exp(-zeta * omega * t)
            * (np.cos(wd * t) + zeta * omega / wd * np.sin(wd * t))
        )
        assert p[0, 0] == pytest.approx(expect, abs=1e-3 * x0)

    def test_dt_halving_converges(self):
        src = quad_source()
        cfg = quad_config()
        start = np.array([80e-6, -40e-6, 60e-6])
        finals = []
        for dt in (40e-6, 20e-6):
            ens = AtomEnsemble.create([start], [[0.02, 0, -0.01]])
            for k in range(int(round(10e-3 / dt))):
                ens = step_ensemble(ens, cfg, SPECIES, src, dt, time=k * dt)
            finals.append(ens.positions[0].copy())
        delta = np.linalg.norm(finals[0] - finals[1])
        assert delta < 0.01 * np.linalg.norm(finals[1] - start)

    def test_stability_guard(self):
        cfg = quad_config()
        src = quad_source()
        ens = AtomEnsemble.create([[0, 0, 0]], [[500.0, 0, 0]])
        with pytest.raises(StepSizeError):
            step_ensemble(ens, cfg, SPECIES, src, 1e-2)
        with pytest.raises(StepSizeError):
            step_ensemble(ens, cfg, SPECIES, src, -1e-6)

    def test_volume_kill(self):
        cfg = quad_config()
        src = quad_source()
        ens = AtomEnsemble.create([[0, 0, 2.1e-3]], [[0, 0, 0]])
        out = step_ensemble(
            ens, cfg, SPECIES, src, 1e-6,
            volume=((-1e-3, 1e-3), (-1e-3, 1e-3), (-1e-3, 2e-3)),
        )
        assert not out.alive[0]

    def test_dead_atoms_stay_frozen(self):
        cfg = quad_config()
        src = quad_source()
        ens = AtomEnsemble(
            positions=np.array([[0.0, 0.0, 5e-3]]),
            velocities=np.array([[1.0, 0.0, 0.0]]),
            alive=np.array([False]),
        )
        out = step_ensemble(ens, cfg, SPECIES, src, 1e-5)
        np.testing.assert_array_equal(out.positions, ens.positions)

    def test_step_atom_wrapper(self):
        cfg = quad_config()
        src = quad_source()
        p, v, alive = step_atom([10e-6, 0, 0], [0, 0, 0], cfg, SPECIES, src, 1e-6)
        assert alive
        assert p.shape == (3,) and v.shape == (3,)

    def test_stochastic_reproducible_with_seed(self):
        cfg = quad_config()
        src = quad_source()
        outs = []
        for _ in range(2):
            rng = np.random.default_rng(7)
            ens = AtomEnsemble.create([[0, 0, 0]], [[0, 0, 0]])
            for k in range(50):
                ens = step_ensemble(
                    ens, cfg, SPECIES, src, 1e-6, time=k * 1e-6, rng=rng
                )
            outs.append(ens.velocities.copy())
        np.testing.assert_array_equal(outs[0], outs[1])


class TestDopplerLimit:
    def test_equilibrium_temperature_within_factor_two(self):
        """1-D molasses at delta = -Gamma/2, low saturation: k_B T ~ hbar Gamma / 2."""
        delta = -SPECIES.linewidth / 2
        # two z beams only; transverse pairs carry no power
        waist = 10e-3
        peak = 0.25 * 16.7 * np.pi * waist**2 / 4  # power for s = 0.25 per beam
        beams = (
            Beam((1, 0, 0), -1, 0.0, waist),
            Beam((-1, 0, 0), -1, 0.0, waist),
            Beam((0, 1, 0), -1, 0.0, waist),
            Beam((0, -1, 0), -1, 0.0, waist),
            Beam((0, 0, 1), 1, peak, waist),
            Beam((0, 0, -1), 1, peak, waist),
        )
        cfg = MOTConfig(
            beams=beams,
            detuning=delta,
            wavelength=SPECIES.wavelength,
            linewidth=SPECIES.linewidth,
            saturation_intensity=16.7,
            zeeman_rate=SPECIES.zeeman_rate,
        )
        src = FieldSource()  # free space
        rng = np.random.default_rng(11)
        n_atoms = 40
        ens = AtomEnsemble.create(
            np.zeros((n_atoms, 3)), np.zeros((n_atoms, 3))
        )
        dt = 1e-6
        n_steps = 8000
        vz_samples = []
        for k in range(n_steps):
            ens = step_ensemble(ens, cfg, SPECIES, src, dt, time=k * dt, rng=rng)
            if k > n_steps // 2:
                vz_samples.append(ens.velocities[:, 2].copy())
        vz = np.concatenate(vz_samples)
        kbt = SPECIES.mass * vz.var()
        doppler = HBAR * SPECIES.linewidth / 2
        assert doppler / 2 < kbt < doppler * 2
        # sanity: this really is a temperature scale, ~145 uK
        assert 50e-6 < kbt / KB < 600e-6


class TestCloudAndCapture:
    def test_beams_off_is_ballistic(self):
        cfg = quad_config(power=0.0)
        src = quad_source()
        v0 = np.array([[0.05, 0.0, 0.02]])
        ens = AtomEnsemble.create([[0, 0, 0]], v0)
        duration, dt = 5e-3, 50e-6
        summary, final = simulate_cloud(
            cfg, SPECIES, src, ens, duration, dt,
            volume=((-1, 1), (-1, 1), (-1, 1)),
        )
        np.testing.assert_allclose(final.positions[0], v0[0] * duration, rtol=1e-9)

    def test_thermal_ensemble_stats(self, rng):
        ens = AtomEnsemble.thermal(200, (0, 0, 1e-3), 50e-6, 0.05, rng)
        assert ens.positions.shape == (200, 3)
        assert np.allclose(ens.positions.mean(axis=0), [0, 0, 1e-3], atol=20e-6)
        assert ens.velocities.std() == pytest.approx(0.05, rel=0.2)

    def test_capture_metric_requires_a_trap(self):
        src = FieldSource(bias=BiasField(static=(0, 0, 10e-6)))
        cfg = quad_config()
        region = SearchRegion(
            box=((-1e-4, 1e-4), (-1e-4, 1e-4), (1e-6, 2e-4)), seed_grid=(2, 2, 2)
        )
        with pytest.raises(ValueError):
            capture_metric(cfg, SPECIES, src, region)

    def test_transport_following_requires_modulation(self, ring_source, ring_region):
        cfg = quad_config()
        with pytest.raises(ValueError):
            transport_following(cfg, SPECIES, ring_source, ring_region, 1e-3, 1e-6)

    def test_capture_summary_fields(self):
        src = quad_source(center=(0, 0, 1e-3))
        cfg = quad_config(center=(0, 0, 1e-3))
        region = SearchRegion(
            box=((-2e-4, 2e-4), (-2e-4, 2e-4), (8e-4, 1.2e-3)), seed_grid=(2, 2, 2)
        )
        from magchip.traps import find_zeros

        trap = find_zeros(src, region)[0]
        ens = AtomEnsemble.create(
            [trap.position + np.array([30e-6, 0, 0])], [[0, 0, 0]]
        )
        summary, final = simulate_cloud(
            cfg, SPECIES, src, ens, 20e-3, 20e-6, trap=trap,
            volume=((-5e-3, 5e-3), (-5e-3, 5e-3), (1e-6, 5e-3)),
        )
        assert summary.captured_fraction == 1.0
        assert summary.alive_fraction == 1.0
        assert np.linalg.norm(summary.centroid - trap.position) < 20e-6

import numpy as np
import pytest

from rotogp.fields import ComplexField, Grid, gaussian_field, inner, norm, norm4_pow4
from rotogp.gp import (
    GpProblem,
    GpSolverOptions,
    NormalizationError,
    chemical_potential,
    gp_energy,
    gp_gradient,
    gp_minimize,
    gp_residual,
    harmonic_problem,
)

GAUSS4 = (2.0 * np.pi) ** -1.5  # int of the normalized 3D Gaussian to the 4th power


def test_gaussian_energy_noninteracting():
    p = harmonic_problem(dim=3, n=32, length=14.0)
    phi = gaussian_field(p.grid)
    assert gp_energy(p, phi) == pytest.approx(3.0, abs=1e-9)


def test_gaussian_energy_interacting():
    # E = 3 + 4 pi a (2 pi)^{-3/2} at a = 1 for the oscillator Gaussian
    p = harmonic_problem(dim=3, n=32, length=14.0, a=1.0)
    phi = gaussian_field(p.grid)
    assert gp_energy(p, phi) == pytest.approx(3.0 + 4.0 * np.pi * GAUSS4, abs=1e-9)


def test_gaussian_energy_rotating_real_field():
    # real field: cross term vanishes, E = 3 + <|A|^2> = 3 + (1/4)|Om|^2 <x^2+y^2>
    p = harmonic_problem(dim=3, n=32, length=14.0, omega=0.5)
    phi = gaussian_field(p.grid)
    assert gp_energy(p, phi) == pytest.approx(3.0625, abs=1e-9)


def test_gradient_matches_energy_fd():
    # directional finite difference of the *unconstrained* quadratic+quartic
    # functional against <eta, grad> at a non-stationary point
    rng = np.random.default_rng(3)
    p = harmonic_problem(dim=3, n=16, length=12.0, omega=0.3, a=0.7)
    base = gaussian_field(p.grid)
    phi = ComplexField(
        p.grid, base.values * (1.0 + 0.1 * rng.standard_normal(p.grid.shape))
    ).normalized()
    eta = ComplexField(
        p.grid,
        base.values
        * (rng.standard_normal(p.grid.shape) + 1j * rng.standard_normal(p.grid.shape)),
    )

    def raw_energy(v):
        f = ComplexField(p.grid, v)
        from rotogp.fields import apply_gauge_kinetic

        w = p.grid.spacing**3
        kin = inner(f, apply_gauge_kinetic(f, p.gauge)).real
        pot = w * float(np.sum(p.potential * np.abs(v) ** 2))
        return kin + pot + 4.0 * np.pi * p.a * norm4_pow4(f)

    eps = 1e-4
    fd = (raw_energy(phi.values + eps * eta.values)
          - raw_energy(phi.values - eps * eta.values)) / (2 * eps)
    pairing = 2.0 * inner(gp_gradient(p, phi), eta).real
    assert fd == pytest.approx(pairing, rel=1e-5)


def test_mu_identity_at_any_point():
    # mu = <phi, grad phi> by construction; at the Gaussian this equals
    # E + 4 pi a ||phi||_4^4 analytically
    p = harmonic_problem(dim=3, n=32, length=14.0, a=1.0)
    phi = gaussian_field(p.grid)
    mu = chemical_potential(p, phi)
    e = gp_energy(p, phi)
    assert mu == pytest.approx(e + 4.0 * np.pi * norm4_pow4(phi), abs=1e-10)


def test_unnormalized_rejected():
    p = harmonic_problem(dim=2, n=16, length=12.0)
    phi = ComplexField(p.grid, 2.0 * gaussian_field(p.grid).values)
    with pytest.raises(NormalizationError):
        gp_energy(p, phi)


def test_minimize_oscillator_3d():
    p = harmonic_problem(dim=3, n=32, length=14.0)
    st = gp_minimize(p)
    assert st.converged
    assert st.energy == pytest.approx(3.0, abs=1e-5)
    assert st.boundary_ok


def test_minimize_oscillator_2d():
    p = harmonic_problem(dim=2, n=64, length=14.0)
    st = gp_minimize(p)
    assert st.converged
    assert st.energy == pytest.approx(2.0, abs=1e-5)


def test_minimize_interacting_residual_and_mu():
    p = harmonic_problem(dim=3, n=32, length=16.0, a=1.0)
    st = gp_minimize(p)
    assert st.converged and st.residual <= 1e-7
    mu2, res = gp_residual(p, st.phi)
    assert mu2 == pytest.approx(st.mu)
    # mu = E + 4 pi a ||phi||_4^4 at a stationary point
    assert abs(st.mu - st.energy - 4.0 * np.pi * norm4_pow4(st.phi)) <= 1e-8 * abs(st.mu)
    # interaction raises the energy above the linear ground state
    assert st.energy > 3.0


def test_minimize_energy_never_increases_with_restarts():
    p = harmonic_problem(dim=2, n=32, length=12.0, a=0.5)
    st = gp_minimize(p, opts=GpSolverOptions(restarts=3, seed=1))
    assert st.converged
    assert st.energy <= min(st.restart_energies) + 1e-12


def test_negative_inputs_rejected():
    g = Grid(2, 16, 10.0)
    with pytest.raises(ValueError):
        GpProblem(g, -g.radius_sq(), 0.0, 1.0)
    with pytest.raises(ValueError):
        GpProblem(g, g.radius_sq(), 0.0, -1.0)

"""Smoke tests for the python extension module."""

import math

import pytest

mopt = pytest.importorskip("mopt")


def test_kernel_surface():
    g = mopt.KernelSpec(mopt.KernelFamily.Gaussian)
    assert mopt.hamiltonian(g, 1.0) == pytest.approx(math.exp(0.5) - 1.0, abs=1e-12)
    h1, h2 = mopt.hamiltonian_derivs(g, 0.0)
    assert h1 == 0.0
    assert h2 == pytest.approx(1.0, abs=1e-12)
    L, Lp, Lpp = mopt.lagrangian(mopt.KernelSpec(mopt.KernelFamily.Diffusion), 0.4)
    assert (L, Lp, Lpp) == pytest.approx((0.08, 0.4, 1.0), abs=1e-12)
    with pytest.raises(RuntimeError):
        mopt.hamiltonian(mopt.KernelSpec(mopt.KernelFamily.Exponential), 1.5)


def test_selection_surface():
    b = mopt.SelectionSpec(mopt.SelectionFamily.Bounded, m_inf=1.0)
    assert mopt.max_gradient(b) == pytest.approx(math.exp(-0.5), abs=1e-12)
    zs = mopt.gradient_inverse_convex(b, 0.3)
    zu = mopt.gradient_inverse_concave(b, 0.3)
    assert zs < 1.0 < zu
    m, m1, m2, m3 = mopt.m_derivs(mopt.SelectionSpec(mopt.SelectionFamily.Quadratic), 1.0)
    assert (m, m1, m2, m3) == pytest.approx((0.5, 1.0, 1.0, 0.0))


def test_scaling_and_asymptotics():
    p = mopt.ModelParams(beta=1.0, mu0=0.0, alpha=1.0, sigma=0.1, c=0.05)
    sp = mopt.to_scaled(p, mopt.ReproductionMode.Asexual)
    assert sp.eps == pytest.approx(0.1)
    assert sp.c == pytest.approx(0.5)

    sel = mopt.SelectionSpec(mopt.SelectionFamily.Quadratic)
    pred = mopt.infinitesimal_correction(sel, 0.1, 0.3)
    assert pred.lambda_() == pytest.approx(0.9482, abs=1e-12)
    assert pred.zstar() == pytest.approx(-0.306, abs=1e-12)
    assert pred.var() == pytest.approx(0.01 / 1.02, abs=1e-12)

    cs = mopt.critical_speeds(
        mopt.ReproductionMode.Infinitesimal,
        mopt.KernelSpec(mopt.KernelFamily.Gaussian),
        mopt.SelectionSpec(mopt.SelectionFamily.Bounded, m_inf=1.0),
        mopt.ModelParams(beta=1.0, mu0=0.0, alpha=1.0, sigma=0.1, c=0.0),
    )
    assert cs.c_tip == pytest.approx(0.01 * math.exp(-0.5), abs=1e-9)


def test_small_equilibrium_solve():
    rep, z, f = mopt.solve_equilibrium(
        mopt.ReproductionMode.Asexual,
        mopt.KernelSpec(mopt.KernelFamily.Diffusion),
        mopt.SelectionSpec(mopt.SelectionFamily.Quadratic),
        eps=0.1,
        c=0.0,
        z_lo=-1.6,
        z_hi=1.6,
        dz=0.02,
        init_mean=0.1,
        init_var=0.1,
        stop_tol=1e-8,
    )
    assert rep.converged
    assert abs(rep.zstar) <= 0.02
    assert rep.var == pytest.approx(0.1, rel=0.05)
    assert len(z) == len(f)
    assert min(f) >= 0.0


def test_presets_listed():
    names = mopt.preset_names()
    assert "kernel-sweep-asexual" in names
    assert any(n.startswith("tipping") for n in names)

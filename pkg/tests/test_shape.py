import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matherlab.measure import PlaneDisk
from matherlab.phase import (TORUS, HamiltonianSystem, annulus_system,
                             channel_system)
from matherlab.integrate import integrate
from matherlab.measure import occupation_measure
from matherlab.shape import (FluxConstraintError, FourierPotential, GammaTerm,
                             IncomparableUnitsError, PeriodGroupInput,
                             circle_isotopy, circle_flux_pairing,
                             concatenate_isotopies, constant_isotopy,
                             gamma_generator, graph_isotopy,
                             kappa_circle_estimate, kappa_graph_estimate,
                             lagrange_flux, parse_gamma_term,
                             pb_plus_estimate, shape_witness_circle)
from matherlab.scenarios import RadialAnnulusRegion

TWO_PI = 2.0 * math.pi


def quadratic_kinetic_system():
    """H(theta, I) = |I|^2 / 2 on T*T^2."""

    def value(z):
        return 0.5 * (z[..., 2] ** 2 + z[..., 3] ** 2)

    def grad(z):
        g = np.zeros_like(z)
        g[..., 2:] = z[..., 2:]
        return g

    return HamiltonianSystem("kinetic", TORUS, 2, value, grad)


# ---------------------------------------------------------------------------
# flux
# ---------------------------------------------------------------------------

def test_circle_shrink_flux_matches_area_difference():
    val = lagrange_flux(circle_isotopy(4.0, 2.0))[0]
    assert val == pytest.approx(12.0 * math.pi, abs=1e-6)
    assert circle_flux_pairing(4.0, 2.0) == pytest.approx(12.0 * math.pi)


def test_constant_isotopy_has_zero_flux():
    iso = constant_isotopy(circle_isotopy(4.0, 2.0))
    assert abs(lagrange_flux(iso)[0]) < 1e-9


def test_graph_isotopy_flux_is_the_class():
    c = [0.5, -0.25]
    vals = lagrange_flux(graph_isotopy(c))
    assert np.allclose(vals, c, atol=1e-9)
    pot = FourierPotential(2, 1)
    pot.coeffs[:] = 0.2
    vals = lagrange_flux(graph_isotopy(c, potential=pot))
    assert np.allclose(vals, c, atol=1e-8)


def test_flux_additive_under_concatenation():
    a = circle_isotopy(4.0, 3.0)
    b = circle_isotopy(3.0, 2.0)
    both = concatenate_isotopies(a, b)
    total = lagrange_flux(both, nt=16)[0]
    parts = lagrange_flux(a)[0] + lagrange_flux(b)[0]
    assert total == pytest.approx(parts, abs=2e-6)


def test_embedding_injectivity_check():
    assert circle_isotopy(4.0, 2.0).embedding_injective()
    assert graph_isotopy([0.3, 0.1]).embedding_injective()


# ---------------------------------------------------------------------------
# gamma arithmetic
# ---------------------------------------------------------------------------

def test_gamma_headline_values():
    assert str(gamma_generator(PeriodGroupInput(["9pi"]))) == "9pi"
    assert str(gamma_generator(PeriodGroupInput(["16pi"]))) == "16pi"
    assert str(gamma_generator(PeriodGroupInput(["4pi", "6pi"]))) == "2pi"


def test_gamma_trivial_and_dense_cases():
    assert gamma_generator(PeriodGroupInput([])).numeric() == math.inf
    assert gamma_generator(PeriodGroupInput(["0pi"])).numeric() == math.inf
    dense = gamma_generator(PeriodGroupInput(["2pi", "2sqrt2pi"]))
    assert dense.numeric() == 0.0


def test_gamma_mixed_units_rejected():
    with pytest.raises(IncomparableUnitsError):
        gamma_generator(PeriodGroupInput(["2pi", "3"]))


def test_gamma_term_parsing():
    t = parse_gamma_term("3/2pi")
    assert t.coeff == Fraction(3, 2) and t.unit == "pi"
    assert parse_gamma_term("2sqrt2pi").factor == "sqrt2"
    assert parse_gamma_term(4).unit == "1"
    with pytest.raises(ValueError):
        parse_gamma_term(2.5)


@given(st.integers(1, 60), st.integers(1, 60), st.integers(1, 20),
       st.lists(st.tuples(st.integers(-8, 8), st.integers(-8, 8)),
                min_size=1, max_size=4))
@settings(max_examples=100, deadline=None)
def test_gamma_lattice_shift_property(num, den, mult, pairs):
    # base gamma_0 = (num/den) pi; generators gamma_0 * m_i shifted by
    # c = gamma_0 * z against integer pairings k_i stay in gamma_0 * Z,
    # so the shifted generator is a positive multiple of gamma_0 (or the
    # subgroup is trivial and gamma = inf)
    gamma0 = GammaTerm(Fraction(num, den), "1", "pi")
    z = mult
    shifted = [GammaTerm(gamma0.coeff * (m - z * k), "1", "pi")
               for m, k in pairs]
    res = gamma_generator(PeriodGroupInput(shifted))
    if res.kind == "infinite":
        assert all((m - z * k) == 0 for m, k in pairs)
    else:
        assert res.is_positive_multiple_of(gamma0)


# ---------------------------------------------------------------------------
# kappa estimates
# ---------------------------------------------------------------------------

def test_kappa_circle_annulus_value():
    est = kappa_circle_estimate(annulus_system(), 4.0, 12.0 * math.pi)
    assert est.side == "upper"
    assert est.bound == pytest.approx(0.0, abs=1e-9)
    assert est.witness["r_end"] == pytest.approx(2.0, abs=1e-12)


def test_kappa_circle_infeasible_flux():
    with pytest.raises(FluxConstraintError):
        kappa_circle_estimate(annulus_system(), 2.0, 30.0 * math.pi)


def test_kappa_graph_integrable_flat_graph_optimal():
    sys_ = quadratic_kinetic_system()
    c = [0.8, -0.4]
    est = kappa_graph_estimate(sys_, c, order=1, budget=120, seed=0, grid=24)
    assert est.bound == pytest.approx(0.5 * (0.8 ** 2 + 0.4 ** 2), abs=1e-4)
    assert np.max(np.abs(est.witness["coeffs"])) < 5e-2


def test_kappa_identity_bound_at_zero_class():
    # c = 0 with the zero potential in the family: bound <= max_L H
    sys_ = channel_system(0.05, 2.0)
    est = kappa_graph_estimate(sys_, [0.0, 0.0], order=0, seed=0, grid=16)
    grid = (np.arange(16) + 0.5) / 16
    th = np.stack(np.meshgrid(grid, grid, indexing="ij"), axis=-1)
    z = np.concatenate([th.reshape(-1, 2), np.zeros((256, 2))], axis=1)
    assert est.bound <= float(np.max(sys_.value(z))) + 1e-12


def test_kappa_monotone_in_family_order():
    def value(z):
        p = z[..., 2:]
        return (0.5 * np.sum(p * p, axis=-1)
                + 0.3 * np.sin(TWO_PI * z[..., 0]))

    def grad(z):
        g = np.zeros_like(z)
        g[..., 0] = 0.3 * TWO_PI * np.cos(TWO_PI * z[..., 0])
        g[..., 2:] = z[..., 2:]
        return g

    sys_ = HamiltonianSystem("tilted", TORUS, 2, value, grad)
    bounds, prev = [], None
    for m in (0, 1, 2):
        prev = kappa_graph_estimate(sys_, [0.5, 0.0], order=m, budget=100,
                                    seed=0, grid=16, warm_start=prev)
        bounds.append(prev.bound)
    assert bounds[1] <= bounds[0] + 1e-9
    assert bounds[2] <= bounds[1] + 1e-9


# ---------------------------------------------------------------------------
# shape witnesses
# ---------------------------------------------------------------------------

SIGMA = RadialAnnulusRegion(math.sqrt(0.5), 2.0 + math.sqrt(1.5))


def test_shape_witness_annulus_shrink():
    wit = shape_witness_circle(SIGMA, 4.0, 0.0, 12.0 * math.pi)
    assert wit is not None
    assert wit.params["r_end"] == pytest.approx(2.0, abs=1e-12)
    assert wit.margin > 0.5
    assert np.allclose(wit.flux_pairing, [12.0 * math.pi], atol=1e-6)


def test_shape_witness_constant_isotopy_case():
    # c = -a|_L makes the identity a witness whenever L sits in the region
    region = PlaneDisk(5.0)
    wit = shape_witness_circle(region, 4.0, -7.0, 7.0)
    assert wit is not None
    assert wit.params["r_end"] == pytest.approx(4.0, abs=1e-12)


def test_shape_witness_absent_for_empty_region():
    assert shape_witness_circle(PlaneDisk(0.05), 4.0, 0.0,
                                12.0 * math.pi) is None


# ---------------------------------------------------------------------------
# pb+ estimates
# ---------------------------------------------------------------------------

def test_pb_plus_zero_class_zero_bound():
    sys_ = quadratic_kinetic_system()
    rng = np.random.default_rng(1)
    X = np.concatenate([rng.random((200, 2)),
                        np.tile([0.3, 0.7], (200, 1))], axis=1)
    b = pb_plus_estimate(sys_, X, [0.0, 0.0], fourier_order=1, seed=2)
    assert abs(b.value) <= 1e-9
    assert b.side == "upper"


def test_pb_plus_integrable_torus_value():
    sys_ = quadratic_kinetic_system()
    rng = np.random.default_rng(3)
    X = np.concatenate([rng.random((400, 2)),
                        np.tile([0.3, 0.7], (400, 1))], axis=1)
    b = pb_plus_estimate(sys_, X, [1.0, 0.0], fourier_order=2, seed=4)
    assert b.value == pytest.approx(0.3, abs=5e-2)


def test_pb_plus_channel_segment_mean_momentum():
    # the segment must close one full theta2-loop: then the periodic
    # reparametrizing potential u with 1 + du/dtheta2 = C / I1(theta2)
    # exists and the minimax equalizes at C = the time-mean of I1
    sys_ = channel_system(0.05, 2.0)
    traj = integrate(sys_, [0.0, 0.3, 0.5, 0.0], 20.0, 1e-3, record_every=10)
    start = int(np.searchsorted(traj.times, 4.0))
    wrap = traj.unwrapped[:, 1]
    end = int(np.searchsorted(wrap[start] - wrap, 1.0))
    mu = occupation_measure(traj, (traj.times[start], traj.times[end]))
    target = mu.average(lambda z: z[:, 2])
    prev = None
    for order in (0, 1, 2, 4):
        b = pb_plus_estimate(sys_, mu.points, [0.0, 1.0],
                             fourier_order=order, seed=6, warm_start=prev)
        if prev is not None:
            assert b.value <= prev.value + 1e-12
        prev = b
    assert prev.value == pytest.approx(target, abs=5e-2)


def test_shape_witness_serialization(tmp_path):
    wit = shape_witness_circle(SIGMA, 4.0, 0.0, 12.0 * math.pi)
    jpath, cpath = wit.write(str(tmp_path / "witness"))
    import json
    payload = json.loads(open(jpath).read())
    assert payload["params"]["r_end"] == pytest.approx(2.0)
    assert payload["family"]["family"] == "circle"
    lines = open(cpath).read().splitlines()
    assert lines[0] == "z1,z2" and len(lines) > 10

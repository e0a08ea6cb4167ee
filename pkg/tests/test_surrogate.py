import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stepalloc import model, surrogate
from stepalloc.errors import ConfigError
from stepalloc.model import Allocation, params
from stepalloc.surrogate import (
    AuxiliaryState,
    penalized_surrogate,
    penalty_linearized,
    surrogate_edge_constraint,
    surrogate_objective,
    update_auxiliaries,
)

from helpers import config, profile, time_only_config

EPS_AUX = 1e-9


def test_update_auxiliaries_hand_values():
    # costs tuned to R0(100)=2, R1(100)=4
    cfg = time_only_config()
    p = params(cfg)
    aux = update_auxiliaries(p, Allocation(np.array([0.5]), np.array([100.0])))
    assert aux.u[0] == pytest.approx(0.125, rel=1e-12)
    assert aux.v[0] == pytest.approx(0.0625, rel=1e-12)
    assert aux.z[0] == pytest.approx(0.0025, rel=1e-12)


def test_update_auxiliaries_floors_zero_numerators():
    cfg = time_only_config()
    p = params(cfg)
    aux0 = update_auxiliaries(p, Allocation(np.array([0.0]), np.array([100.0])))
    assert aux0.v[0] == EPS_AUX       # a = 0 kills the edge weight
    assert aux0.z[0] == EPS_AUX
    aux1 = update_auxiliaries(p, Allocation(np.array([1.0]), np.array([100.0])))
    assert aux1.u[0] == EPS_AUX       # a = 1 kills the local weight


def test_update_auxiliaries_rejects_nonpositive_cost_without_floor():
    strong = profile(c2_utility=0.05)
    cfg = config(1, strong, cost_weights=(0.001, 0.0, 0.0), blend=(1.0, 1.0),
                 allow_cost_floor=True)
    p = params(cfg)
    p_no_floor = model.Params(**{**p.__dict__, "allow_floor": False})
    with pytest.raises(ConfigError, match="non-positive"):
        update_auxiliaries(p_no_floor, Allocation(np.array([0.5]), np.array([150.0])))


def test_surrogate_matches_blend_at_refresh_point():
    cfg = time_only_config()
    p = params(cfg)
    alloc = Allocation(np.array([0.5]), np.array([100.0]))
    aux = update_auxiliaries(p, alloc)
    g = surrogate_objective(p, alloc, aux)
    assert g == pytest.approx(3.0, rel=1e-12)             # 0.5+0.5+1+1
    assert g == pytest.approx(model.objective_value(p, alloc.a, alloc.s), rel=1e-12)


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_surrogate_tight_at_interior_points(seed):
    cfg = config(4)
    p = params(cfg)
    rng = np.random.default_rng(seed)
    alloc = Allocation(rng.uniform(0.05, 0.95, 4), rng.uniform(1.0, 200.0, 4))
    aux = update_auxiliaries(p, alloc)
    g = surrogate_objective(p, alloc, aux)
    obj = model.objective_value(p, alloc.a, alloc.s)
    assert abs(g - obj) <= 1e-9 * (1 + abs(obj))


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_surrogate_majorizes_for_any_positive_weights(seed):
    cfg = config(4)
    p = params(cfg)
    rng = np.random.default_rng(seed)
    anchor_alloc = Allocation(rng.uniform(0.05, 0.95, 4), rng.uniform(1.0, 200.0, 4))
    aux = update_auxiliaries(p, anchor_alloc)
    probe = Allocation(rng.uniform(0.0, 1.0, 4), rng.uniform(0.0, 200.0, 4))
    g = surrogate_objective(p, probe, aux)
    assert g >= model.objective_value(p, probe.a, probe.s) - 1e-12


def test_surrogate_boundary_gap_bounded_by_floor():
    cfg = config(1)
    p = params(cfg)
    alloc = Allocation(np.array([0.0]), np.array([120.0]))
    aux = update_auxiliaries(p, alloc)
    g = surrogate_objective(p, alloc, aux)
    obj = model.objective_value(p, alloc.a, alloc.s)
    r1 = float(model.branch_cost(p, alloc.s, 1)[0])
    assert 0 <= g - obj <= EPS_AUX * r1**2 + 1e-12


def test_edge_constraint_hand_value():
    cfg = config(1, budget=50.0)
    p = params(cfg)
    aux = AuxiliaryState(np.array([1.0]), np.array([1.0]), np.array([0.01]))
    slack = surrogate_edge_constraint(p, Allocation(np.array([1.0]), np.array([50.0])), aux)
    assert slack == pytest.approx(0.0, abs=1e-12)          # 25 + 25 - 50


def test_edge_constraint_zero_allocation():
    cfg = config(3, budget=777.0)
    p = params(cfg)
    aux = AuxiliaryState(np.ones(3), np.ones(3), np.ones(3))
    slack = surrogate_edge_constraint(p, Allocation(np.zeros(3), np.zeros(3)), aux)
    assert slack == pytest.approx(-777.0)


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_edge_mass_upper_bounds_true_usage(seed):
    cfg = config(5, budget=0.0)
    p = params(cfg)
    rng = np.random.default_rng(seed)
    a = rng.uniform(0, 1, 5)
    s = rng.uniform(0, 300, 5)
    z = rng.uniform(1e-4, 10, 5)
    aux = AuxiliaryState(np.ones(5), np.ones(5), z)
    mass = surrogate_edge_constraint(p, Allocation(a, s), aux)  # budget = 0
    assert mass >= float(np.sum(a * s)) - 1e-12


def test_edge_constraint_tight_with_refreshed_weights():
    cfg = config(4, budget=300.0)
    p = params(cfg)
    rng = np.random.default_rng(0)
    alloc = Allocation(rng.uniform(0.1, 0.9, 4), rng.uniform(10.0, 200.0, 4))
    aux = update_auxiliaries(p, alloc)
    mass = surrogate_edge_constraint(p, alloc, aux)
    assert mass == pytest.approx(float(np.sum(alloc.a * alloc.s)) - 300.0, abs=1e-9)


def test_penalty_anchor_half_is_constant():
    anchor = np.full(6, 0.5)
    for a in (np.zeros(6), np.ones(6), np.linspace(0, 1, 6)):
        assert penalty_linearized(a, anchor) == pytest.approx(-0.25 * 6, rel=1e-12)


def test_penalty_binary_anchors():
    a = np.array([0.3, 0.9])
    assert penalty_linearized(a, np.zeros(2)) == pytest.approx(-a.sum(), rel=1e-12)
    assert penalty_linearized(a, np.ones(2)) == pytest.approx((a - 1).sum(), rel=1e-12)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=8))
def test_penalty_exact_at_anchor(vals):
    a = np.array(vals)
    assert penalty_linearized(a, a) == pytest.approx(float(np.sum(a * (a - 1))), abs=1e-12)


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_penalty_second_order_gap(seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-0.5, 1.5, 7)
    anchor = rng.uniform(0, 1, 7)
    truth = float(np.sum(a * (a - 1)))
    gap = truth - penalty_linearized(a, anchor)
    assert gap == pytest.approx(float(np.sum((a - anchor) ** 2)), abs=1e-9)
    assert gap >= -1e-12


def test_penalized_surrogate_composition():
    cfg = config(3, tau=123.0)
    p = params(cfg)
    rng = np.random.default_rng(1)
    alloc = Allocation(rng.uniform(0.2, 0.8, 3), rng.uniform(10, 150, 3))
    aux = update_auxiliaries(p, alloc)
    g = surrogate_objective(p, alloc, aux)
    anchor = np.full(3, 0.5)
    assert penalized_surrogate(p, alloc, aux, anchor) == pytest.approx(
        g + 0.25 * 123.0 * 3, rel=1e-12)
    binary = Allocation(np.array([0.0, 1.0, 1.0]), alloc.s)
    aux_b = update_auxiliaries(p, binary)
    assert penalized_surrogate(p, binary, aux_b, binary.a) == pytest.approx(
        surrogate_objective(p, binary, aux_b), rel=1e-12)


def test_auxiliary_state_rejects_nonpositive():
    with pytest.raises(ConfigError):
        AuxiliaryState(np.array([0.0]), np.array([1.0]), np.array([1.0]))
    with pytest.raises(ConfigError):
        AuxiliaryState(np.array([1.0]), np.array([np.inf]), np.array([1.0]))

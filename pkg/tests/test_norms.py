import math

import numpy as np
import pytest

from latkam.errors import ParameterError
from latkam.norms import (
    ActionVector,
    LatticeMatrix,
    WeightProfile,
    action_norm,
    induced_operator_norm,
    sup_matrix_norm,
    sup_norm,
)

W1 = WeightProfile(alpha=1.0, radius=8)


def random_vector(rng, radius=3, density=0.7):
    entries = {}
    for j in range(-radius, radius + 1):
        if rng.random() < density:
            entries[j] = rng.normal() + 1j * rng.normal()
    return ActionVector(entries)


def test_weight_profile_basics():
    assert W1.weight(0) == 1.0
    assert W1.weight(1) == pytest.approx(math.e)
    assert W1.weight(-2) == pytest.approx(math.exp(4.0))
    with pytest.raises(ParameterError):
        WeightProfile(alpha=0.0, radius=4)


def test_weight_monotone_in_site():
    w = WeightProfile(alpha=0.7, radius=8)
    vals = [w.weight(j) for j in range(9)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert w.weight(-5) == w.weight(5)


def test_action_norm_trivial_cases():
    assert action_norm(ActionVector({}), W1) == 0.0
    assert action_norm(ActionVector({0: 1.0}), W1) == pytest.approx(1.0)


def test_action_norm_frozen_value():
    # direct summation of the definition: 0.5 + 0.1 * e
    v = ActionVector({0: 0.5, 1: 0.1})
    assert action_norm(v, W1) == pytest.approx(0.5 + 0.1 * math.e, rel=1e-12)
    assert action_norm(v, W1) == pytest.approx(0.7718281828459045, rel=1e-9)


def test_action_norm_axioms():
    rng = np.random.default_rng(101)
    for _ in range(200):
        a = random_vector(rng)
        b = random_vector(rng)
        lam = rng.normal()
        na, nb = action_norm(a, W1), action_norm(b, W1)
        assert action_norm(a + b, W1) <= na + nb + 1e-9 * (na + nb)
        assert action_norm(lam * a, W1) == pytest.approx(abs(lam) * na, rel=1e-12, abs=1e-300)


def test_sup_norm():
    assert sup_norm(ActionVector({})) == 0.0
    assert sup_norm(ActionVector({0: 0.5, 1: -0.7})) == pytest.approx(0.7)
    assert sup_norm(ActionVector({5: 1.0})) == 1.0


def test_induced_norm_identity_and_diagonal():
    ident = LatticeMatrix({(j, j): 1.0 for j in range(-3, 4)}, symmetric=True)
    assert induced_operator_norm(ident, W1) == pytest.approx(1.0)
    diag = LatticeMatrix({(j, j): float(j) for j in range(-3, 4)})
    assert induced_operator_norm(diag, W1) == pytest.approx(3.0)


def test_induced_norm_single_offdiagonal_entry():
    # column-sum closed form: weight(0)/weight(1) = exp(-1)
    b = LatticeMatrix({(0, 1): 1.0})
    assert induced_operator_norm(b, W1) == pytest.approx(math.exp(-1.0), rel=1e-12)


def test_induced_norm_matches_empirical_sup():
    # the closed form must equal the empirical sup of ||BI||/||I||; the sup
    # is attained at a basis vector, so include those alongside random trials
    rng = np.random.default_rng(202)
    for _ in range(20):
        entries = {}
        for _ in range(10):
            i = int(rng.integers(-3, 4))
            j = int(rng.integers(-3, 4))
            entries[(i, j)] = rng.normal()
        b = LatticeMatrix(entries)
        closed = induced_operator_norm(b, W1)
        best = 0.0
        trials = [random_vector(rng) for _ in range(500)]
        trials += [ActionVector({j: 1.0}) for j in range(-3, 4)]
        for v in trials:
            nv = action_norm(v, W1)
            if nv == 0.0:
                continue
            bv = {}
            for (i, j), val in b.entries.items():
                bv[i] = bv.get(i, 0.0) + val * v[j]
            best = max(best, action_norm(ActionVector(bv), W1) / nv)
        assert best <= closed * (1 + 1e-12)
        assert best == pytest.approx(closed, rel=1e-12)


def test_sup_matrix_norm_cases():
    assert sup_matrix_norm(LatticeMatrix({})) == 0.0
    ident = LatticeMatrix({(j, j): 1.0 for j in range(-2, 3)})
    assert sup_matrix_norm(ident) == 1.0
    tri = {}
    for j in range(-3, 4):
        tri[(j, j)] = 0.5
        if j < 3:
            tri[(j, j + 1)] = 0.5
            tri[(j + 1, j)] = 0.5
    assert sup_matrix_norm(LatticeMatrix(tri, symmetric=True)) == pytest.approx(1.5)


def random_symmetric_tridiagonal(rng, radius):
    entries = {}
    for j in range(-radius, radius + 1):
        entries[(j, j)] = rng.normal()
        if j < radius:
            c = rng.normal()
            entries[(j, j + 1)] = c
            entries[(j + 1, j)] = c
    return LatticeMatrix(entries, symmetric=True)


def test_sup_norm_vs_operator_norm_bound():
    # sup-norm of a symmetric tridiagonal matrix is at most twice its
    # induced operator norm, reproduced on 1000 random draws
    rng = np.random.default_rng(303)
    kappa1 = 1.0
    for _ in range(1000):
        radius = int(rng.integers(1, 9))
        b = random_symmetric_tridiagonal(rng, radius)
        op = induced_operator_norm(b, W1)
        if op == 0.0:
            continue
        scale = kappa1 * rng.random() / op
        scaled = LatticeMatrix(
            {k: scale * v for k, v in b.entries.items()}, symmetric=True
        )
        assert induced_operator_norm(scaled, W1) <= kappa1 * (1 + 1e-12)
        assert sup_matrix_norm(scaled) <= 2 * kappa1 * (1 + 1e-12)


def test_lattice_matrix_symmetric_validation():
    with pytest.raises(ParameterError):
        LatticeMatrix({(0, 1): 1.0, (1, 0): 2.0}, symmetric=True)
    m = LatticeMatrix({(0, 1): 1.0}, symmetric=True)
    assert m.get(1, 0) == 1.0


def test_restrict_and_dense():
    m = LatticeMatrix({(0, 0): 1.0, (3, 3): 2.0, (0, 3): 5.0})
    inner = m.restrict(1)
    assert inner.get(0, 0) == 1.0
    assert inner.get(3, 3) == 0.0
    dense = m.to_dense([0, 3])
    assert dense[0, 1] == 5.0

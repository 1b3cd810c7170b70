import numpy as np
import pytest

from conftest import random_facet_state
from relmagic.bloch import density_from_bloch, facet_hyperplane
from relmagic.family import FACET_CENTROID, T_DIRECTION, magic_bloch, rel_entropy_closed_form, t_max
from relmagic.optim import closest_stabilizer_1q, relative_entropy_of_magic
from relmagic.stab import enumerate_pure_stabilizers

T_VALUE = -np.log2((1 + 1 / np.sqrt(3)) / 2)
H_VALUE = -np.log2((1 + 1 / np.sqrt(2)) / 2)


def test_free_states_have_zero_measure():
    for s in enumerate_pure_stabilizers(2)[::7]:
        assert relative_entropy_of_magic(s.projector, tol=1e-6).value <= 1e-6
    mixed = np.mean([s.projector for s in enumerate_pure_stabilizers(1)[:3]], axis=0)
    assert relative_entropy_of_magic(mixed, tol=1e-6).value <= 1e-6


def test_single_qubit_t_state():
    res = relative_entropy_of_magic(density_from_bloch(T_DIRECTION), tol=1e-8)
    assert res.value == pytest.approx(T_VALUE, abs=1e-7)
    assert res.gap <= 1e-8
    assert np.all(res.weights >= 0) and res.weights.sum() == pytest.approx(1.0)
    assert np.allclose(res.sigma_star, density_from_bloch(FACET_CENTROID), atol=1e-4)
    assert np.all(np.diff(res.history) <= 1e-12)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        relative_entropy_of_magic(np.diag([1.0, 1.0]))
    with pytest.raises(ValueError):
        relative_entropy_of_magic(np.diag([0.5, 0.5]), tol=1.0)


def test_fast_path_examples():
    val, s = closest_stabilizer_1q(T_DIRECTION)
    assert val == pytest.approx(T_VALUE, abs=1e-10)
    assert np.allclose(s, FACET_CENTROID, atol=1e-6)
    val, s = closest_stabilizer_1q(np.array([1, 1, 0]) / np.sqrt(2))
    assert val == pytest.approx(H_VALUE, abs=1e-10)
    assert np.allclose(s, [0.5, 0.5, 0], atol=1e-6)
    inside = np.array([0.2, -0.1, 0.3])
    val, s = closest_stabilizer_1q(inside)
    assert val == 0.0 and np.array_equal(s, inside)


def test_fast_path_matches_optimizer_and_closed_form(rng):
    for _ in range(5):
        x, facet = random_facet_state(rng, min_coord=0.05)
        hp = facet_hyperplane(facet)
        t = rng.uniform(0.3, 1) * t_max(x, hp)
        y = magic_bloch(x, hp, t)
        exact = rel_entropy_closed_form(x, hp, t)
        val, s = closest_stabilizer_1q(y)
        assert val == pytest.approx(exact, abs=1e-9)
        assert np.linalg.norm(s - x) <= 1e-4
        fw = relative_entropy_of_magic(density_from_bloch(y), tol=1e-8)
        assert fw.value == pytest.approx(exact, abs=1e-7)

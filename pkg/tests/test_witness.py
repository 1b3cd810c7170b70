import numpy as np
import pytest

from conftest import random_facet_state
from relmagic.bloch import VERTICES, density_from_bloch, edge_hyperplane, edge_point, facet_hyperplane
from relmagic.family import FACET_CENTROID, T_DIRECTION, t_max
from relmagic.qmat import tensor
from relmagic.witness import (
    RayComponent,
    chi_trace,
    chi_trace_direct,
    classify_commuting,
    delta_from_pattern,
    delta_pattern,
    edge_edge_search,
    find_violation,
    gamma_pm,
    gamma_pm_oracle,
    reconstruct_hyperplane,
    theorem_class,
    validate_hyperplane,
)

MID = np.array([0.5, 0.0, 0.5])


def t_ray():
    return RayComponent.from_ray(FACET_CENTROID)


def h_ray():
    return RayComponent.from_ray(MID)


def test_commutation_examples():
    assert classify_commuting(density_from_bloch(T_DIRECTION), density_from_bloch(FACET_CENTROID))
    assert not RayComponent.from_ray([0.5, 0.3, 0.2]).commuting
    assert h_ray().commuting


def test_gamma_examples():
    r = 1 / np.sqrt(3)
    gp, gm = gamma_pm(r, r)
    assert gm == pytest.approx(1.15315, abs=1e-5)
    assert gp == pytest.approx(0.87680, abs=1e-5)
    with pytest.raises(ValueError):
        gamma_pm(0.0, 0.5)
    with pytest.raises(ValueError):
        gamma_pm(0.5, 1.0)


def test_gamma_matches_oracle(rng):
    for _ in range(200):
        r1, r2 = rng.uniform(0.05, 0.95, size=2)
        assert np.allclose(gamma_pm(r1, r2), gamma_pm_oracle(r1, r2), atol=1e-10, rtol=0)
    assert np.allclose(gamma_pm(0.6, 0.6), gamma_pm_oracle(0.6, 0.6), atol=1e-10, rtol=0)


def test_delta_pattern_two_and_three_sites():
    comps = [RayComponent.from_ray(x, t_frac=0.5) for x in ([0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.4, 0.4, 0.2])]
    hp = reconstruct_hyperplane(comps[:2])
    d = hp.Delta
    nonzero = {(0, 3), (3, 0), (1, 2), (2, 1)}
    for i in range(4):
        for j in range(4):
            if (i, j) not in nonzero:
                assert d[i, j] == 0.0
    gp, gm = hp.gammas
    assert d[0, 3] == pytest.approx(1 - gp, abs=1e-12)
    assert d[1, 2] == pytest.approx(1 - gm, abs=1e-12)
    hp3 = reconstruct_hyperplane(comps)
    lams = [e.eigenvalues for e in hp3.site_eigs]
    assert np.max(np.abs(delta_from_pattern(delta_pattern(lams), 3) - hp3.Delta)) <= 1e-15


def test_split_consistency_and_closest_states(rng):
    comps = [RayComponent.from_ray(x, t_frac=0.7) for x in ([0.5, 0.3, 0.2], [0.2, 0.5, 0.3])]
    hp = reconstruct_hyperplane(comps)
    assert abs(chi_trace(hp, [c.sigma for c in comps])) <= 1e-15
    ptilde = hp.basis @ hp.PhiTilde @ hp.basis.conj().T
    for _ in range(50):
        xs = []
        for c in comps:
            w = rng.dirichlet([1, 1, 1])
            xs.append(w @ np.array([VERTICES[k] for k in c.phi.tangent_vertices()]))
        state = tensor(*[density_from_bloch(x) for x in xs])
        assert abs(np.trace(ptilde @ state)) <= 1e-10


def test_commuting_pair_chi_vanishes(rng):
    hp = reconstruct_hyperplane([t_ray(), t_ray()])
    verts = [VERTICES[k] for k in (1, 2, 3)]
    for _ in range(50):
        xs = [rng.dirichlet([1, 1, 1]) @ np.array(verts) for _ in range(2)]
        assert abs(chi_trace_direct(hp, xs)) <= 1e-10


def test_chi_trace_analytic_matches_matrix(rng):
    for n in (2, 3):
        for _ in range(20):
            comps = []
            for _ in range(n):
                x, _ = random_facet_state(rng, min_coord=0.05)
                comps.append(RayComponent.from_ray(x, t_frac=rng.uniform(0.1, 1)))
            hp = reconstruct_hyperplane(comps)
            xs = [v * rng.uniform(0, 1) / np.linalg.norm(v) for v in rng.normal(size=(n, 3))]
            assert abs(chi_trace(hp, xs) - chi_trace_direct(hp, xs)) <= 1e-9


def test_single_qubit_facet_hyperplane_valid():
    m, ok = validate_hyperplane(facet_hyperplane((1, 1, 1)).matrix, 1)
    assert ok and m == pytest.approx(0.0, abs=1e-15)


def test_theorem_example_violation():
    comps = [RayComponent.from_ray(x, t_frac=0.5) for x in ([0.5, 0.3, 0.2], [0.2, 0.5, 0.3])]
    assert theorem_class(comps)[0]
    report = find_violation(comps)
    assert report.verdict == "violation"
    assert report.trace_direct < -1e-9
    assert abs(report.trace_value - report.trace_direct) <= 1e-9
    assert report.min_vertex_trace < -1e-9
    # the constructed state is a product of octahedron points
    for y in report.violating_state:
        assert np.abs(y).sum() <= 1 + 1e-10
    # verdict is scale-free
    hp = reconstruct_hyperplane(comps)
    state = tensor(*[density_from_bloch(y) for y in report.violating_state])
    assert hp.trace(state) * 3.7 < 0


def test_negative_controls():
    for pair in ([t_ray(), t_ray()], [t_ray(), h_ray()]):
        report = find_violation(pair)
        assert report.verdict == "none-found"
        assert report.min_vertex_trace >= -1e-10


def test_t_pair_gap_small():
    report = find_violation([t_ray(), t_ray()], confirm=True)
    assert abs(report.optimizer_gap) <= 1e-4


def test_report_serialises():
    import json

    comps = [RayComponent.from_ray(x) for x in ([0.5, 0.3, 0.2], [0.2, 0.5, 0.3])]
    doc = find_violation(comps).as_dict()
    json.dumps(doc)
    assert doc["verdict"] == "violation"


def edge_ray(c):
    return RayComponent.from_ray(MID, edge_hyperplane((1, 3), c), t_frac=1.0)


def test_edge_search_rejects():
    with pytest.raises(ValueError):
        edge_edge_search(edge_ray(0.3), edge_ray(0.3), resolution=1)
    with pytest.raises(ValueError):
        edge_edge_search(edge_ray(0.0), edge_ray(0.3))
    with pytest.raises(ValueError):
        edge_edge_search(RayComponent.from_ray([0.5, 0.3, 0.2]), edge_ray(0.3))


def test_edge_search_small_grid():
    a = RayComponent.from_ray(edge_point((1, 3), 0.5), edge_hyperplane((1, 3), 0.3))
    b = RayComponent.from_ray(edge_point((2, 3), 0.5), edge_hyperplane((2, 3), -0.3))
    report = edge_edge_search(a, b, resolution=6)
    assert report.best_min_trace < 0
    assert report.supports_conjecture
    assert len(report.grid) > 0

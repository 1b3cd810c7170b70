import itertools

import numpy as np
import pytest

from relmagic.bloch import edge_hyperplane, edge_point, facet_hyperplane
from relmagic.family import t_max


def bloch_rotations():
    """The 24 signed permutation matrices with determinant +1."""
    out = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1, -1), repeat=3):
            m = np.zeros((3, 3))
            for i, (p, s) in enumerate(zip(perm, signs)):
                m[i, p] = s
            if np.linalg.det(m) > 0:
                out.append(m)
    return out


ROTATIONS = bloch_rotations()


def random_facet_state(rng, min_coord=0.02, octant=None):
    while True:
        a = rng.dirichlet([1.5, 1.5, 1.5])
        if a.min() >= min_coord:
            break
    signs = np.array(octant if octant is not None else rng.choice([1, -1], size=3), dtype=float)
    return signs * a, tuple(int(s) for s in signs)


def random_ray(rng, kind=None):
    """(x_sigma, hyperplane, t) on a random facet or edge; t in [0, t_max]."""
    kind = kind or rng.choice(["facet", "edge"])
    if kind == "facet":
        x, facet = random_facet_state(rng)
        hp = facet_hyperplane(facet)
    else:
        edge = (1, 3)
        x = edge_point(edge, rng.uniform(0.05, 0.95))
        hp = edge_hyperplane(edge, rng.uniform(-1, 1) / np.sqrt(2))
    return x, hp, rng.uniform(0, 1) * t_max(x, hp)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    """Print and remember one acceptance line."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

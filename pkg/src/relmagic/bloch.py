"""Bloch vectors, the stabilizer octahedron boundary and its supporting hyperplanes.

Vertex numbering follows s1..s6 = +x, +y, +z, -x, -y, -z. Facets are
labelled by their sign octant, e.g. ``(1, 1, 1)``; edges by the sorted pair of
vertex numbers, e.g. ``(1, 3)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .qmat import I2, PAULIS, is_hermitian
from .stab import BOUNDARY_TOL, octahedron_membership

VERTICES = {
    1: np.array([1.0, 0, 0]),
    2: np.array([0, 1.0, 0]),
    3: np.array([0, 0, 1.0]),
    4: np.array([-1.0, 0, 0]),
    5: np.array([0, -1.0, 0]),
    6: np.array([0, 0, -1.0]),
}
FACETS = tuple(product((1, -1), repeat=3))
EDGES = tuple(
    (i, j) for i in range(1, 7) for j in range(i + 1, 7) if (i - 1) % 3 != (j - 1) % 3
)
C_MAX = 1 / np.sqrt(2)


def vertex_id(axis: int, sign: float) -> int:
    return axis + 1 if sign > 0 else axis + 4


def _axis_sign(v: int) -> tuple[int, int]:
    return (v - 1) % 3, (1 if v <= 3 else -1)


def density_from_bloch(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise ValueError("Bloch vector must have 3 components")
    if np.linalg.norm(x) > 1 + 1e-12:
        raise ValueError(f"Bloch vector length {np.linalg.norm(x):.6g} exceeds 1")
    return (I2 + x[0] * PAULIS[0] + x[1] * PAULIS[1] + x[2] * PAULIS[2]) / 2


def bloch_from_density(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2) or not is_hermitian(rho):
        raise ValueError("expected a Hermitian 2x2 matrix")
    return np.array([np.trace(rho @ p).real for p in PAULIS])


def operator_from_bloch(a0: float, x) -> np.ndarray:
    """(a0 I + x . sigma) / 2."""
    x = np.asarray(x, dtype=float)
    return (a0 * I2 + x[0] * PAULIS[0] + x[1] * PAULIS[1] + x[2] * PAULIS[2]) / 2


@dataclass(frozen=True)
class SupportingHyperplane:
    """phi = (phi0 I + x_phi . sigma) / 2, normalised to Tr(phi^2) = 1."""

    phi0: float
    x_phi: np.ndarray

    @property
    def r_phi(self) -> float:
        return float(np.linalg.norm(self.x_phi))

    @property
    def matrix(self) -> np.ndarray:
        return operator_from_bloch(self.phi0, self.x_phi)

    def trace_with(self, x) -> float:
        """Tr(phi rho) for the single-qubit state with Bloch vector x."""
        return float(self.phi0 + self.x_phi @ np.asarray(x, dtype=float)) / 2

    def min_vertex_trace(self) -> float:
        return min(self.trace_with(v) for v in VERTICES.values())

    def tangent_vertices(self, tol: float = 1e-10) -> list[int]:
        return [k for k, v in VERTICES.items() if abs(self.trace_with(v)) <= tol]


@dataclass(frozen=True)
class BoundaryFace:
    kind: str  # 'vertex' | 'edge' | 'facet'
    id: object
    weights: tuple


def classify_boundary(x) -> BoundaryFace:
    """Locate a boundary point of the octahedron on a vertex, edge or facet.

    Coordinates within 1e-10 of zero are treated as zero, so near-ties go to
    the lower-dimensional face.
    """
    x = np.asarray(x, dtype=float)
    where = octahedron_membership(x)
    if where != "boundary":
        raise ValueError(f"point is {where}, not on the octahedron boundary")
    nz = [i for i in range(3) if abs(x[i]) > BOUNDARY_TOL]
    if len(nz) == 1:
        i = nz[0]
        return BoundaryFace("vertex", vertex_id(i, x[i]), (1.0,))
    w = np.abs(x[nz])
    w = w / w.sum()
    if len(nz) == 2:
        i, j = nz
        a, b = vertex_id(i, x[i]), vertex_id(j, x[j])
        if a > b:
            a, b = b, a
            w = w[::-1]
        return BoundaryFace("edge", (a, b), tuple(float(v) for v in w))
    signs = tuple(1 if v > 0 else -1 for v in x)
    return BoundaryFace("facet", signs, tuple(float(v) for v in w))


def facet_hyperplane(facet) -> SupportingHyperplane:
    signs = np.asarray(facet, dtype=float)
    if tuple(int(s) for s in signs) not in FACETS:
        raise ValueError(f"unknown facet id {facet!r}")
    return SupportingHyperplane(1 / np.sqrt(2), -signs / np.sqrt(2))


def edge_b(c: float) -> float:
    return float(np.sqrt((2 - c * c) / 3))


def edge_hyperplane(edge, c: float) -> SupportingHyperplane:
    """Supporting hyperplane x_phi = (-b, c, -b) for edge (s1, s3), mapped to ``edge``.

    ``c`` is the component along the axis not spanned by the edge; the two
    edge axes carry -b times the vertex signs, b = sqrt((2 - c^2)/3).
    """
    edge = tuple(sorted(edge))
    if edge not in EDGES:
        raise ValueError(f"unknown edge id {edge!r}")
    if c * c > 0.5 + 1e-15:
        raise ValueError(f"|c| = {abs(c):.6g} exceeds 1/sqrt(2); not a supporting hyperplane")
    c = float(np.clip(c, -C_MAX, C_MAX))
    b = edge_b(c)
    x_phi = np.zeros(3)
    used = set()
    for v in edge:
        axis, sign = _axis_sign(v)
        x_phi[axis] = -sign * b
        used.add(axis)
    (free,) = {0, 1, 2} - used
    x_phi[free] = c
    return SupportingHyperplane(b, x_phi)


def edge_point(edge, weight_first: float) -> np.ndarray:
    """Bloch vector weight_first * s_a + (1 - weight_first) * s_b on edge (a, b)."""
    a, b = sorted(edge)
    return weight_first * VERTICES[a] + (1 - weight_first) * VERTICES[b]


def facet_vertices(facet) -> list[int]:
    return [vertex_id(i, s) for i, s in enumerate(facet)]


def hyperplane_for(x_sigma, c: float = 0.0) -> SupportingHyperplane:
    """Supporting hyperplane at a facet or edge point (``c`` used on edges only)."""
    face = classify_boundary(x_sigma)
    if face.kind == "facet":
        return facet_hyperplane(face.id)
    if face.kind == "edge":
        return edge_hyperplane(face.id, c)
    raise ValueError("vertices are pure states and cannot be a closest stabilizer state")

"""Pure stabilizer states as the Clifford orbit of |0...0>, and octahedron membership."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

ORBIT_SIZES = {1: 6, 2: 60, 3: 1080}
BOUNDARY_TOL = 1e-10

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j])


@dataclass(frozen=True)
class PureStabilizer:
    label: int
    vector: np.ndarray
    projector: np.ndarray


def _single(gate: np.ndarray, site: int, n: int) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for k in range(n):
        out = np.kron(out, gate if k == site else np.eye(2))
    return out


def _cnot(control: int, target: int, n: int) -> np.ndarray:
    dim = 2**n
    perm = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        bits = [(idx >> (n - 1 - k)) & 1 for k in range(n)]
        if bits[control]:
            bits[target] ^= 1
        out = sum(b << (n - 1 - k) for k, b in enumerate(bits))
        perm[out, idx] = 1
    return perm


def clifford_generators(n: int) -> list[np.ndarray]:
    """H_i, S_i on each qubit and CNOT on each ordered pair."""
    gens = [_single(_H, i, n) for i in range(n)] + [_single(_S, i, n) for i in range(n)]
    gens += [_cnot(i, j, n) for i in range(n) for j in range(n) if i != j]
    return gens


def _key(proj: np.ndarray) -> tuple:
    flat = np.concatenate([proj.real.ravel(), proj.imag.ravel()])
    return tuple(np.rint(flat * 1e9).astype(np.int64))


@lru_cache(maxsize=None)
def enumerate_pure_stabilizers(n: int) -> tuple[PureStabilizer, ...]:
    """All pure n-qubit stabilizer states, n in {1, 2, 3}.

    Breadth-first closure of |0...0> under {H_i, S_i, CNOT_ij}; states are
    deduplicated on their projector entries rounded to 1e-9 and labelled in
    sorted key order, so the output is deterministic.
    """
    if n not in ORBIT_SIZES:
        raise ValueError(f"n must be 1, 2 or 3, got {n}")
    gens = clifford_generators(n)
    start = np.zeros(2**n, dtype=complex)
    start[0] = 1
    seen: dict[tuple, np.ndarray] = {}
    queue = deque([start])
    seen[_key(np.outer(start, start.conj()))] = start
    while queue:
        psi = queue.popleft()
        for g in gens:
            phi = g @ psi
            key = _key(np.outer(phi, phi.conj()))
            if key not in seen:
                seen[key] = phi
                queue.append(phi)
    if len(seen) != ORBIT_SIZES[n]:
        raise RuntimeError(f"orbit size {len(seen)} != expected {ORBIT_SIZES[n]}")
    out = []
    for label, key in enumerate(sorted(seen)):
        v = seen[key]
        proj = np.outer(v, v.conj())
        proj.setflags(write=False)
        v.setflags(write=False)
        out.append(PureStabilizer(label, v, proj))
    return tuple(out)


@lru_cache(maxsize=None)
def vertex_array(n: int) -> np.ndarray:
    """Stacked projectors, shape (N, 2^n, 2^n), read-only."""
    arr = np.stack([s.projector for s in enumerate_pure_stabilizers(n)])
    arr.setflags(write=False)
    return arr


def octahedron_membership(x) -> str:
    """Classify a Bloch vector as 'interior', 'boundary' or 'outside' the octahedron."""
    s = np.abs(np.asarray(x, dtype=float)).sum()
    if abs(s - 1) <= BOUNDARY_TOL:
        return "boundary"
    return "interior" if s < 1 else "outside"

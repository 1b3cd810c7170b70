"""Nonadditivity witnesses for tensor products of single-qubit magic states.

If the relative entropy of magic were additive on rho = (x)_i rho_i, the
product sigma = (x)_i sigma_i of the single-qubit closest states would be
closest to rho, and inverting rho = sigma - Phi o L(sigma) would give a
supporting hyperplane Phi of the n-qubit stabilizer polytope. This module
builds that Phi, splits it as Phi = PhiTilde + chi, and looks for stabilizer
states sigma' with Tr(Phi sigma') < 0.

Conventions: every site is written in the eigenbasis of sigma_i with the
larger eigenvalue first; the per-site hyperplane is t_i * phi_i with phi_i
normalised, so the global ray parameter is 1.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .bloch import (
    SupportingHyperplane,
    VERTICES,
    classify_boundary,
    density_from_bloch,
    edge_hyperplane,
    hyperplane_for,
)
from .family import divided_log_matrix, magic_from_stabilizer, t_max
from .qmat import EigenSystem, commutator, hermitian_eig, tensor
from .stab import vertex_array

log = logging.getLogger(__name__)

COMMUTE_TOL = 1e-10
VIOLATION_TOL = 1e-9


class ConsistencyError(RuntimeError):
    """Two independent constructions of the same quantity disagree."""


def classify_commuting(rho, sigma, phi=None, tol: float = COMMUTE_TOL) -> bool:
    """True iff [rho, sigma] = 0 (max-entry norm <= tol).

    When ``phi`` is given the answer is cross-checked against [phi, sigma].
    """
    rho, sigma = np.asarray(rho, dtype=complex), np.asarray(sigma, dtype=complex)
    flag = bool(np.max(np.abs(commutator(rho, sigma))) <= tol)
    if phi is not None:
        phi = phi.matrix if isinstance(phi, SupportingHyperplane) else np.asarray(phi)
        other = bool(np.max(np.abs(commutator(phi, sigma))) <= tol)
        if other != flag:
            raise ConsistencyError("[rho, sigma] = 0 and [phi, sigma] = 0 disagree")
    return flag


@dataclass(frozen=True)
class RayComponent:
    rho: np.ndarray
    sigma: np.ndarray
    phi: SupportingHyperplane
    t: float
    commuting: bool

    @classmethod
    def from_ray(cls, x_sigma, phi: SupportingHyperplane | None = None, t: float | None = None,
                 *, t_frac: float | None = None, c: float = 0.0) -> "RayComponent":
        """Build rho_i = rho(sigma_i, phi_i, t_i); ``t_frac`` is t / t_max."""
        x = np.asarray(x_sigma, dtype=float)
        phi = phi if phi is not None else hyperplane_for(x, c)
        if t is None:
            t = (1.0 if t_frac is None else t_frac) * t_max(x, phi)
        sig = density_from_bloch(x)
        rho = magic_from_stabilizer(sig, phi.matrix, t)
        return cls(rho, x, phi, float(t), classify_commuting(rho, sig, phi.matrix))

    @property
    def sigma_matrix(self) -> np.ndarray:
        return density_from_bloch(self.sigma)

    @property
    def r_sigma(self) -> float:
        return float(np.linalg.norm(self.sigma))

    @property
    def face_kind(self) -> str:
        return classify_boundary(self.sigma).kind

    def c_vectors(self) -> tuple[np.ndarray, np.ndarray]:
        """(c0, c1) with c1 = x_hat x x_phi and c0 = c1 x x_hat."""
        xh = self.sigma / self.r_sigma
        c1 = np.cross(xh, self.phi.x_phi)
        return np.cross(c1, xh), c1


@dataclass
class HyperplaneNQ:
    Phi: np.ndarray
    PhiTilde: np.ndarray
    chi: np.ndarray
    Delta: np.ndarray
    basis: np.ndarray
    a_m: dict
    gammas: tuple | None
    c_vectors: list
    components: list = field(repr=False)
    site_eigs: list = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.components)

    def in_computational_basis(self) -> np.ndarray:
        return self.basis @ self.Phi @ self.basis.conj().T

    def trace(self, state) -> float:
        """Tr(Phi sigma') for sigma' given in the computational basis."""
        s = self.basis.conj().T @ np.asarray(state, dtype=complex) @ self.basis
        return float(np.real(np.sum(self.Phi.T * s)))


def _site_eig(x_sigma) -> EigenSystem:
    return hermitian_eig(density_from_bloch(x_sigma))


def delta_pattern(lams: list[np.ndarray]) -> dict:
    """Anti-diagonal blocks A^(S) for every subset S with |S| >= 2.

    Returns {S: values} where values[k] is the entry at (k, k-bar) of A^(S),
    k running over {0,1}^|S| in lexicographic order.
    """
    n = len(lams)
    out = {}
    for s in range(2, n + 1):
        for S in itertools.combinations(range(n), s):
            sub = [lams[i] for i in S]
            lam_prod = tensor(*[np.asarray(l)[:, None] for l in sub]).ravel()
            l_prod = tensor(*[divided_log_matrix(l) for l in sub])
            l_full = divided_log_matrix(lam_prod)
            dim = 2**s
            vals = np.array([1 - l_prod[k, dim - 1 - k] / l_full[k, dim - 1 - k] for k in range(dim)])
            out[S] = vals
    return out


def _embed(S: tuple, block: np.ndarray, n: int) -> np.ndarray:
    """block acting on sites S (in order) tensored with identity elsewhere."""
    s = len(S)
    rest = [i for i in range(n) if i not in S]
    full = np.kron(block, np.eye(2 ** (n - s)))
    order = list(S) + rest
    perm = np.argsort(order)
    t = full.reshape([2] * (2 * n))
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(2**n, 2**n)


def delta_from_pattern(pattern: dict, n: int) -> np.ndarray:
    """Sum over S of A^(S) (x) I on the remaining sites."""
    out = np.zeros((2**n, 2**n))
    for S, vals in pattern.items():
        dim = 2 ** len(S)
        block = np.zeros((dim, dim))
        block[np.arange(dim), dim - 1 - np.arange(dim)] = vals
        out += _embed(S, block, n)
    return out


def a_coefficients(pattern: dict) -> dict:
    """a_m = 2^-s sum_j (-1)^(m.j) A^(S)_(j, j-bar), keyed by (S, m)."""
    out = {}
    for S, vals in pattern.items():
        s = len(S)
        js = list(itertools.product((0, 1), repeat=s))
        for m in js:
            out[(S, m)] = float(sum((-1) ** np.dot(m, j) * v for j, v in zip(js, vals)) / 2**s)
    return out


def _log_ratio(r: float) -> float:
    return float(np.log((1 + r) / (1 - r)))


def gamma_pm(r1: float, r2: float) -> tuple[float, float]:
    """Closed forms of L(s1)_12 L(s2)_12 / L(s1 (x) s2)_(14 | 23).

    These are the divided-log ratios on the two anti-diagonals of a
    two-qubit product; the corresponding Delta entries are 1 - gamma.
    """
    for r in (r1, r2):
        if not 0 < r < 1:
            raise ValueError(f"Bloch length {r} must lie strictly between 0 and 1")
    l1, l2 = _log_ratio(r1), _log_ratio(r2)
    gp = 2 * r1 * r2 / (r1 + r2) * (l1 + l2) / (l1 * l2)
    if abs(r1 - r2) <= 1e-12:
        gm = r1 * r1 / (1 - r1 * r1) * 4 / l1**2
    else:
        gm = 2 * r1 * r2 / (r1 - r2) * (l1 - l2) / (l1 * l2)
    return float(gp), float(gm)


def gamma_pm_oracle(r1: float, r2: float) -> tuple[float, float]:
    """The same ratios read directly off the divided-log matrices."""
    lam1 = np.array([(1 + r1) / 2, (1 - r1) / 2])
    lam2 = np.array([(1 + r2) / 2, (1 - r2) / 2])
    l1, l2 = divided_log_matrix(lam1), divided_log_matrix(lam2)
    full = divided_log_matrix(np.kron(lam1, lam2))
    num = l1[0, 1] * l2[0, 1]
    return float(num / full[0, 3]), float(num / full[1, 2])


def reconstruct_hyperplane(components: list[RayComponent], tol: float = 1e-9) -> HyperplaneNQ:
    """Would-be supporting hyperplane of the product, in the product eigenbasis.

    Built twice: analytically as PhiTilde + chi with
    PhiTilde = I - (x)(I - t_i phi_i) and chi = [(x)(I - t_i phi_i)] o Delta,
    and by entrywise inversion (sigma - rho) / L(sigma). Raises
    :class:`ConsistencyError` if the two disagree beyond ``tol``.
    """
    if len(components) < 2:
        raise ValueError("need at least two components")
    eigs = [_site_eig(c.sigma) for c in components]
    if min(e.eigenvalues.min() for e in eigs) < 1e-10:
        raise ValueError("closest states must be full rank")
    lams = [e.eigenvalues for e in eigs]
    basis = tensor(*[e.basis for e in eigs])
    n = len(components)
    dim = 2**n

    phis_t = [e.basis.conj().T @ (c.t * c.phi.matrix) @ e.basis for c, e in zip(components, eigs)]
    k = tensor(*[np.eye(2) - p for p in phis_t])
    lam = tensor(*[l[:, None] for l in lams]).ravel()
    l_full = divided_log_matrix(lam)
    l_prod = tensor(*[divided_log_matrix(l) for l in lams])
    # Delta from its anti-diagonal blocks, so entries that differ in one site are exactly 0
    pattern = delta_pattern(lams)
    delta = delta_from_pattern(pattern, n)
    ratio_err = np.max(np.abs(delta - (1 - l_prod / l_full)))
    if ratio_err > tol:
        raise ConsistencyError(f"Delta block decomposition off by {ratio_err:.3e}")
    phi_tilde = np.eye(dim) - k
    chi = k * delta
    phi = phi_tilde + chi

    rho = tensor(*[c.rho for c in components])
    rho_t = basis.conj().T @ rho @ basis
    phi_direct = (np.diag(lam) - rho_t) / l_full
    err = np.max(np.abs(phi - phi_direct))
    if err > tol * max(1.0, np.max(np.abs(phi))):
        raise ConsistencyError(f"analytic and entrywise hyperplanes differ by {err:.3e}")

    gammas = None
    if n == 2:
        gammas = gamma_pm(components[0].r_sigma, components[1].r_sigma)
    return HyperplaneNQ(
        Phi=phi,
        PhiTilde=phi_tilde,
        chi=chi,
        Delta=delta,
        basis=basis,
        a_m=a_coefficients(pattern),
        gammas=gammas,
        c_vectors=[c.c_vectors() for c in components],
        components=list(components),
        site_eigs=eigs,
    )


def chi_trace(hp: HyperplaneNQ, bloch_vectors) -> float:
    """Tr(chi sigma') for sigma' = (x)_j (I + x_j . sigma)/2, from Bloch data.

    Each subset S contributes (-1)^s sum_m a_m prod_{j in S} (t_j/2) i^m_j c_m_j . x_j,
    times prod_{j not in S} (1 - (t_j/2)(phi0_j + p_j u_j)) with
    p_j = x_phi . x_hat_sigma and u_j = x_j . x_hat_sigma. That last factor is
    1 whenever x_j = x_sigma_j.
    """
    xs = [np.asarray(x, dtype=float) for x in bloch_vectors]
    comps = hp.components
    if len(xs) != len(comps):
        raise ValueError("one Bloch vector per site is required")
    n = len(comps)
    pair = []
    outside = []
    for c, (c0, c1), x in zip(comps, hp.c_vectors, xs):
        pair.append((c.t / 2 * (c0 @ x), c.t / 2 * 1j * (c1 @ x)))
        xh = c.sigma / c.r_sigma
        outside.append(1 - c.t / 2 * (c.phi.phi0 + (c.phi.x_phi @ xh) * (x @ xh)))
    total = 0.0 + 0.0j
    for (S, m), a in hp.a_m.items():
        if a == 0.0:
            continue
        term = (-1) ** len(S) * a
        for j, mj in zip(S, m):
            term *= pair[j][mj]
        for j in range(n):
            if j not in S:
                term *= outside[j]
        total += term
    return float(total.real)


def chi_trace_direct(hp: HyperplaneNQ, bloch_vectors) -> float:
    state = tensor(*[density_from_bloch(x) for x in bloch_vectors])
    s = hp.basis.conj().T @ state @ hp.basis
    return float(np.real(np.sum(hp.chi.T * s)))


def validate_hyperplane(phi, n: int) -> tuple[float, bool]:
    """Minimum of Tr(Phi S_j) over pure n-qubit stabilizer states; valid iff >= -1e-10.

    ``phi`` is a matrix in the computational basis or a :class:`HyperplaneNQ`.
    """
    if isinstance(phi, HyperplaneNQ):
        phi = phi.in_computational_basis()
    phi = np.asarray(phi, dtype=complex)
    verts = vertex_array(n)
    vals = np.einsum("ij,nji->n", phi, verts).real
    m = float(vals.min())
    return m, m >= -1e-10


@dataclass
class WitnessReport:
    verdict: str
    trace_value: float | None
    trace_direct: float | None
    violating_state: list | None
    beta1: float | None
    theorem_class: bool
    commuting: list
    min_vertex_trace: float | None = None
    optimizer_gap: float | None = None
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        def conv(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, list):
                return [conv(x) for x in v]
            if isinstance(v, (np.floating, np.bool_)):
                return v.item()
            return v

        return {k: conv(v) for k, v in self.__dict__.items()}


def _facet_step_limit(x, d, sign) -> float:
    """Largest beta >= 0 with x + sign*beta*d still on the same facet."""
    signs = np.sign(x)
    y, e = signs * x, signs * d * sign
    lim = np.inf
    for yi, ei in zip(y, e):
        if ei < -1e-15:
            lim = min(lim, yi / -ei)
    return float(lim)


def theorem_class(components: list[RayComponent]) -> tuple[bool, int | None, int | None]:
    """(in class, facet site, partner site) for the nonadditivity theorem."""
    noncomm = [i for i, c in enumerate(components) if not c.commuting]
    facet = [i for i in noncomm if components[i].face_kind == "facet"]
    if len(noncomm) < 2 or not facet:
        return False, None, None
    a = facet[0]
    b = next(i for i in noncomm if i != a)
    return True, a, b


def joint_rel_entropy_gap(components: list[RayComponent], tol: float = 1e-8) -> float:
    """R((x) rho_i) - sum_i R(rho_i), each R from the optimiser / 1q fast path."""
    from .optim import closest_stabilizer_1q, relative_entropy_of_magic
    from .bloch import bloch_from_density

    joint = relative_entropy_of_magic(tensor(*[c.rho for c in components]), tol)
    singles = sum(closest_stabilizer_1q(bloch_from_density(c.rho))[0] for c in components)
    return joint.value - singles


def find_violation(components: list[RayComponent], confirm: bool = False,
                   search_resolution: int = 12) -> WitnessReport:
    """Construct a product stabilizer state violating the reconstructed hyperplane.

    For the theorem class, site a (facet, non-commuting) is displaced inside
    its facet perpendicular to c1_a, which keeps Tr(phi_a sigma'_a) = 0 and
    kills the c1 term; site b moves to the tangent vertex of phi_b maximising
    |c0_b . x|; all other sites stay at sigma_i. The sign of the displacement
    makes the trace negative and its size is the largest that stays on the
    facet. Outside the class a vertex scan is reported instead.
    """
    comm = [c.commuting for c in components]
    in_class, a, b = theorem_class(components)
    hp = reconstruct_hyperplane(components)
    n = len(components)
    if not in_class:
        m, _ = validate_hyperplane(hp, n) if n <= 3 else (None, None)
        report = WitnessReport("none-found", None, None, None, None, False, comm, m)
        report.notes.append("outside the theorem class; exploratory vertex scan only")
        if m is not None and m < -VIOLATION_TOL:
            report.notes.append("vertex scan found a negative trace (entangled stabilizer state)")
        if confirm:
            report.optimizer_gap = joint_rel_entropy_gap(components)
        return report

    ca, cb = components[a], components[b]
    c0a, c1a = hp.c_vectors[a]
    c0b, _ = hp.c_vectors[b]
    d = np.cross(ca.phi.x_phi, c1a)
    d /= np.linalg.norm(d)
    tangent = cb.phi.tangent_vertices()
    if not tangent:
        raise ConsistencyError("partner hyperplane touches no vertex")
    vb = max(tangent, key=lambda k: (abs(c0b @ VERTICES[k]), -k))
    xs = [c.sigma.copy() for c in components]
    xs[b] = VERTICES[vb].astype(float)

    def trace_at(beta):
        ys = list(xs)
        ys[a] = ca.sigma + beta * d
        return chi_trace(hp, ys), ys

    slope = trace_at(1.0)[0] - trace_at(0.0)[0]
    sign = -1.0 if slope > 0 else 1.0
    beta = sign * _facet_step_limit(ca.sigma, d, sign)
    value, ys = trace_at(beta)
    direct = hp.trace(tensor(*[density_from_bloch(y) for y in ys]))
    if abs(direct - value) > 1e-9:
        raise ConsistencyError(f"analytic trace {value:.3e} != matrix trace {direct:.3e}")
    verdict = "violation" if direct < -VIOLATION_TOL else "none-found"
    report = WitnessReport(verdict, value, direct, [np.asarray(y) for y in ys], beta, True, comm)
    report.min_vertex_trace = validate_hyperplane(hp, n)[0] if n <= 3 else None
    if confirm:
        report.optimizer_gap = joint_rel_entropy_gap(components)
    return report


@dataclass
class EdgeSearchReport:
    best_min_trace: float
    best_c: tuple
    grid: list
    supports_conjecture: bool


def edge_edge_search(first: RayComponent, second: RayComponent, resolution: int = 50) -> EdgeSearchReport:
    """Scan edge-hyperplane parameters (c1, c2) and test each reconstructed Phi.

    Each grid cell rebuilds both rays with the same closest states and
    t / t_max ratios, then takes the minimum of Tr(Phi S_j) over the 60 pure
    two-qubit stabilizer states. Cells where either ray commutes with its
    closest state are skipped.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    for comp in (first, second):
        face = classify_boundary(comp.sigma)
        if face.kind != "edge":
            raise ValueError("both closest states must lie on edge interiors")
        if comp.commuting:
            raise ValueError("commuting edge rays are outside the conjecture's scope")
    fracs = [c.t / t_max(c.sigma, c.phi) for c in (first, second)]
    edges = [classify_boundary(c.sigma).id for c in (first, second)]
    cs = np.linspace(-1 / np.sqrt(2), 1 / np.sqrt(2), resolution)
    grid = []
    best = (-np.inf, None)
    for c_a in cs:
        for c_b in cs:
            comps = []
            for comp, edge, frac, c in zip((first, second), edges, fracs, (c_a, c_b)):
                comps.append(RayComponent.from_ray(comp.sigma, edge_hyperplane(edge, c), t_frac=frac))
            if any(c.commuting for c in comps):
                continue
            m, _ = validate_hyperplane(reconstruct_hyperplane(comps), 2)
            grid.append((float(c_a), float(c_b), m))
            if m > best[0]:
                best = (m, (float(c_a), float(c_b)))
    return EdgeSearchReport(best[0], best[1], grid, bool(grid) and best[0] < -VIOLATION_TOL)

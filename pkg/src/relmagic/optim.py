"""Relative entropy of magic by conditional-gradient minimisation over the stabilizer polytope."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from .bloch import density_from_bloch
from .family import FACET_CENTROID, closest_stabilizer_from_magic, inclination_angle, R_CENTROID
from .qmat import (
    check_density,
    cross_entropy,
    cross_entropy_gradient,
    hermitian_eig,
    qubit_count,
    von_neumann_entropy,
)
from .stab import octahedron_membership, vertex_array

log = logging.getLogger(__name__)

_UNSUPPORTED = 1e300


@dataclass
class OptimResult:
    value: float
    sigma_star: np.ndarray
    weights: np.ndarray
    iterations: int
    gap: float
    history: list = field(default_factory=list, repr=False)


def _directional_derivative(rho, sigma, d) -> float:
    eig = hermitian_eig(sigma)
    if not np.isfinite(cross_entropy(rho, eig)):
        return _UNSUPPORTED
    return float(np.real(np.sum(cross_entropy_gradient(rho, eig).T * d)))


def _line_search(rho, sigma, d, gmax) -> float:
    hi = _directional_derivative(rho, sigma + gmax * d, d)
    if hi <= 0:
        return gmax
    return brentq(
        lambda g: _directional_derivative(rho, sigma + g * d, d), 0.0, gmax, xtol=1e-16, rtol=1e-15
    )


def relative_entropy_of_magic(
    rho,
    tol: float = 1e-8,
    max_iter: int = 200_000,
    stall_window: int = 200,
) -> OptimResult:
    """Minimise S(rho || sigma) over mixtures of pure stabilizer states.

    Conditional gradient with exact line search and a vertex-scan linear
    oracle, started from the uniform vertex mixture. Plain Frank-Wolfe steps
    are used until the gap fails to halve within ``stall_window`` iterations;
    after that away steps are also allowed. Stops when the Frank-Wolfe gap
    drops to ``tol`` (bits).
    """
    rho = check_density(rho)
    if not 1e-10 <= tol <= 1e-3:
        raise ValueError("tol must lie in [1e-10, 1e-3]")
    n = qubit_count(rho.shape[0])
    verts = vertex_array(n)
    nv = len(verts)
    weights = np.full(nv, 1.0 / nv)
    sigma = np.tensordot(weights, verts, axes=1)
    s_rho = von_neumann_entropy(rho)

    history = []
    checkpoint_gap, checkpoint_at = np.inf, 0
    away_enabled = False
    gap = np.inf
    it = 0
    for it in range(max_iter):
        eig = hermitian_eig(sigma)
        f = cross_entropy(rho, eig)
        history.append(f - s_rho)
        grad = cross_entropy_gradient(rho, eig)
        scores = np.einsum("ij,nji->n", grad, verts).real
        fw = int(np.argmin(scores))
        g_sigma = float(weights @ scores)
        gap = g_sigma - scores[fw]
        if gap <= tol:
            break
        if not away_enabled:
            if gap <= 0.5 * checkpoint_gap:
                checkpoint_gap, checkpoint_at = gap, it
            elif it - checkpoint_at >= stall_window:
                log.debug("gap stalled at %.3e after %d iterations; enabling away steps", gap, it)
                away_enabled = True

        active = np.flatnonzero(weights > 0)
        away = int(active[np.argmax(scores[active])])
        if away_enabled and scores[away] - g_sigma > gap and weights[away] < 1:
            d = sigma - verts[away]
            gmax = weights[away] / (1 - weights[away])
            step = _line_search(rho, sigma, d, gmax)
            weights *= 1 + step
            weights[away] -= step
            if step == gmax:
                weights[away] = 0.0
        else:
            d = verts[fw] - sigma
            step = _line_search(rho, sigma, d, 1.0)
            weights *= 1 - step
            weights[fw] += step
        weights = np.clip(weights, 0.0, None)
        weights /= weights.sum()
        sigma = np.tensordot(weights, verts, axes=1)

    eig = hermitian_eig(sigma)
    value = cross_entropy(rho, eig) - s_rho
    return OptimResult(float(value), sigma, weights, it + 1, float(gap), history)


def _bloch_rel_entropy(x_rho, x_sigma) -> float:
    r_rho = float(np.linalg.norm(x_rho))
    r_s = float(np.linalg.norm(x_sigma))
    if r_rho > 1e-15 and r_rho < 1 - 1e-15:
        neg_s = 0.5 * (np.log2((1 - r_rho**2) / 4) + r_rho * np.log2((1 + r_rho) / (1 - r_rho)))
    elif r_rho <= 1e-15:
        neg_s = -1.0
    else:
        neg_s = 0.0
    if r_s < 1e-15:
        return neg_s + 1.0
    cross = -0.5 * (np.log2((1 - r_s**2) / 4) + (x_rho @ x_sigma / r_s) * np.log2((1 + r_s) / (1 - r_s)))
    return float(neg_s + cross)


def _facet_seed(y) -> np.ndarray:
    """Geometric inversion iterated on the inclination angle; centroid on failure."""
    x = FACET_CENTROID.copy()
    for _ in range(5):
        try:
            x = closest_stabilizer_from_magic(y, inclination_angle(max(np.linalg.norm(x), R_CENTROID)))
        except ValueError:
            return FACET_CENTROID.copy()
        if np.linalg.norm(x) >= 1 - 1e-6:
            return FACET_CENTROID.copy()
    return x


def closest_stabilizer_1q(x_rho) -> tuple[float, np.ndarray]:
    """Single-qubit relative entropy of magic and the closest stabilizer Bloch vector.

    Minimises the Bloch-form relative entropy over the facet in the octant
    of ``x_rho`` (two barycentric parameters).
    """
    x = np.asarray(x_rho, dtype=float)
    if octahedron_membership(x) != "outside":
        return 0.0, x.copy()
    signs = np.where(x >= 0, 1.0, -1.0)
    y = signs * x
    lo = 1e-13

    def objective(p):
        s = np.array([p[0], p[1], 1 - p[0] - p[1]])
        return _bloch_rel_entropy(y, s)

    seed = _facet_seed(y)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(
            objective,
            seed[:2],
            method="SLSQP",
            bounds=[(lo, 1), (lo, 1)],
            constraints=[{"type": "ineq", "fun": lambda p: 1 - lo - p[0] - p[1]}],
            options={"ftol": 1e-16, "maxiter": 500},
        )
    p = res.x
    s = np.array([p[0], p[1], 1 - p[0] - p[1]])
    s = np.where(s < 1e-10, 0.0, s)
    s /= s.sum()
    return float(_bloch_rel_entropy(y, s)), signs * s


def closest_stabilizer_state_1q(x_rho) -> np.ndarray:
    return density_from_bloch(closest_stabilizer_1q(x_rho)[1])

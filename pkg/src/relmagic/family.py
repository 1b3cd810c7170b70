"""Magic states sharing a closest stabilizer state.

For a full-rank boundary state sigma with supporting hyperplane phi, every
state rho(sigma, phi, t) = sigma - t * (phi o L(sigma)) for 0 <= t <= t_max
has sigma as its closest stabilizer state. The Hadamard product is taken in
the eigenbasis of sigma. For one qubit the map is affine in t and all
quantities have closed forms in Bloch coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bloch import SupportingHyperplane, bloch_from_density, density_from_bloch, hyperplane_for
from .qmat import EQUAL_EIG_TOL, EigenSystem, hermitian_eig

T_DIRECTION = np.ones(3) / np.sqrt(3)
FACET_NORMAL = T_DIRECTION
FACET_CENTROID = np.ones(3) / 3
R_CENTROID = 1 / np.sqrt(3)


@dataclass(frozen=True)
class DividedLog:
    """L(sigma) in the eigenbasis of sigma together with that eigensystem."""

    matrix: np.ndarray
    eig: EigenSystem


def divided_log_matrix(lam) -> np.ndarray:
    """Entrywise inverse of the divided differences of ln at eigenvalues ``lam``."""
    lam = np.asarray(lam, dtype=float)
    a, b = lam[:, None], lam[None, :]
    tie = np.abs(a - b) <= EQUAL_EIG_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        # log1p keeps the log difference accurate for nearly equal eigenvalues
        off = (a - b) / np.log1p((a - b) / b)
    return np.where(tie, np.broadcast_to(a, tie.shape), off)


def divided_log(sigma) -> DividedLog:
    eig = hermitian_eig(sigma)
    if eig.eigenvalues.min() < 1e-10:
        raise ValueError("sigma is rank deficient; the relative entropy would be infinite")
    return DividedLog(divided_log_matrix(eig.eigenvalues), eig)


def _as_matrix(phi) -> np.ndarray:
    if isinstance(phi, SupportingHyperplane):
        return phi.matrix
    return np.asarray(phi, dtype=complex)


def magic_from_stabilizer(sigma, phi, t: float, *, check: bool = True) -> np.ndarray:
    """rho(sigma, phi, t) as a density matrix in the original basis.

    Raises:
        ValueError: if Tr(phi sigma) != 0 (1e-10), or if ``t`` exceeds t_max so
            that the result has a negative eigenvalue.
    """
    sigma = np.asarray(sigma, dtype=complex)
    phi = _as_matrix(phi)
    if abs(np.trace(phi @ sigma)) > 1e-10:
        raise ValueError("phi is not tangent at sigma: Tr(phi sigma) != 0")
    if t < 0:
        raise ValueError("t must be non-negative")
    dl = divided_log(sigma)
    u = dl.eig.basis
    phi_t = u.conj().T @ phi @ u
    rho_t = np.diag(dl.eig.eigenvalues).astype(complex) - t * phi_t * dl.matrix
    rho = u @ rho_t @ u.conj().T
    rho = (rho + rho.conj().T) / 2
    if check and np.linalg.eigvalsh(rho).min() < -1e-10:
        raise ValueError("t exceeds t_max: rho(sigma, phi, t) is not positive")
    return rho


def g_r(r: float) -> float:
    """r / ln((1 + r) / (1 - r)), the off-diagonal of L for a qubit of Bloch length r."""
    if not 0 < r < 1:
        raise ValueError(f"Bloch length must lie in (0, 1), got {r}")
    return r / np.log((1 + r) / (1 - r))


def ray_velocity(x_sigma, hp: SupportingHyperplane) -> np.ndarray:
    """d x_rho / dt; the Bloch trajectory is x_sigma + t * velocity."""
    x = np.asarray(x_sigma, dtype=float)
    r2 = x @ x
    g = g_r(np.sqrt(r2))
    phi0 = hp.phi0
    if abs(phi0 + x @ hp.x_phi) > 1e-10:
        raise ValueError("hyperplane is not tangent at x_sigma")
    return -((r2 - 1) * phi0 * x + 2 * g * (phi0 * x + r2 * hp.x_phi)) / (2 * r2)


def magic_bloch(x_sigma, hp: SupportingHyperplane, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError("t must be non-negative")
    v = ray_velocity(x_sigma, hp)
    if t > t_max(x_sigma, hp) * (1 + 1e-12):
        raise ValueError("t exceeds t_max")
    return np.asarray(x_sigma, dtype=float) + t * v


def t_max(x_sigma, hp: SupportingHyperplane) -> float:
    """Positive root of |x_sigma + t v|^2 = 1."""
    x = np.asarray(x_sigma, dtype=float)
    v = ray_velocity(x, hp)
    a, b, c = v @ v, 2 * x @ v, x @ x - 1
    if a <= 0:
        raise ValueError("degenerate ray: zero velocity")
    disc = b * b - 4 * a * c
    root = (-b + np.sqrt(disc)) / (2 * a)
    if not root > 0:
        raise ValueError("no positive root; phi is not a supporting hyperplane at sigma")
    return float(root)


def t_for_radius(x_sigma, hp: SupportingHyperplane, r_rho: float) -> float:
    """Parameter t at which the ray reaches Bloch length ``r_rho`` (>= r_sigma)."""
    x = np.asarray(x_sigma, dtype=float)
    v = ray_velocity(x, hp)
    a, b, c = v @ v, 2 * x @ v, x @ x - r_rho**2
    return float((-b + np.sqrt(b * b - 4 * a * c)) / (2 * a))


def t_max_printed(x_sigma, hp: SupportingHyperplane, r_rho: float = 1.0) -> float:
    """Alternative closed-form t expression, kept for comparison only.

    Differs from :func:`t_max` by a factor 1/(2 r_sigma^2) on the centroid
    (1.5529 vs 1.0353); :func:`t_max` is the self-consistent value.
    """
    x = np.asarray(x_sigma, dtype=float)
    r2 = x @ x
    g = g_r(np.sqrt(r2))
    phi0, rphi2 = hp.phi0, hp.r_phi**2
    h = (r2 - 1) ** 2 * phi0**2 + 4 * g * g * (r2 * rphi2 - phi0**2)
    inner = phi0**2 - h * (r2 - r_rho**2) / (r2 * (r2 - 1) ** 2)
    return float((r2 - 1) / h * (phi0 - np.sqrt(inner)))


def _log2_ratio(r: float) -> float:
    return float(np.log2((1 + r) / (1 - r)))


def rel_entropy_closed_form(x_sigma, hp: SupportingHyperplane, t: float) -> float:
    """Relative entropy of magic of rho(sigma, phi, t) in bits, from Bloch data.

    Uses the pure-state branch when |x_rho| = 1 (1e-12) and the mixed branch
    otherwise.
    """
    x = np.asarray(x_sigma, dtype=float)
    tm = t_max(x, hp)
    if t < 0 or t > tm * (1 + 1e-12):
        raise ValueError(f"t = {t} outside [0, t_max = {tm}]")
    r_s = float(np.linalg.norm(x))
    x_rho = x + t * ray_velocity(x, hp)
    r_rho = float(np.linalg.norm(x_rho))
    overlap = r_s - t * hp.phi0 * (r_s**2 - 1) / (2 * r_s)
    if abs(r_rho - 1) <= 1e-12:
        return 1 - 0.5 * (np.log2(1 - r_s**2) + overlap * _log2_ratio(r_s))
    mixed = r_rho * _log2_ratio(r_rho) if r_rho > 0 else 0.0
    return 0.5 * (mixed + np.log2((1 - r_rho**2) / (1 - r_s**2)) - overlap * _log2_ratio(r_s))


@dataclass(frozen=True)
class MagicRay:
    sigma: np.ndarray
    phi: SupportingHyperplane
    t_max: float
    g_r: float
    x_d: np.ndarray
    alpha: float | None

    def point(self, t: float) -> np.ndarray:
        return magic_bloch(self.sigma, self.phi, t)

    @property
    def endpoint(self) -> np.ndarray:
        return self.sigma + self.x_d


def make_ray(x_sigma, hp: SupportingHyperplane | None = None, c: float = 0.0) -> MagicRay:
    """Bundle a boundary state, its hyperplane and derived scalars."""
    x = np.asarray(x_sigma, dtype=float)
    hp = hp if hp is not None else hyperplane_for(x, c)
    tm = t_max(x, hp)
    x_d = tm * ray_velocity(x, hp)
    r = float(np.linalg.norm(x))
    alpha = None
    if np.all(np.abs(x) > 1e-10):
        n = np.sign(x) / np.sqrt(3)
        alpha = float(np.arccos(np.clip(x_d @ n / np.linalg.norm(x_d), -1, 1)))
    return MagicRay(x, hp, tm, g_r(r), x_d, alpha)


def inclination_angle(r_sigma: float, *, printed: bool = False) -> float:
    """Angle between a facet ray and the facet normal, as a function of r_sigma.

    cos(alpha) = [(1 - r^2) + 2g(3r^2 - 1)] / (sqrt(3) r sqrt((1 - r^2)^2 + 4g^2(3r^2 - 1)))

    ``printed=True`` evaluates the alternative numerator
    (1 - r^2)(1 - 2g) instead, which does not vanish at the centroid.
    """
    r = float(r_sigma)
    if r < R_CENTROID - 1e-12 or r >= 1:
        raise ValueError("facet states have r_sigma in [1/sqrt(3), 1)")
    r = max(r, R_CENTROID)
    g = g_r(r)
    q = 3 * r * r - 1
    num = (1 - r * r) * (1 - 2 * g) if printed else (1 - r * r) + 2 * g * q
    cos_a = num / (np.sqrt(3) * r * np.sqrt((1 - r * r) ** 2 + 4 * g * g * q))
    if abs(cos_a) > 1 + 1e-12:
        raise ValueError(f"arccos argument {cos_a} outside [-1, 1]")
    return float(np.arccos(np.clip(cos_a, -1.0, 1.0)))


def closest_stabilizer_from_magic(x_rho, alpha: float) -> np.ndarray:
    """Facet stabilizer state closest to ``x_rho``, given the ray inclination ``alpha``.

    The orthogonal projection of x_rho onto the facet plane, the closest
    state and the facet centroid are collinear; the closest state lies
    further from the centroid by height * tan(alpha). Works for any octant
    by sign folding, and for mixed x_rho outside the octahedron.
    """
    x = np.asarray(x_rho, dtype=float)
    signs = np.where(x >= 0, 1.0, -1.0)
    y = signs * x
    s = y.sum()
    if s <= 1:
        raise ValueError("x_rho is not outside the octahedron")
    lateral = y - (s / 3) * np.ones(3)
    dist = np.linalg.norm(lateral)
    height = (s - 1) / np.sqrt(3)
    if dist < 1e-15:
        b = 1.0
    else:
        b = 1 + np.tan(alpha) * height / dist
    sigma = FACET_CENTROID + b * lateral
    if sigma.min() < -1e-12:
        raise ValueError("closest state on edge: the facet inversion does not apply")
    return signs * np.clip(sigma, 0, None)


def fit_angle_model(samples) -> tuple[float, float, float]:
    """Least-squares line alpha ~ slope * distance + intercept.

    Returns (slope, intercept, max_abs_residual).
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("samples must be (distance, alpha) pairs")
    d, a = arr[:, 0], arr[:, 1]
    if np.unique(np.round(d, 12)).size < 2:
        raise ValueError("need at least two distinct distances to fit a line")
    slope, intercept = np.polyfit(d, a, 1)
    resid = a - (slope * d + intercept)
    return float(slope), float(intercept), float(np.abs(resid).max())


def facet_sweep_state(r_sigma: float) -> np.ndarray:
    """Facet (+++) state on the centroid-to-s1 segment with Bloch length r_sigma."""
    # x = (a, b, b), a + 2b = 1, a^2 + 2b^2 = r^2, a >= b
    if abs(r_sigma - R_CENTROID) <= 1e-12:
        return FACET_CENTROID.copy()
    b = (2 - np.sqrt(max(6 * r_sigma**2 - 2, 0.0))) / 6
    return np.array([1 - 2 * b, b, b])


def angle_samples(r_values) -> np.ndarray:
    """(|x_rho(t_max) - x_T|, alpha) along the centroid-to-s1 facet segment."""
    rows = []
    for r in r_values:
        ray = make_ray(facet_sweep_state(r))
        dist = np.linalg.norm(ray.endpoint - T_DIRECTION)
        rows.append((dist, inclination_angle(r)))
    return np.array(rows)


def ray_density(x_sigma, hp: SupportingHyperplane, t: float) -> np.ndarray:
    """Matrix route for a single qubit: rho(sigma, phi, t) built in sigma's eigenbasis."""
    return magic_from_stabilizer(density_from_bloch(x_sigma), hp.matrix, t)


def ray_bloch_via_matrix(x_sigma, hp: SupportingHyperplane, t: float) -> np.ndarray:
    return bloch_from_density(ray_density(x_sigma, hp, t))

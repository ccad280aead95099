"""Analytic reference configurations and bounds.

Exact oracles (their causal action is known in closed form):

* ``orthogonal_min_config``: scaled projectors on mutually orthogonal subspaces,
  ``S = 1 / (2 m n^3)``.
* ``dirac2d_config``: equal-weight points ``(1 + tau x.sigma) / 2`` for a well
  separated point set on S^2, with ``tau`` chosen so that the closest pair is
  exactly lightlike; ``S = tau^2 / (2m)``.
* ``dirac4d_config``: the same on S^4 through five Euclidean Dirac matrices,
  ``S = tau^2 / (16 m)``.

Point sets come from :func:`tammes_points`, a Riesz-energy repulsion followed by
an SLSQP polish of the minimal pairwise angle.  Only the achieved angle matters,
since the exact formulas hold for any causally trivial sphere configuration.
"""

from __future__ import annotations

import enum
import functools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .action import causal_action, classify, critical_angles
from .errors import DimensionTooSmall, NotCausallyTrivial
from .operators import PAULI, CausalClass, Configuration, bloch_matrix, f2_to_bloch, validate_point

logger = logging.getLogger(__name__)

# densest packing densities in the plane and in R^4
DELTA_2 = np.pi * np.sqrt(3.0) / 6.0
DELTA_4 = np.pi**2 / 16.0

TRIVIAL_TOL = 1e-10
LIGHTLIKE_ANGLE_TOL = 1e-8
RING_DIRECTIONS = 64
RING_RADIUS = 1e-4
TAMMES_RESTARTS = 5

_I2 = np.eye(2)
_Z2 = np.zeros((2, 2))
# Euclidean Dirac matrices of R^5: diag(sigma, -sigma), then the two off-diagonal blocks
DIRAC_GAMMAS = np.array(
    [np.block([[s, _Z2], [_Z2, -s]]) for s in PAULI]
    + [
        np.block([[_Z2, 1j * _I2], [-1j * _I2, _Z2]]),
        np.block([[_Z2, _I2], [_I2, _Z2]]),
    ],
    dtype=complex,
)

# Regular tetrahedron on the Bloch sphere.  The rank-one projectors onto the
# corresponding spinors have overlaps |<v_i|v_j>|^2 = (1 + cos theta) / 2 = 1/3
# since cos theta = -1/3, which is equality in the Welch bound for f = 2.
SIC_TETRAHEDRON = np.array(
    [
        [0.0, 0.0, 1.0],
        [2.0 * np.sqrt(2.0) / 3.0, 0.0, -1.0 / 3.0],
        [-np.sqrt(2.0) / 3.0, np.sqrt(2.0 / 3.0), -1.0 / 3.0],
        [-np.sqrt(2.0) / 3.0, -np.sqrt(2.0 / 3.0), -1.0 / 3.0],
    ]
)


class Regime(str, enum.Enum):
    EXACT = "Exact"
    ASYMPTOTIC = "Asymptotic"


@dataclass(frozen=True)
class SpherePoints:
    points: np.ndarray
    min_angle: float


@dataclass(frozen=True)
class OraclePrediction:
    tau: float | None
    action: float
    boundedness: float | None
    regime: Regime
    label: str = ""
    asymptotic: "OraclePrediction | None" = field(default=None, compare=False)

    def __post_init__(self):
        if self.action < 0:
            raise ValueError("predicted action must be non-negative")

    def as_dict(self) -> dict:
        out = {
            "label": self.label,
            "regime": self.regime.value,
            "tau": self.tau,
            "action": self.action,
            "boundedness": self.boundedness,
        }
        if self.asymptotic is not None:
            out["asymptotic"] = self.asymptotic.as_dict()
        return out


def iso_lagrangian(tau: float, tau2: float) -> float:
    """Lagrangian of two uniform spheres of radii ``tau`` and ``tau2`` averaged over angles."""
    if tau < 1 or tau2 < 1:
        raise ValueError("radii must be at least 1")
    a = (tau * tau - 1.0) ** 1.5 * (tau2 * tau2 - 1.0) ** 1.5 / (12.0 * tau * tau2)
    return a - tau * tau * tau2 * tau2 / 12.0 + (tau * tau + tau2 * tau2) / 8.0


# --- point sets on spheres --------------------------------------------------


def _min_angle(x: np.ndarray) -> float:
    g = np.clip(x @ x.T, -1.0, 1.0)
    np.fill_diagonal(g, -np.inf)
    return float(np.arccos(g.max()))


def _riesz_repulsion(x: np.ndarray, exponents=(1.0, 2.0, 4.0, 8.0, 16.0, 32.0), steps: int = 150) -> np.ndarray:
    m = x.shape[0]
    for s in exponents:
        for it in range(steps):
            diff = x[:, None, :] - x[None, :, :]
            r = np.linalg.norm(diff, axis=-1) + np.eye(m)
            rmin = r[~np.eye(m, dtype=bool)].min()
            w = (r / rmin) ** (-(s + 2.0))
            np.fill_diagonal(w, 0.0)
            force = np.einsum("ij,ijk->ik", w, diff)
            force -= np.sum(force * x, axis=1, keepdims=True) * x
            scale = np.max(np.linalg.norm(force, axis=1))
            if scale == 0:
                break
            step = 0.1 * rmin * (1.0 - it / steps) + 1e-3 * rmin
            x = x + step * force / scale
            x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x


def _polish_min_angle(x: np.ndarray, window: float = 0.1, rounds: int = 4) -> np.ndarray:
    """Maximize the minimal angle with SLSQP on the near-active pairs."""
    m, dim = x.shape
    best = x
    best_angle = _min_angle(x)
    for _ in range(rounds):
        g = best @ best.T
        iu, ju = np.triu_indices(m, 1)
        cmax = g[iu, ju].max()
        keep = g[iu, ju] >= cmax - window
        pi, pj = iu[keep], ju[keep]

        def unpack(z):
            return z[:-1].reshape(m, dim), z[-1]

        def ineq(z):
            y, t = unpack(z)
            return t - np.sum(y[pi] * y[pj], axis=1)

        def ineq_jac(z):
            y, _ = unpack(z)
            jac = np.zeros((len(pi), m * dim + 1))
            rows = np.arange(len(pi))
            for a in range(dim):
                jac[rows, pi * dim + a] -= y[pj, a]
                jac[rows, pj * dim + a] -= y[pi, a]
            jac[:, -1] = 1.0
            return jac

        def eq(z):
            y, _ = unpack(z)
            return np.sum(y * y, axis=1) - 1.0

        def eq_jac(z):
            y, _ = unpack(z)
            jac = np.zeros((m, m * dim + 1))
            for a in range(dim):
                jac[np.arange(m), np.arange(m) * dim + a] = 2.0 * y[:, a]
            return jac

        z0 = np.concatenate([best.ravel(), [cmax]])
        res = minimize(
            lambda z: z[-1],
            z0,
            jac=lambda z: np.eye(1, z.size, z.size - 1).ravel(),
            method="SLSQP",
            constraints=[
                {"type": "ineq", "fun": ineq, "jac": ineq_jac},
                {"type": "eq", "fun": eq, "jac": eq_jac},
            ],
            options={"ftol": 1e-15, "maxiter": 500},
        )
        y = res.x[:-1].reshape(m, dim)
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        angle = _min_angle(y)
        if angle <= best_angle:
            break
        gain = angle - best_angle
        best, best_angle = y, angle
        if gain < 1e-6:
            break
    return best


def tammes_points(m: int, d: int = 2, seed=0, restarts: int = TAMMES_RESTARTS) -> SpherePoints:
    """Well-separated ``m`` points on ``S^d`` (``d`` = 2 or 4).

    Not guaranteed to solve the Tammes problem; the achieved minimal angle is
    reported and is what the Dirac sphere oracles use.
    """
    if m < 2:
        raise ValueError("need at least two points")
    if d not in (2, 4):
        raise ValueError("only S^2 and S^4 are supported")
    if isinstance(seed, (int, np.integer)):
        return _tammes_cached(int(m), int(d), int(seed), int(restarts))
    return _tammes(m, d, seed, restarts)


@functools.lru_cache(maxsize=64)
def _tammes_cached(m, d, seed, restarts):
    return _tammes(m, d, np.random.default_rng(seed), restarts)


def _tammes(m, d, rng, restarts):
    best = None
    for _ in range(restarts):
        x = rng.normal(size=(m, d + 1))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        x = _riesz_repulsion(x)
        x = _polish_min_angle(x)
        angle = _min_angle(x)
        if best is None or angle > best.min_angle:
            x.setflags(write=False)
            best = SpherePoints(points=x, min_angle=angle)
    logger.debug("tammes m=%d d=%d: min angle %.12f", m, d, best.min_angle)
    return best


def tau_from_angle(theta: float) -> float:
    """Radius for which two equal-radius points at angle ``theta`` are lightlike."""
    return float(np.sqrt(2.0 / (1.0 - np.cos(theta))))


# --- Dirac spheres ----------------------------------------------------------


def _require_trivial(config: Configuration) -> None:
    ok, bad = is_causally_trivial(config)
    if not ok:
        raise NotCausallyTrivial(bad)


def dirac2d_asymptotic(m: int) -> OraclePrediction:
    tau = 3**0.25 * np.sqrt(m / (2 * np.pi))
    return OraclePrediction(
        tau=float(tau),
        action=np.sqrt(3.0) / (4 * np.pi),
        boundedness=3.0 * m * m / (16 * np.pi**2),
        regime=Regime.ASYMPTOTIC,
        label="dirac2d-asymptote",
    )


def dirac2d_config(m: int, seed=0) -> tuple[Configuration, OraclePrediction]:
    """Equal-weight Dirac sphere on S^2 with the closest pair on the light cone."""
    if m < 2:
        raise ValueError("need m >= 2")
    pts = tammes_points(m, 2, seed)
    tau = tau_from_angle(pts.min_angle)
    mats = [bloch_matrix(tau, x) for x in pts.points]
    config = Configuration.from_matrices(mats, np.full(m, 1.0 / m), n=1)
    _require_trivial(config)
    pred = OraclePrediction(
        tau=tau,
        action=tau * tau / (2 * m),
        boundedness=(tau * tau - 1.0) ** 2 / 4.0 + tau * tau / m,
        regime=Regime.EXACT,
        label="dirac2d",
        asymptotic=dirac2d_asymptotic(m),
    )
    return config, pred


def dirac4d_operator(tau: float, x) -> np.ndarray:
    """``(tau x.gamma + 1) / 4`` for a unit vector ``x`` in R^5."""
    return 0.25 * (tau * np.einsum("k,kab->ab", np.asarray(x, dtype=float), DIRAC_GAMMAS) + np.eye(4))


def dirac4d_lagrangian(tau: float, theta: float) -> float:
    """Lagrangian of two points of the 4D Dirac sphere at angle ``theta``."""
    if tau < 1:
        raise ValueError("tau must be at least 1")
    c = np.cos(theta)
    if tau * tau * (1.0 - c) >= 2.0:
        return 0.0
    return tau * tau / 64.0 * (1.0 + c) * (2.0 - tau * tau * (1.0 - c))


def dirac4d_asymptotic(m: int) -> OraclePrediction:
    tau = 3**0.25 * m**0.25 / np.sqrt(np.pi)
    return OraclePrediction(
        tau=float(tau),
        action=np.sqrt(3.0) / (16 * np.pi * np.sqrt(m)),
        boundedness=(1 + tau) ** 2 * (1 - tau) ** 2 / 16.0,
        regime=Regime.ASYMPTOTIC,
        label="dirac4d-asymptote",
    )


def dirac4d_config(m: int, seed=0) -> tuple[Configuration, OraclePrediction]:
    """Equal-weight Dirac sphere on S^4 (``n = 2``, ``f = 4``).

    The exact boundedness of a causally trivial configuration is
    ``(tau^2 - 1)^2 / 16 + tau^2 / (4m)``; the leading term alone is the
    large-``m`` asymptote.
    """
    if m < 2:
        raise ValueError("need m >= 2")
    pts = tammes_points(m, 4, seed)
    tau = tau_from_angle(pts.min_angle)
    mats = [dirac4d_operator(tau, x) for x in pts.points]
    config = Configuration.from_matrices(mats, np.full(m, 1.0 / m), n=2)
    _require_trivial(config)
    pred = OraclePrediction(
        tau=tau,
        action=tau * tau / (16 * m),
        boundedness=(tau * tau - 1.0) ** 2 / 16.0 + tau * tau / (4 * m),
        regime=Regime.EXACT,
        label="dirac4d",
        asymptotic=dirac4d_asymptotic(m),
    )
    return config, pred


def dirac4d_leading_boundedness(tau: float) -> float:
    return (1 + tau) ** 2 * (1 - tau) ** 2 / 16.0


# --- floors -----------------------------------------------------------------


def orthogonal_min_config(n: int, f: int, m: int) -> Configuration:
    """``m`` scaled projectors ``P_i / n`` onto mutually orthogonal n-dimensional subspaces."""
    if f < m * n:
        raise DimensionTooSmall(f"need f >= m n = {m * n}, got f = {f}")
    mats = []
    for i in range(m):
        a = np.zeros((f, f))
        idx = np.arange(i * n, (i + 1) * n)
        a[idx, idx] = 1.0 / n
        mats.append(a)
    return Configuration.from_matrices(mats, np.full(m, 1.0 / m), n=n)


def welch_floor(f: int) -> float:
    """``1 / (f (f + 1))``; a floor for equal-weight configurations of rank-one projectors."""
    if f < 2:
        raise ValueError("need f >= 2")
    return 1.0 / (f * (f + 1))


def sic_tetrahedron_config() -> Configuration:
    """Four rank-one projectors attaining the Welch floor for ``f = 2``."""
    mats = [bloch_matrix(1.0, v) for v in SIC_TETRAHEDRON]
    return Configuration.from_matrices(mats, np.full(4, 0.25), n=1)


def optimal_weights(taus) -> np.ndarray:
    """Weights ``tau_i^-2 / sum_j tau_j^-2`` minimizing a causally trivial f = 2 action."""
    t = np.asarray(taus, dtype=float)
    if np.any(t < 1):
        raise ValueError("all taus must be at least 1")
    w = t**-2
    return w / w.sum()


def is_causally_trivial(config: Configuration, tol: float = TRIVIAL_TOL):
    """``(True, [])`` if all distinct pairs have vanishing Lagrangian, else the offending pairs."""
    lag = causal_action(config).pair_lagrangians
    m = config.m
    bad = [(i, j) for i in range(m) for j in range(i + 1, m) if lag[i, j] >= tol]
    return not bad, bad


# --- local minimality for f = 2 -------------------------------------------


@dataclass(frozen=True)
class PointVerdict:
    index: int
    tau: float
    lightlike_partners: int
    tau_condition: bool
    angular_restricted: bool

    @property
    def hypotheses_met(self) -> bool:
        return self.lightlike_partners >= 3 and self.tau_condition and self.angular_restricted


@dataclass(frozen=True)
class LocalMinReport:
    points: tuple
    weights_optimal: bool

    @property
    def is_local_min(self) -> bool:
        return self.weights_optimal and all(p.hypotheses_met for p in self.points)


def _ring(x: np.ndarray, radius: float, count: int) -> np.ndarray:
    helper = np.eye(3)[np.argmin(np.abs(x))]
    e1 = np.cross(x, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(x, e1)
    phi = 2 * np.pi * np.arange(count) / count
    y = np.cos(radius) * x + np.sin(radius) * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2)
    return y / np.linalg.norm(y, axis=1, keepdims=True)


def local_min_check(config: Configuration, ring_radius: float = RING_RADIUS) -> LocalMinReport:
    """Check the sufficient conditions for a causally trivial f = 2 measure to be a local minimizer.

    Per point: the number ``k`` of lightlike partners, ``tau >= sqrt(k / (k - 2))``
    (for ``k >= 3``), and angular restriction tested on a ring of perturbed
    directions.
    """
    if config.f != 2 or config.n != 1:
        raise ValueError("local minimality check needs n = 1, f = 2")
    _require_trivial(config)
    bloch = [f2_to_bloch(p) for p in config.points]
    taus = np.array([b.tau for b in bloch])
    dirs = np.array([b.direction for b in bloch])
    weights_optimal = bool(np.allclose(config.weights, optimal_weights(taus), atol=1e-8))
    verdicts = []
    m = config.m
    for i in range(m):
        k = 0
        for j in range(m):
            if j == i:
                continue
            theta = np.arccos(np.clip(dirs[i] @ dirs[j], -1.0, 1.0))
            # only the opening angle of the cone restricts angular motion
            lo, _ = critical_angles(taus[i], taus[j])
            if abs(theta - lo) <= LIGHTLIKE_ANGLE_TOL:
                k += 1
        tau_ok = k >= 3 and taus[i] >= np.sqrt(k / (k - 2)) - 1e-9
        restricted = True
        others = [config.points[j] for j in range(m) if j != i]
        for y in _ring(dirs[i], ring_radius, RING_DIRECTIONS):
            moved = validate_point(bloch_matrix(taus[i], y), 1)
            if not any(classify(moved, other) == CausalClass.TIMELIKE for other in others):
                restricted = False
                break
        verdicts.append(PointVerdict(i, float(taus[i]), k, bool(tau_ok), restricted))
    return LocalMinReport(points=tuple(verdicts), weights_optimal=weights_optimal)


# --- regime table -----------------------------------------------------------


def asymptotic_table(n: int, f: int, m: int) -> list[OraclePrediction]:
    """Analytic predictions applicable to the shape ``(n, f, m)``."""
    out = []
    if f >= m * n:
        out.append(
            OraclePrediction(
                tau=None,
                action=1.0 / (2 * m * n**3),
                boundedness=None,
                regime=Regime.EXACT,
                label="orthogonal-floor",
            )
        )
    if n == 1 and f == 2:
        out.append(dirac2d_asymptotic(m))
    if n == 2 and f == 4:
        out.append(dirac4d_asymptotic(m))
    if n == 1 and f >= 2:
        out.append(
            OraclePrediction(tau=1.0, action=welch_floor(f), boundedness=None, regime=Regime.EXACT, label="welch-floor")
        )
    return out

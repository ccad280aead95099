"""Points of the operator space F and weighted counting measures on it.

A point is a Hermitian f x f matrix of trace one with at most ``n`` positive
and at most ``n`` negative eigenvalues.  A :class:`Configuration` is a finite
list of such points with non-negative weights summing to one.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NotHermitian, SignatureViolation, TauBelowOne, TraceNotOne

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
SIGNATURE_RTOL = 1e-9
WEIGHT_TOL = 1e-12
SYMMETRIZE_WARN = 1e-8

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


class CausalClass(str, enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    LIGHTLIKE = "lightlike"


@dataclass(frozen=True, eq=False)
class OperatorPoint:
    """A validated point of F together with its cached eigendecomposition.

    Build instances through :func:`validate_point`; the constructor does not
    check anything.
    """

    matrix: np.ndarray
    n: int
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def f(self) -> int:
        return self.matrix.shape[0]

    @property
    def tau(self) -> float:
        """Spectral gap ``nu_max - nu_min``; equals tau of the Bloch form for f=2."""
        return float(self.eigenvalues[-1] - self.eigenvalues[0])

    def image_basis(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(V, nu)`` with ``x = V diag(nu) V^*`` restricted to the spin space.

        ``V`` is ``f x k`` with ``k = min(2n, f)`` orthonormal columns: first the
        ``n`` largest eigenvalues in descending order, then the ``n`` smallest in
        ascending order.  For ``f = 2n`` all eigenvectors are used.
        """
        f, n = self.f, self.n
        k = min(2 * n, f)
        order = np.argsort(self.eigenvalues)
        top = order[::-1][: min(n, f)]
        bottom = order[~np.isin(order, top)][: k - len(top)]
        idx = np.concatenate([top, bottom])
        return self.eigenvectors[:, idx], self.eigenvalues[idx]


def _spectral_counts(eigenvalues: np.ndarray) -> tuple[int, int]:
    scale = max(float(np.max(np.abs(eigenvalues))), np.finfo(float).tiny)
    tol = SIGNATURE_RTOL * scale
    return int(np.sum(eigenvalues > tol)), int(np.sum(eigenvalues < -tol))


def validate_point(matrix, n: int) -> OperatorPoint:
    """Check that ``matrix`` lies in F for spin dimension ``n``.

    Raises
    ------
    NotHermitian, TraceNotOne, SignatureViolation
    """
    a = np.array(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if n < 1:
        raise ValueError("spin dimension must be positive")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL * scale:
        raise NotHermitian(f"max |A - A*| = {np.max(np.abs(a - a.conj().T)):.3e}")
    a = 0.5 * (a + a.conj().T)
    tr = np.trace(a).real
    if abs(tr - 1.0) > TRACE_TOL * scale:
        raise TraceNotOne(f"trace is {tr!r}")
    evals, evecs = np.linalg.eigh(a)
    n_pos, n_neg = _spectral_counts(evals)
    if n_pos > n or n_neg > n:
        raise SignatureViolation(n_pos, n_neg, n)
    return OperatorPoint(matrix=a, n=n, eigenvalues=evals, eigenvectors=evecs)


def symmetrize(matrix) -> np.ndarray:
    """Project onto Hermitian matrices, warning if the correction is large.

    Used when reading matrices back from files.
    """
    a = np.asarray(matrix, dtype=complex)
    h = 0.5 * (a + a.conj().T)
    err = float(np.max(np.abs(a - h))) if a.size else 0.0
    if err > SYMMETRIZE_WARN:
        warnings.warn(f"symmetrization changed entries by up to {err:.3e}", stacklevel=2)
    return h


@dataclass(frozen=True, eq=False)
class Configuration:
    """Normalized weighted counting measure ``sum_i c_i delta_{x_i}``."""

    points: tuple[OperatorPoint, ...]
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        w = np.asarray(self.weights, dtype=float).copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if len(self.points) == 0:
            raise ValueError("configuration needs at least one point")
        if w.shape != (len(self.points),):
            raise ValueError(f"{len(self.points)} points but weights of shape {w.shape}")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > WEIGHT_TOL * max(1, len(w)):
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        shapes = {(p.n, p.f) for p in self.points}
        if len(shapes) != 1:
            raise ValueError(f"points mix (n, f) values: {sorted(shapes)}")

    @classmethod
    def from_matrices(cls, matrices: Sequence, weights, n: int) -> "Configuration":
        return cls(tuple(validate_point(a, n) for a in matrices), np.asarray(weights, dtype=float))

    @classmethod
    def equal_weights(cls, points: Sequence[OperatorPoint]) -> "Configuration":
        m = len(points)
        return cls(tuple(points), np.full(m, 1.0 / m))

    @property
    def m(self) -> int:
        return len(self.points)

    @property
    def n(self) -> int:
        return self.points[0].n

    @property
    def f(self) -> int:
        return self.points[0].f

    def matrices(self) -> np.ndarray:
        return np.stack([p.matrix for p in self.points])

    def spin_spaces(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacked image bases ``V`` (m, f, k) and spectra ``nu`` (m, k)."""
        pairs = [p.image_basis() for p in self.points]
        return np.stack([v for v, _ in pairs]), np.stack([nu for _, nu in pairs])


@dataclass(frozen=True)
class BlochCoords:
    """``(tau, direction)`` with ``x = (1 + tau direction . sigma) / 2``."""

    tau: float
    direction: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (3,):
            raise ValueError("direction must be a vector in R^3")
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ValueError(f"direction has norm {np.linalg.norm(d)!r}")
        if self.tau < 1.0:
            raise TauBelowOne(f"tau = {self.tau!r} < 1")
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "tau", float(self.tau))


def bloch_matrix(tau: float, direction) -> np.ndarray:
    """The 2 x 2 matrix ``(1 + tau direction . sigma) / 2`` without validation."""
    d = np.asarray(direction, dtype=float)
    return 0.5 * (np.eye(2) + tau * np.einsum("k,kab->ab", d, PAULI))


def f2_from_bloch(coords: BlochCoords) -> OperatorPoint:
    return validate_point(bloch_matrix(coords.tau, coords.direction), n=1)


def f2_to_bloch(x) -> BlochCoords:
    """Invert :func:`f2_from_bloch`.

    Accepts an :class:`OperatorPoint` or a raw trace-one Hermitian 2 x 2 matrix
    so that points inside the unit ball can be reported as such.
    """
    a = x.matrix if isinstance(x, OperatorPoint) else np.asarray(x, dtype=complex)
    if a.shape != (2, 2):
        raise ValueError("Bloch coordinates exist only for f = 2")
    v = np.einsum("ab,kba->k", a, PAULI).real
    tau = float(np.linalg.norm(v))
    if tau < 1.0 - 1e-12:
        raise TauBelowOne(f"tau = {tau:.6g} < 1: operator lies inside the unit ball")
    return BlochCoords(tau=max(tau, 1.0), direction=v / tau)

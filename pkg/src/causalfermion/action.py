"""Causal Lagrangian, causal action, boundedness functional and causal classes.

The non-trivial eigenvalues of a product ``x y`` coincide with the eigenvalues
of the ``2n x 2n`` matrix ``N_x V_x^* y V_x``, where ``x = V_x N_x V_x^*`` is the
restriction of ``x`` to its image.  Every routine below works with these small
reduced matrices; for a whole configuration the reduced matrix of the pair
``(i, j)`` is ``N_i G_ij N_j G_ij^*`` with overlaps ``G_ij = V_i^* V_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EigensolverFailure
from .operators import CausalClass, Configuration, OperatorPoint

# |lambda| below this counts as an exactly vanishing product x y
ZERO_TOL = 1e-14
# relative modulus spread below which eigenvalues share one absolute value (n >= 2)
EQUAL_MODULUS_RTOL = 1e-8
# relative imaginary part below which an eigenvalue is real (n >= 2)
REAL_RTOL = 1e-8
# |disc| / scale below which an n = 1 pair sits on the light cone
LIGHTLIKE_RTOL = 1e-12

CLASSIFICATION_TOLERANCES = {
    "zero_tol": ZERO_TOL,
    "equal_modulus_rtol": EQUAL_MODULUS_RTOL,
    "real_rtol": REAL_RTOL,
    "lightlike_rtol_n1": LIGHTLIKE_RTOL,
}


@dataclass(frozen=True)
class ProductSpectrum:
    eigenvalues: np.ndarray
    causal_class: CausalClass


@dataclass(frozen=True)
class ActionReport:
    action: float
    boundedness: float
    pair_lagrangians: np.ndarray
    class_matrix: np.ndarray
    metadata: dict = field(default_factory=lambda: dict(CLASSIFICATION_TOLERANCES))

    def class_counts(self) -> dict[str, int]:
        """Counts of each causal class over ordered pairs of distinct points."""
        m = self.class_matrix.shape[0]
        off = ~np.eye(m, dtype=bool)
        return {c.value: int(np.sum(self.class_matrix[off] == c.value)) for c in CausalClass}


def _check_pair(x: OperatorPoint, y: OperatorPoint) -> None:
    if (x.n, x.f) != (y.n, y.f):
        raise ValueError(f"points have different (n, f): {(x.n, x.f)} vs {(y.n, y.f)}")


def reduced_matrix(x: OperatorPoint, y: OperatorPoint) -> np.ndarray:
    """``N_x V_x^* y V_x``; its spectrum is the non-trivial spectrum of ``x y``."""
    v, nu = x.image_basis()
    return nu[:, None] * (v.conj().T @ y.matrix @ v)


def _eigvals(mats: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvals(mats)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc


def _pad(eigs: np.ndarray, size: int) -> np.ndarray:
    if eigs.shape[-1] == size:
        return eigs
    pad = [(0, 0)] * (eigs.ndim - 1) + [(0, size - eigs.shape[-1])]
    return np.pad(eigs, pad)


def product_spectrum(x: OperatorPoint, y: OperatorPoint) -> ProductSpectrum:
    """Non-trivial eigenvalues of ``x y``, zero-padded to length ``2n``."""
    _check_pair(x, y)
    mat = reduced_matrix(x, y)
    eigs = _pad(_eigvals(mat), 2 * x.n)
    if x.n == 1:
        t = np.trace(mat)
        q = np.trace(mat @ mat)
        cls = _classify_n1(np.real(t), np.real(q))
    else:
        cls = _classify_spectrum(eigs)
    order = np.lexsort((-eigs.imag, -np.abs(eigs)))
    return ProductSpectrum(eigenvalues=eigs[order], causal_class=cls)


def lagrangian_from_spectrum(eigenvalues, n: int) -> float:
    """``(1/4n) sum_ij (|l_i| - |l_j|)^2`` over the padded spectrum."""
    a = np.abs(np.asarray(eigenvalues))
    return float(np.sum((a[:, None] - a[None, :]) ** 2) / (4 * n))


def lagrangian(x: OperatorPoint, y: OperatorPoint) -> float:
    spec = product_spectrum(x, y)
    return lagrangian_from_spectrum(spec.eigenvalues, x.n)


def lagrangian_n1_closed(x: OperatorPoint, y: OperatorPoint) -> float:
    """Trace form ``max(0, 2 tr((xy)^2) - tr(xy)^2) / 2``, valid for n = 1."""
    _check_pair(x, y)
    if x.n != 1:
        raise ValueError("the trace form of the Lagrangian requires n = 1")
    p = x.matrix @ y.matrix
    t = np.trace(p).real
    q = np.einsum("ab,ba->", p, p).real
    return 0.5 * max(0.0, 2.0 * q - t * t)


def critical_angles(tau: float, tau2: float) -> tuple[float, float]:
    """Angles bounding the spacelike interval of two f = 2 points.

    ``cos(theta_-/+) = (-1 +/- sqrt((tau^2-1)(tau2^2-1))) / (tau tau2)``.
    """
    root = np.sqrt(max((tau * tau - 1.0) * (tau2 * tau2 - 1.0), 0.0))
    c_minus = np.clip((-1.0 + root) / (tau * tau2), -1.0, 1.0)
    c_plus = np.clip((-1.0 - root) / (tau * tau2), -1.0, 1.0)
    return float(np.arccos(c_minus)), float(np.arccos(c_plus))


def f2_discriminant(tau: float, tau2: float, theta: float) -> float:
    return (1.0 + tau * tau2 * np.cos(theta)) ** 2 - (tau * tau - 1.0) * (tau2 * tau2 - 1.0)


def lagrangian_f2_angles(tau: float, tau2: float, theta: float) -> float:
    """Lagrangian of two f = 2 points in Bloch coordinates."""
    lo, hi = critical_angles(tau, tau2)
    if lo <= theta <= hi:
        return 0.0
    return max(0.0, f2_discriminant(tau, tau2, theta) / 8.0)


def boundedness_f2_trivial(tau: float, m: int) -> float:
    """Boundedness functional of an equal-weight causally trivial sphere of radius tau."""
    return (tau * tau - 1.0) ** 2 / 4.0 + tau * tau / m


# --- classification -------------------------------------------------------


def _classify_n1(t, q):
    """Classify n = 1 pairs from ``t = tr M`` and ``q = tr M^2`` (arrays allowed).

    The sign of ``q - t^2/2 = (l1 - l2)^2 / 2`` separates conjugate pairs
    (spacelike) from distinct real eigenvalues (timelike); a degenerate
    eigenvalue is the light-cone boundary.
    """
    t = np.asarray(t, dtype=float)
    q = np.asarray(q, dtype=float)
    disc = q - 0.5 * t * t
    det = 0.5 * (t * t - q)
    scale = np.maximum(0.25 * t * t, np.abs(det))
    zero = scale <= ZERO_TOL**2
    rel = np.where(zero, 0.0, 2.0 * disc / np.where(zero, 1.0, scale))
    out = np.where(
        zero | (rel < -LIGHTLIKE_RTOL),
        CausalClass.SPACELIKE.value,
        np.where(rel > LIGHTLIKE_RTOL, CausalClass.TIMELIKE.value, CausalClass.LIGHTLIKE.value),
    )
    return CausalClass(str(out)) if out.ndim == 0 else out


def _classify_spectrum(eigs: np.ndarray) -> CausalClass:
    mod = np.abs(eigs)
    r = float(mod.max())
    if r <= ZERO_TOL:
        return CausalClass.SPACELIKE
    is_real = bool(np.all(np.abs(eigs.imag) <= REAL_RTOL * r))
    if (r - mod.min()) / r < EQUAL_MODULUS_RTOL:
        # one repeated real eigenvalue is the boundary of the spacelike region
        if is_real and np.ptp(eigs.real) / r < EQUAL_MODULUS_RTOL:
            return CausalClass.LIGHTLIKE
        return CausalClass.SPACELIKE
    return CausalClass.TIMELIKE if is_real else CausalClass.LIGHTLIKE


def classify(x: OperatorPoint, y: OperatorPoint) -> CausalClass:
    return product_spectrum(x, y).causal_class


# --- whole configurations -------------------------------------------------


def pair_matrices(v: np.ndarray, nu: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Overlaps ``G`` (m, m, k, k) and reduced products ``M`` (m, m, k, k)."""
    g = np.einsum("iak,jal->ijkl", v.conj(), v)
    gn = g * nu[None, :, None, :]
    mats = nu[:, None, :, None] * (gn @ np.swapaxes(g.conj(), -1, -2))
    return g, mats


def n1_traces(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t = np.trace(mats, axis1=-2, axis2=-1).real
    q = np.einsum("...ab,...ba->...", mats, mats).real
    return t, q


def _batched_spectra(mats: np.ndarray, n: int) -> np.ndarray:
    try:
        eigs = np.linalg.eigvals(mats)
    except np.linalg.LinAlgError:
        for idx in np.ndindex(mats.shape[:2]):
            try:
                np.linalg.eigvals(mats[idx])
            except np.linalg.LinAlgError as exc:
                raise EigensolverFailure(str(exc), pair=tuple(int(i) for i in idx)) from exc
        raise
    return _pad(eigs, 2 * n)


def pair_terms(v: np.ndarray, nu: np.ndarray, n: int):
    """Lagrangians, ``(sum |l|)^2`` terms and class codes for all ordered pairs."""
    _, mats = pair_matrices(v, nu)
    if n == 1:
        t, q = n1_traces(mats)
        disc = q - 0.5 * t * t
        lag = np.maximum(disc, 0.0)
        det = 0.5 * (t * t - q)
        bound = np.where(disc >= 0.0, t * t, 4.0 * np.maximum(det, 0.0))
        classes = _classify_n1(t, q)
    else:
        eigs = _batched_spectra(mats, n)
        a = np.abs(eigs)
        s = a.sum(axis=-1)
        lag = np.maximum(np.sum(a * a, axis=-1) - s * s / (2 * n), 0.0)
        bound = s * s
        m = mats.shape[0]
        classes = np.empty((m, m), dtype=object)
        for i in range(m):
            for j in range(m):
                classes[i, j] = _classify_spectrum(eigs[i, j]).value
    lag = 0.5 * (lag + lag.T)
    return lag, bound, np.asarray(classes, dtype=object)


def causal_action(config: Configuration) -> ActionReport:
    """Causal action and boundedness functional of a weighted counting measure."""
    v, nu = config.spin_spaces()
    lag, bound, classes = pair_terms(v, nu, config.n)
    c = config.weights
    w = np.outer(c, c)
    return ActionReport(
        action=float(np.sum(w * lag)),
        boundedness=float(np.sum(w * bound)),
        pair_lagrangians=lag,
        class_matrix=classes,
    )

"""Unconstrained real parameters for weighted counting measures.

Each point ``x_i`` is built from

* a softmax logit ``c_tilde[i]`` for its weight,
* log-moduli ``mu_plus[i]``, ``mu_minus[i]`` of its ``n`` positive and ``n``
  negative eigenvalues, normalized so that the trace is one,
* complex generators ``b1[i]`` (2n x 2n) and ``b2[i]`` (2n x (f - 2n)) of the
  unitary ``U_i = exp(-i H_i)`` that rotates ``diag(nu_i, 0, ..., 0)``.

The flat vector layout is: ``c_tilde``, ``mu_plus`` (row-major), ``mu_minus``,
then ``b1`` and ``b2`` row-major per point with real and imaginary parts
interleaved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateTrace, NonFinite, UnsupportedSpin
from .operators import Configuration, validate_point

GAMMA_TOL = 1e-12
MU0_FLOOR = 0.01


@dataclass(frozen=True, eq=False)
class UnconstrainedParams:
    c_tilde: np.ndarray
    mu_plus: np.ndarray
    mu_minus: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    shape: tuple[int, int, int]

    def __post_init__(self):
        n, f, m = self.shape
        if f < 2 * n:
            raise ValueError(f"need f >= 2n, got n={n}, f={f}")
        expected = {
            "c_tilde": (m,),
            "mu_plus": (m, n),
            "mu_minus": (m, n),
            "b1": (m, 2 * n, 2 * n),
            "b2": (m, 2 * n, f - 2 * n),
        }
        for name, shp in expected.items():
            dtype = complex if name.startswith("b") else float
            arr = np.asarray(getattr(self, name), dtype=dtype).reshape(shp)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.shape[0]

    @property
    def f(self) -> int:
        return self.shape[1]

    @property
    def m(self) -> int:
        return self.shape[2]

    @property
    def size(self) -> int:
        return dof(*self.shape).d_unconstrained

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            [
                self.c_tilde.ravel(),
                self.mu_plus.ravel(),
                self.mu_minus.ravel(),
                np.ascontiguousarray(self.b1).view(float).ravel(),
                np.ascontiguousarray(self.b2).view(float).ravel(),
            ]
        )

    @classmethod
    def from_vector(cls, vec, shape) -> "UnconstrainedParams":
        n, f, m = shape
        vec = np.asarray(vec, dtype=float)
        sizes = [m, m * n, m * n, m * 8 * n * n, m * 4 * n * (f - 2 * n)]
        if vec.shape != (sum(sizes),):
            raise ValueError(f"expected {sum(sizes)} parameters for shape {shape}, got {vec.shape}")
        parts = np.split(vec, np.cumsum(sizes)[:-1])
        b1 = np.ascontiguousarray(parts[3]).view(complex).reshape(m, 2 * n, 2 * n)
        b2 = np.ascontiguousarray(parts[4]).view(complex).reshape(m, 2 * n, f - 2 * n)
        return cls(parts[0], parts[1].reshape(m, n), parts[2].reshape(m, n), b1, b2, (n, f, m))


@dataclass(frozen=True)
class DofReport:
    d_unconstrained: int
    d_effective: int
    eliminated: int


def dof(n: int, f: int, m: int) -> DofReport:
    """Parameter counts: ``D = m(4fn + 2n + 1)`` and ``D' = m(4fn - 4n^2) - 1``."""
    if f < 2 * n:
        raise ValueError(f"need f >= 2n, got n={n}, f={f}")
    d = m * (4 * f * n + 2 * n + 1)
    d_eff = m * (4 * f * n - 4 * n * n) - 1
    return DofReport(d, d_eff, d - d_eff)


def default_mu0(n: int, m: int) -> float:
    """Initial spectral scale tuned to the discrete Dirac sphere of ``m`` points."""
    if n == 1:
        mu0 = 1.25 * (3**0.25 * np.sqrt(m / (2 * np.pi)) - 1.0)
    elif n == 2:
        mu0 = 0.25 * ((3 * m) ** 0.25 / np.sqrt(np.pi) - 1.0)
    else:
        raise UnsupportedSpin(f"no default mu0 for n={n}; pass mu0 explicitly")
    return float(max(mu0, MU0_FLOOR))


def init_random(shape, seed, sigma_c: float = 0.01, sigma_mu: float = 0.01, mu0: float | None = None):
    """Draw a random starting point.

    ``seed`` may be an integer or a ``numpy.random.Generator``.  When ``mu0`` is
    omitted the default for the spin dimension is used.
    """
    n, f, m = shape
    if mu0 is None:
        mu0 = default_mu0(n, m)
    if mu0 <= 0:
        raise ValueError("mu0 must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    c_tilde = rng.normal(1.0, sigma_c, size=m)
    mu_plus = rng.normal(np.log(mu0 + 1.0 / n), sigma_mu, size=(m, n))
    mu_minus = rng.normal(np.log(mu0), sigma_mu, size=(m, n))

    def uniform_complex(size):
        re = rng.uniform(-np.pi, np.pi, size=size)
        im = rng.uniform(-np.pi, np.pi, size=size)
        return re + 1j * im

    b1 = uniform_complex((m, 2 * n, 2 * n))
    b2 = uniform_complex((m, 2 * n, f - 2 * n))
    return UnconstrainedParams(c_tilde, mu_plus, mu_minus, b1, b2, (n, f, m))


def hermitian_generator(b1: np.ndarray, b2: np.ndarray) -> np.ndarray:
    """``H = [[H1, B2], [B2^*, 0]]`` with ``H1 = B1 + B1^*`` off the diagonal.

    Works on single generators and on stacks along a leading axis.
    """
    k = b1.shape[-1]
    f = k + b2.shape[-1]
    h1 = b1 + np.swapaxes(b1.conj(), -1, -2)
    h1 = h1 * (1.0 - np.eye(k))
    h = np.zeros(b1.shape[:-2] + (f, f), dtype=complex)
    h[..., :k, :k] = h1
    h[..., :k, k:] = b2
    h[..., k:, :k] = np.swapaxes(b2.conj(), -1, -2)
    return h


def unitary_from_generator(b1, b2) -> np.ndarray:
    """``exp(-i H)`` through the eigendecomposition of the Hermitian generator."""
    h = hermitian_generator(np.asarray(b1, dtype=complex), np.asarray(b2, dtype=complex))
    evals, q = np.linalg.eigh(h)
    return (q * np.exp(-1j * evals)[..., None, :]) @ np.swapaxes(q.conj(), -1, -2)


class Decoded(NamedTuple):
    """Intermediate arrays of :func:`decode`, kept for differentiation."""

    weights: np.ndarray  # (m,)
    nu: np.ndarray  # (m, 2n): positive eigenvalues first
    exp_pos: np.ndarray  # (m, n) moduli after the sign flip
    exp_neg: np.ndarray
    gamma: np.ndarray  # (m,) positive normalization
    flipped: np.ndarray  # (m,) bool
    h_evals: np.ndarray  # (m, f)
    h_evecs: np.ndarray  # (m, f, f)
    unitaries: np.ndarray  # (m, f, f)


def decode_arrays(params: UnconstrainedParams) -> Decoded:
    vec = params.to_vector()
    if not np.all(np.isfinite(vec)):
        raise NonFinite("parameters contain non-finite entries")
    ct = params.c_tilde
    e = np.exp(ct - ct.max())
    weights = e / e.sum()

    ep = np.exp(params.mu_plus)
    em = np.exp(params.mu_minus)
    gamma = ep.sum(axis=1) - em.sum(axis=1)
    flipped = gamma < 0
    for i in np.flatnonzero(np.abs(gamma) < GAMMA_TOL):
        raise DegenerateTrace(int(i), float(gamma[i]))
    exp_pos = np.where(flipped[:, None], em, ep)
    exp_neg = np.where(flipped[:, None], ep, em)
    gamma = np.abs(gamma)
    nu = np.concatenate([exp_pos, -exp_neg], axis=1) / gamma[:, None]

    h = hermitian_generator(params.b1, params.b2)
    h_evals, h_evecs = np.linalg.eigh(h)
    unitaries = (h_evecs * np.exp(-1j * h_evals)[:, None, :]) @ np.swapaxes(h_evecs.conj(), -1, -2)
    return Decoded(weights, nu, exp_pos, exp_neg, gamma, flipped, h_evals, h_evecs, unitaries)


def operators_from_arrays(nu: np.ndarray, unitaries: np.ndarray) -> np.ndarray:
    k = nu.shape[1]
    v = unitaries[:, :, :k]
    return (v * nu[:, None, :]) @ np.swapaxes(v.conj(), -1, -2)


def decode(params: UnconstrainedParams) -> Configuration:
    """Map unconstrained parameters to a valid :class:`Configuration`."""
    dec = decode_arrays(params)
    mats = operators_from_arrays(dec.nu, dec.unitaries)
    return Configuration(tuple(validate_point(a, params.n) for a in mats), dec.weights)

"""Causal action as a function of unconstrained parameters, and its gradient.

The gradient is a hand-written reverse pass through the same steps as the
forward evaluation:

    softmax -> weights c
    log-moduli -> spectra nu
    generators B1, B2 -> H -> U = exp(-iH) -> spin bases V
    overlaps G_ij = V_i^* V_j -> reduced products M_ij -> pair Lagrangians

Each pair Lagrangian has a differential of the form ``Re tr(K dM)``.  For
``n = 1`` it is ``K = 2M - tr(M)`` on the timelike side and zero otherwise.  For
larger ``n``, ``K = W diag(a) W^{-1}`` from the eigendecomposition
``M = W diag(l) W^{-1}`` with ``a_k = conj(l_k) (2 - sum|l| / (n |l_k|))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .action import LIGHTLIKE_RTOL, ZERO_TOL, _batched_spectra, n1_traces, pair_matrices
from .errors import EigensolverFailure
from .parametrize import Decoded, UnconstrainedParams, decode_arrays

# eigenvalues closer than this (relative) share an averaged derivative
DEGENERACY_TOL = 1e-10
# pairs closer than this (relative) to a causal boundary make FD checks unreliable
SMOOTH_MARGIN = 1e-6
# entries per chunk of pair matrices; bounds memory for large m
_CHUNK_ENTRIES = 1 << 22


@dataclass(frozen=True)
class GradCheckReport:
    max_rel_error: float
    worst_index: int
    step: float
    smooth: bool


def _row_chunks(m: int, k: int):
    rows = max(1, _CHUNK_ENTRIES // max(1, m * k * k))
    for start in range(0, m, rows):
        yield slice(start, min(m, start + rows))


def _pair_block(vi, nui, v, nu, n, need_k: bool):
    """Lagrangians (and their K matrices) of rows ``i`` against all points."""
    g = np.einsum("iak,jal->ijkl", vi.conj(), v)
    mats = nui[:, None, :, None] * ((g * nu[None, :, None, :]) @ np.swapaxes(g.conj(), -1, -2))
    k = mats.shape[-1]
    if n == 1:
        t, q = n1_traces(mats)
        disc = q - 0.5 * t * t
        lag = np.maximum(disc, 0.0)
        if not need_k:
            return lag, g, None
        kmat = 2.0 * mats - t[..., None, None] * np.eye(k)
        kmat = np.where((disc > 0.0)[..., None, None], kmat, 0.0)
        return lag, g, kmat
    if not need_k:
        eigs = _batched_spectra(mats, n)
        a = np.abs(eigs)
        s = a.sum(axis=-1)
        return np.maximum(np.sum(a * a, axis=-1) - s * s / (2 * n), 0.0), g, None
    try:
        lam, w = np.linalg.eig(mats)
        winv = np.linalg.inv(w)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    mod = np.abs(lam)
    s = mod.sum(axis=-1)
    lag = np.maximum(np.sum(mod * mod, axis=-1) - s * s / (2 * n), 0.0)
    safe = np.where(mod > ZERO_TOL, mod, 1.0)
    phase = np.where(mod > ZERO_TOL, lam.conj() / safe, 0.0)
    a = 2.0 * lam.conj() - (s[..., None] / n) * phase
    # average over numerically degenerate clusters
    scale = np.maximum(mod.max(axis=-1), 1.0)[..., None, None]
    close = np.abs(lam[..., :, None] - lam[..., None, :]) <= DEGENERACY_TOL * scale
    a = np.einsum("...kl,...l->...k", close, a) / close.sum(axis=-1)
    kmat = (w * a[..., None, :]) @ winv
    return lag, g, kmat


def _arrays_action(dec: Decoded, n: int) -> tuple[float, np.ndarray]:
    k = 2 * n
    v = dec.unitaries[:, :, :k]
    m = v.shape[0]
    lag = np.empty((m, m))
    for rows in _row_chunks(m, k):
        lag[rows], _, _ = _pair_block(v[rows], dec.nu[rows], v, dec.nu, n, need_k=False)
    lag = 0.5 * (lag + lag.T)
    c = dec.weights
    return float(c @ lag @ c), lag


def action_of_params(params: UnconstrainedParams) -> float:
    """Causal action of the decoded configuration."""
    value, _ = _arrays_action(decode_arrays(params), params.n)
    return value


def value_and_grad(params: UnconstrainedParams) -> tuple[float, np.ndarray]:
    """Action and its gradient as a flat vector in the parameter layout."""
    n, f, m = params.shape
    k = 2 * n
    dec = decode_arrays(params)
    u = dec.unitaries
    v = u[:, :, :k]
    nu = dec.nu
    c = dec.weights

    lag = np.empty((m, m))
    nu_bar = np.zeros((m, k))
    v_bar = np.zeros((m, f, k), dtype=complex)
    for rows in _row_chunks(m, k):
        lag_r, g, kmat = _pair_block(v[rows], nu[rows], v, nu, n, need_k=True)
        lag[rows] = lag_r
        # the ordered pair (i, j) carries weight c_i c_j
        kmat = kmat * (c[rows, None] * c[None, :])[..., None, None]
        gh = np.swapaxes(g.conj(), -1, -2)
        nj = nu[None, :, :, None]
        # d/d nu_i: diag(G N_j G^* K); d/d nu_j: diag(G^* K N_i G)
        gnj = g * nu[None, :, None, :]
        nu_bar[rows] += np.einsum("ijab,ijba->ia", gnj @ gh, kmat).real
        kni = kmat * nu[rows][:, None, None, :]
        nu_bar += np.einsum("ijab,ijba->ja", gh @ kni, g).real
        # G adjoint: A^* + B with A = N_j G^* K N_i, B = K N_i G N_j
        a = nj * (gh @ kni)
        b = kni @ gnj
        g_bar = np.swapaxes(a.conj(), -1, -2) + b
        v_bar += np.einsum("iak,ijkl->jal", v[rows], g_bar)
        v_bar[rows] += np.einsum("jal,ijkl->iak", v, g_bar.conj())
    lag = 0.5 * (lag + lag.T)
    value = float(c @ lag @ c)

    # weights through the softmax
    c_bar = 2.0 * lag @ c
    ct_bar = c * (c_bar - c @ c_bar)

    # spectra through the trace normalization
    gam = dec.gamma[:, None]
    dot = np.sum(nu_bar * nu, axis=1, keepdims=True)
    pos_bar = dec.exp_pos / gam * (nu_bar[:, :n] - dot)
    neg_bar = dec.exp_neg / gam * (dot - nu_bar[:, n:])
    flip = dec.flipped[:, None]
    mup_bar = np.where(flip, neg_bar, pos_bar)
    mum_bar = np.where(flip, pos_bar, neg_bar)

    # unitaries through exp(-iH) = Q diag(exp(-i e)) Q^*
    u_bar = np.zeros((m, f, f), dtype=complex)
    u_bar[:, :, :k] = v_bar
    q = dec.h_evecs
    e = dec.h_evals
    qh = np.swapaxes(q.conj(), -1, -2)
    z = qh @ u_bar @ q
    diff = e[:, :, None] - e[:, None, :]
    mean = 0.5 * (e[:, :, None] + e[:, None, :])
    divided = -1j * np.exp(-1j * mean) * np.sinc(diff / (2 * np.pi))
    h_bar = q @ (divided.conj() * z) @ qh

    h1_bar = h_bar[:, :k, :k]
    b1_bar = (h1_bar + np.swapaxes(h1_bar.conj(), -1, -2)) * (1.0 - np.eye(k))
    b2_bar = h_bar[:, :k, k:] + np.swapaxes(h_bar[:, k:, :k].conj(), -1, -2)

    grad = np.concatenate(
        [
            ct_bar,
            mup_bar.ravel(),
            mum_bar.ravel(),
            np.ascontiguousarray(b1_bar).view(float).ravel(),
            np.ascontiguousarray(b2_bar).view(float).ravel(),
        ]
    )
    return value, grad


def grad(params: UnconstrainedParams) -> np.ndarray:
    """Gradient of :func:`action_of_params`.

    At a kink of ``max(0, .)`` the derivative from the vanishing side is used.
    """
    return value_and_grad(params)[1]


class ActionObjective:
    """Objective and gradient on flat vectors for a fixed shape, sharing one evaluation."""

    def __init__(self, shape):
        self.shape = tuple(shape)
        self._x = None
        self._cache = None
        self.evaluations = 0

    def _eval(self, x):
        x = np.asarray(x, dtype=float)
        if self._x is None or not np.array_equal(x, self._x):
            self._cache = value_and_grad(UnconstrainedParams.from_vector(x, self.shape))
            self._x = x.copy()
            self.evaluations += 1
        return self._cache

    def value(self, x) -> float:
        return self._eval(x)[0]

    def gradient(self, x) -> np.ndarray:
        return self._eval(x)[1].copy()


def boundary_margin(params: UnconstrainedParams) -> float:
    """Smallest relative distance of any pair of distinct points to a causal boundary."""
    n = params.n
    dec = decode_arrays(params)
    k = 2 * n
    v = dec.unitaries[:, :, :k]
    _, mats = pair_matrices(v, dec.nu)
    m = params.m
    off = ~np.eye(m, dtype=bool)
    if n == 1:
        t, q = n1_traces(mats)
        disc = q - 0.5 * t * t
        det = 0.5 * (t * t - q)
        scale = np.maximum(np.maximum(0.25 * t * t, np.abs(det)), ZERO_TOL**2)
        rel = np.abs(2.0 * disc / scale)
        return float(rel[off].min()) if off.any() else np.inf
    eigs = _batched_spectra(mats, n)[off]
    mod = np.abs(eigs)
    r = np.maximum(mod.max(axis=-1), ZERO_TOL)
    spread = (mod.max(axis=-1) - mod.min(axis=-1)) / r
    gaps = np.where(np.eye(k, dtype=bool), np.inf, np.abs(eigs[:, :, None] - eigs[:, None, :]))
    gap = gaps.min(axis=(-1, -2)) / r
    return float(np.minimum(spread, gap).min()) if len(r) else np.inf


def fd_check(
    params,
    step: float = 1e-5,
    fun: Callable | None = None,
    jac: Callable | None = None,
) -> GradCheckReport:
    """Compare the gradient with central differences coordinate by coordinate.

    By default checks the causal action at ``params``.  Passing ``fun`` and
    ``jac`` (callables on flat vectors) checks an arbitrary function at the
    vector ``params`` instead.  The relative error of component ``i`` is
    ``|fd_i - g_i| / max(|g_i|, |fd_i|, floor)`` where the floor
    ``max(1e-6, 1e-4 max_j |g_j|)`` keeps round-off in vanishing components
    from dominating.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if fun is None:
        shape = params.shape
        x0 = params.to_vector()

        def fun(x):
            return action_of_params(UnconstrainedParams.from_vector(x, shape))

        g = grad(params)
        margin = boundary_margin(params)
        smooth = margin > SMOOTH_MARGIN and margin > LIGHTLIKE_RTOL
    else:
        x0 = np.asarray(params, dtype=float)
        g = np.asarray(jac(x0), dtype=float)
        smooth = True
    fd = np.empty_like(x0)
    for i in range(x0.size):
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += step
        xm[i] -= step
        fd[i] = (fun(xp) - fun(xm)) / (2 * step)
    floor = max(1e-6, 1e-4 * float(np.max(np.abs(g), initial=0.0)))
    denom = np.maximum(np.maximum(np.abs(g), np.abs(fd)), floor)
    rel = np.abs(fd - g) / denom
    worst = int(np.argmax(rel)) if rel.size else 0
    return GradCheckReport(
        max_rel_error=float(rel[worst]) if rel.size else 0.0,
        worst_index=worst,
        step=float(step),
        smooth=bool(smooth),
    )


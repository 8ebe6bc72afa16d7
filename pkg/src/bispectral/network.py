"""Bispectral network: a learnable linear map followed by a fixed triple-product head.

For a weight matrix ``W`` with rows ``W_i`` and an input ``x`` the network
computes, for every ``i <= j``::

    beta_ij(x) = (W_i . x) (W_j . x) conj((W_i * W_j) . x)

and divides the stacked vector by its Euclidean norm.  When ``W`` is a
unit-normalized character table this is the analytic bispectrum up to a
positive constant.

Gradients follow the Wirtinger convention: for a real loss ``L`` and a complex
parameter ``w`` the returned quantity is ``dL/d conj(w)``, so that
``dL/dRe(w) + 1j * dL/dIm(w) == 2 * dL/d conj(w)`` and ``-dL/d conj(w)`` is a
descent direction.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateInputError, DomainError, NumericError

__all__ = [
    "NORM_EPS",
    "LossValue",
    "init_weights",
    "normalize_rows",
    "check_weights",
    "forward_linear",
    "bispectral_products",
    "forward",
    "orbit_separation_loss",
    "loss_and_gradient",
    "loss_gradient",
    "output_and_input_gradient",
]

# added under the square root of every output norm during optimization
NORM_EPS = 1e-12
# reconstruction residuals this small relative to the input are roundoff; the
# norm is not differentiable there and the minimum-norm subgradient is zero
RECON_FLOOR = 1e-10


def init_weights(n, rng=None) -> np.ndarray:
    """Random unitary ``n x n`` matrix (QR of a complex Gaussian) with unit rows."""
    rng = np.random.default_rng(rng)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    # fix the phase ambiguity of QR so the draw is Haar distributed
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return normalize_rows(q)


def normalize_rows(W) -> np.ndarray:
    W = np.asarray(W, dtype=complex)
    norms = np.linalg.norm(W, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise DegenerateInputError("cannot normalize a weight matrix with a zero row")
    return W / norms


def check_weights(W, n_features=None) -> np.ndarray:
    W = np.asarray(W, dtype=complex)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise DomainError(f"weights must be a square matrix, got shape {W.shape}")
    if n_features is not None and W.shape[1] != n_features:
        raise DomainError(f"weights act on {W.shape[1]} features, input has {n_features}")
    return W


def _check_input(W, x):
    W = check_weights(W)
    x = np.asarray(x)
    if x.ndim == 0 or x.shape[-1] != W.shape[1]:
        raise DomainError(
            f"input length {x.shape[-1] if x.ndim else 0} does not match weights {W.shape}"
        )
    return W, x


def forward_linear(W, x) -> np.ndarray:
    """``z = W x`` for a single signal or a batch of row signals."""
    W, x = _check_input(W, x)
    return x @ W.T


def _pair_products(W, X):
    """``P[b, i, j] = (W_i * W_j) . X[b]``."""
    return np.einsum("ik,jk,bk->bij", W, W, X, optimize=True)


def _forward_batch(W, X):
    iu, ju = np.triu_indices(W.shape[0])
    Z = X @ W.T
    P = _pair_products(W, X)[:, iu, ju]
    beta = Z[:, iu] * Z[:, ju] * P.conj()
    return Z, P, beta


def bispectral_products(W, x) -> np.ndarray:
    """Unnormalized outputs ``beta_ij`` for ``i <= j`` (``numpy.triu_indices`` order)."""
    W, x = _check_input(W, x)
    X = np.atleast_2d(x)
    beta = _forward_batch(W, X)[2]
    return beta if x.ndim > 1 else beta[0]


def forward(W, x) -> np.ndarray:
    """Network output: the triple products scaled to unit norm.

    Raises :class:`DegenerateInputError` when every triple product vanishes.
    """
    beta = bispectral_products(W, x)
    norm = np.linalg.norm(beta, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise DegenerateInputError(
            "input is annihilated by every row and row product; output cannot be normalized"
        )
    return beta / norm


@dataclass(frozen=True)
class LossValue:
    total: float
    orbit: float
    reconstruction: float
    n_samples: int


def _symmetric(values, n):
    # packed upper triangle -> full square with the diagonal counted twice
    iu, ju = np.triu_indices(n)
    out = np.zeros(values.shape[:-1] + (n, n), dtype=values.dtype)
    out[..., iu, ju] = values
    out[..., ju, iu] += values
    return out


def _finite(name, value):
    if not np.all(np.isfinite(value)):
        raise NumericError(f"non-finite value in {name}")


def _class_groups(labels):
    labels = np.asarray(labels)
    order = np.argsort(labels, kind="stable")
    uniq, starts = np.unique(labels[order], return_index=True)
    return np.split(order, starts[1:])


def _orbit_term(out, labels, need_grad):
    """Sum over ordered same-class pairs of output distances, and its gradient."""
    total = 0.0
    grad = np.zeros_like(out) if need_grad else None
    for idx in _class_groups(labels):
        if idx.size < 2:
            continue
        diff = out[idx, None, :] - out[None, idx, :]
        dist = np.sqrt(np.einsum("abm,abm->ab", diff.conj(), diff).real)
        total += dist.sum()
        if need_grad:
            with np.errstate(divide="ignore", invalid="ignore"):
                w = np.where(dist > 0, 1.0 / dist, 0.0)
            # both (a, b) and (b, a) contribute (u - v) / (2 d)
            grad[idx] = np.einsum("ab,abm->am", w, diff)
    return total, grad


def _validate_batch(W, X, labels):
    W, X = _check_input(W, X)
    X = np.atleast_2d(X)
    labels = np.asarray(labels)
    if labels.shape != (X.shape[0],):
        raise DomainError(f"{labels.shape[0]} labels for {X.shape[0]} samples")
    if X.shape[0] == 0:
        raise DomainError("empty batch")
    return W, X, labels


def loss_and_gradient(W, X, labels, gamma=0.1, need_grad=True, eps=NORM_EPS):
    """Orbit Separation Loss on a batch and its gradient ``dL/d conj(W)``.

    The first term sums ``||out(x_a) - out(x_b)||`` over ordered pairs of distinct
    samples sharing a label; the second sums ``||x_a - W^H W x_a||`` weighted by
    ``gamma``.  Returns ``(LossValue, grad)`` with ``grad`` ``None`` when
    ``need_grad`` is false.
    """
    W, X, labels = _validate_batch(W, X, labels)
    n = W.shape[0]
    with np.errstate(over="ignore", invalid="ignore"):
        Z, P, beta = _forward_batch(W, X)
    # overflow surfaces here as a NumericError rather than a warning
    _finite("triple products", beta)
    scale = np.sqrt(np.einsum("bm,bm->b", beta.conj(), beta).real + eps)
    out = beta / scale[:, None]

    orbit, g_out = _orbit_term(out, labels, need_grad)

    recon_vec = X - Z @ W.conj()
    recon_norm = np.linalg.norm(recon_vec, axis=1)
    recon = float(recon_norm.sum())
    value = LossValue(float(orbit + gamma * recon), float(orbit), recon, X.shape[0])
    _finite("loss", value.total)
    if not need_grad:
        return value, None

    # normalization
    a = np.einsum("bm,bm->b", g_out.conj(), beta).real
    g_beta = g_out / scale[:, None] - (a / scale**3)[:, None] * beta
    iu, ju = np.triu_indices(n)
    g_p = g_beta.conj() * Z[:, iu] * Z[:, ju]
    g_z = np.einsum("bij,bj->bi", _symmetric(P * g_beta, n), Z.conj())
    grad = g_z.T @ X.conj()
    grad += np.einsum("bij,jk,bk->ik", _symmetric(g_p, n), W.conj(), X.conj(), optimize=True)

    if gamma:
        with np.errstate(divide="ignore", invalid="ignore"):
            live = recon_norm > RECON_FLOOR * np.linalg.norm(X, axis=1)
            g_r = np.where(live[:, None], recon_vec / (2 * recon_norm[:, None]), 0.0)
        grad -= gamma * (Z.T @ g_r.conj() + (g_r @ W.T).T @ X.conj())

    _finite("gradient", grad)
    return value, grad


def orbit_separation_loss(W, X, labels, gamma=0.1) -> float:
    return loss_and_gradient(W, X, labels, gamma, need_grad=False)[0].total


def loss_gradient(W, X, labels, gamma=0.1) -> np.ndarray:
    return loss_and_gradient(W, X, labels, gamma)[1]


def output_and_input_gradient(W, X, g_out_fn, eps=NORM_EPS):
    """Normalized outputs for a batch of inputs and ``dL/d conj(x)`` for each.

    ``g_out_fn(out)`` must return ``dL/d conj(out)`` with the same shape as
    ``out``; it returns ``(loss_values, g_out)``.
    """
    W, X = _check_input(W, X)
    X = np.atleast_2d(X)
    n = W.shape[0]
    Z, P, beta = _forward_batch(W, X)
    scale = np.sqrt(np.einsum("bm,bm->b", beta.conj(), beta).real + eps)
    out = beta / scale[:, None]
    loss, g_out = g_out_fn(out)
    a = np.einsum("bm,bm->b", g_out.conj(), beta).real
    g_beta = g_out / scale[:, None] - (a / scale**3)[:, None] * beta
    iu, ju = np.triu_indices(n)
    g_p = g_beta.conj() * Z[:, iu] * Z[:, ju]
    g_z = np.einsum("bij,bj->bi", _symmetric(P * g_beta, n), Z.conj())
    g_x = g_z @ W.conj() + g_p @ (W[iu] * W[ju]).conj()
    return out, loss, g_x

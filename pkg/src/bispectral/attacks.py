"""Adversarial inversion: optimize random inputs to reproduce a target's output.

A complete invariant should only let candidates converge onto the target's
orbit (up to a positive scalar, since outputs are normalized).  The power
spectrum ablation shows what happens with an incomplete one.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, DomainError
from .groups import FiniteAbelianGroup
from .network import NORM_EPS, check_weights, output_and_input_gradient
from .optim import ComplexAdam
from .spectral import scaled_orbit_distance

__all__ = [
    "REPRESENTATIONS",
    "AttackConfig",
    "AttackResult",
    "attack",
    "representation",
    "objective_and_gradient",
]

REPRESENTATIONS = ("bispectrum", "power_spectrum")


@dataclass
class AttackConfig:
    lr: float = 0.1
    max_iter: int = 20000
    tol: float = 1e-6
    plateau_patience: int = 10
    plateau_factor: float = 0.1
    plateau_threshold: float = 1e-4
    min_lr: float = 1e-10
    representation: str = "bispectrum"
    seed: int = 0

    def __post_init__(self):
        if self.representation not in REPRESENTATIONS:
            raise ConfigError(
                f"representation must be one of {REPRESENTATIONS}, got {self.representation!r}"
            )
        if self.lr <= 0 or self.max_iter < 0 or self.tol <= 0:
            raise ConfigError("lr and tol must be positive and max_iter non-negative")


def _power_output(W, X, target, eps=NORM_EPS):
    Z = X @ W.T
    q = (Z.conj() * Z).real
    scale = np.sqrt(np.sum(q * q, axis=1) + eps)
    out = q / scale[:, None]
    if target is None:
        return out, np.zeros(len(X)), np.zeros_like(X, dtype=complex)
    diff = out - target.real
    dist = np.linalg.norm(diff, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        g_out = np.where(dist[:, None] > 0, diff / dist[:, None], 0.0)
    # real gradient with respect to the unnormalized power spectrum
    g_q = (g_out - np.sum(g_out * out, axis=1, keepdims=True) * out) / scale[:, None]
    # q_i = z_i conj(z_i), so dL/d conj(z_i) = g_q_i z_i
    return out, dist, (g_q * Z) @ W.conj()


def _bispectral_output(W, X, target):
    def g_out_fn(out):
        if target is None:
            return np.zeros(out.shape[0]), np.zeros_like(out)
        diff = out - target
        dist = np.sqrt(np.sum((diff.conj() * diff).real, axis=1))
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(dist[:, None] > 0, diff / (2 * dist[:, None]), 0.0)
        return dist, g

    return output_and_input_gradient(W, X, g_out_fn)


def _evaluate(W, X, target, kind):
    if kind == "bispectrum":
        return _bispectral_output(W, X, target)
    if kind == "power_spectrum":
        return _power_output(W, X, target)
    raise ConfigError(f"unknown representation {kind!r}")


def representation(W, X, kind="bispectrum"):
    """Normalized network output (or normalized power spectrum of ``W x``)."""
    return _evaluate(W, np.atleast_2d(X), None, kind)[0]


def objective_and_gradient(W, X, target_out, kind="bispectrum"):
    """Per-candidate ``||out(x) - target_out||`` and its gradient for real inputs."""
    _, loss, g_x = _evaluate(W, np.atleast_2d(X), target_out, kind)
    # real inputs: dL/dx = 2 Re(dL/d conj(x))
    return loss, 2.0 * g_x.real


@dataclass
class AttackResult:
    target: np.ndarray
    candidates: np.ndarray
    initial_objectives: np.ndarray
    final_objectives: np.ndarray
    iterations: np.ndarray
    orbit_distances: np.ndarray = None
    best_scalars: np.ndarray = None
    failures: list = field(default_factory=list)
    tol: float = 1e-6

    @property
    def converged(self) -> np.ndarray:
        return self.final_objectives < self.tol

    def success_rate(self, distance_tol=1e-2) -> float:
        """Fraction of converged candidates that landed on the target's orbit."""
        if self.orbit_distances is None:
            raise ValueError("orbit distances were not computed (no group given)")
        conv = self.converged
        if not conv.any():
            return 0.0
        return float(np.mean(self.orbit_distances[conv] <= distance_tol))


def attack(W, target, num_candidates=100, cfg: AttackConfig = None, group: FiniteAbelianGroup = None, init=None):
    """Minimize ``||out(x) - out(target)||`` from random standard-normal starts.

    Every candidate has its own Adam state and plateau schedule; it stops once
    its objective falls below ``cfg.tol``.  The best iterate seen is reported,
    so final objectives never exceed initial ones.  When ``group`` is given,
    each candidate's distance to the target orbit is computed after the best
    positive rescaling.
    """
    cfg = cfg or AttackConfig()
    W = check_weights(W)
    target = np.asarray(target, dtype=float)
    n = W.shape[1]
    if target.shape != (n,):
        raise DomainError(f"target has shape {target.shape}, weights expect ({n},)")
    rng = np.random.default_rng(cfg.seed)
    if init is None:
        X = rng.standard_normal((num_candidates, n))
    else:
        X = np.array(init, dtype=float).reshape(-1, n)
        num_candidates = X.shape[0]

    target_out = representation(W, target[None, :], cfg.representation)[0]
    obj, grad = objective_and_gradient(W, X, target_out, cfg.representation)
    initial = obj.copy()
    best_obj = obj.copy()
    best_X = X.copy()
    iterations = np.zeros(num_candidates, dtype=int)
    active = np.isfinite(obj) & (obj >= cfg.tol)
    failures = [int(i) for i in np.flatnonzero(~np.isfinite(obj))]

    opt = ComplexAdam(cfg.lr)
    lr = np.full(num_candidates, cfg.lr)
    plateau_best = obj.copy()
    bad = np.zeros(num_candidates, dtype=int)
    for _ in range(cfg.max_iter):
        if not active.any():
            break
        # gradient of the real objective; ComplexAdam doubles Wirtinger gradients
        stepped = opt.step(X, grad / 2.0, lr[:, None])
        X = np.where(active[:, None], stepped, X)
        iterations += active
        obj, grad = objective_and_gradient(W, X, target_out, cfg.representation)

        bad_now = ~np.isfinite(obj) & active
        if bad_now.any():
            failures.extend(int(i) for i in np.flatnonzero(bad_now))
            active &= ~bad_now
        improved = active & (obj < best_obj)
        best_obj = np.where(improved, obj, best_obj)
        best_X[improved] = X[improved]

        better = obj < plateau_best * (1 - cfg.plateau_threshold)
        plateau_best = np.where(active & better, obj, plateau_best)
        bad = np.where(active & ~better, bad + 1, 0)
        reduce = bad > cfg.plateau_patience
        lr = np.where(reduce, np.maximum(lr * cfg.plateau_factor, cfg.min_lr), lr)
        bad[reduce] = 0
        active &= best_obj >= cfg.tol

    result = AttackResult(
        target=target,
        candidates=best_X,
        initial_objectives=initial,
        final_objectives=best_obj,
        iterations=iterations,
        failures=sorted(set(failures)),
        tol=cfg.tol,
    )
    if group is not None:
        if group.order != n:
            raise DomainError(f"group of order {group.order} does not match weights of size {n}")
        dists, scalars = [], []
        for x in best_X:
            d, c, _ = scaled_orbit_distance(x, target, group)
            dists.append(d)
            scalars.append(c)
        result.orbit_distances = np.array(dists)
        result.best_scalars = np.array(scalars)
    return result

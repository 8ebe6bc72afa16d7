"""Training loop for the bispectral network and post-training diagnostics."""

import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from .data import OrbitDataset, resolve_batch_shape, sample_batch
from .exceptions import ConfigError, DegenerateInputError, NumericError, TrainingError
from .groups import FiniteAbelianGroup, act_on_signal
from .network import init_weights, loss_and_gradient, normalize_rows
from .optim import ComplexAdam, triangular_lr

__all__ = [
    "LOG_COLUMNS",
    "TrainConfig",
    "TrainResult",
    "train",
    "EquivarianceReport",
    "equivariance_report",
    "invariance_error",
]

logger = logging.getLogger(__name__)

LOG_COLUMNS = ("epoch", "mean_loss", "mean_orbit_term", "mean_recon_term", "lr")


@dataclass
class TrainConfig:
    gamma: float = 1.0
    base_lr: float = 0.002
    min_lr: float = 1e-4
    max_lr: float = 5e-3
    lr_step_epochs: float = 10.0
    batch_size: int = 100
    # None: min(10, smallest class size)
    per_class: Optional[int] = None
    max_epochs: int = 2000
    plateau_patience: int = 50
    plateau_tol: float = 1e-6
    anneal_epochs: int = 50
    n_init: int = 1
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not 0 < self.min_lr <= self.base_lr <= self.max_lr:
            raise ConfigError(
                f"need 0 < min_lr <= base_lr <= max_lr, got "
                f"{self.min_lr}, {self.base_lr}, {self.max_lr}"
            )
        if self.batch_size < 1:
            raise ConfigError("batch_size must be positive")
        if self.per_class is not None and (self.per_class < 1 or self.batch_size % self.per_class):
            raise ConfigError(
                f"batch_size {self.batch_size} must be divisible by per_class {self.per_class}"
            )
        if self.gamma < 0:
            raise ConfigError("gamma must be non-negative")
        if self.max_epochs < 1 or self.n_init < 1:
            raise ConfigError("max_epochs and n_init must be at least 1")
        if self.lr_step_epochs <= 0:
            raise ConfigError("lr_step_epochs must be positive")

    @classmethod
    def from_dict(cls, values):
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in values.items():
            if key not in known:
                raise ConfigError(f"unknown training option {key!r}")
            kwargs[key] = value
        return cls(**kwargs)

    def to_dict(self):
        return asdict(self)


@dataclass
class TrainResult:
    weights: np.ndarray
    log: list
    converged: bool
    stop_reason: str
    init_index: int = 0
    restart_losses: list = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.log[-1]["mean_loss"]

    @property
    def n_epochs(self) -> int:
        return len(self.log)


def _as_arrays(dataset):
    if isinstance(dataset, OrbitDataset):
        return dataset.X, dataset.labels
    X, y = dataset
    return np.asarray(X), np.asarray(y)


def _initial_weights(W0, n, rng):
    if W0 is None:
        return init_weights(n, rng)
    W0 = np.array(W0, dtype=complex)
    if W0.shape != (n, n):
        raise ConfigError(f"initial weights have shape {W0.shape}, expected {(n, n)}")
    try:
        return normalize_rows(W0)
    except DegenerateInputError as exc:
        raise ConfigError(f"invalid initial weights: {exc}") from None


def _run(X, y, cfg, batch_size, per_class, W, init_index, callback):
    opt = ComplexAdam(cfg.base_lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    n_batches = max(1, len(X) // batch_size)
    log = []
    best = np.inf
    stale = 0
    converged = False
    stop_reason = "max_epochs"
    anneal_left = None
    epoch = 0
    while True:
        annealing = anneal_left is not None
        totals = np.zeros(3)
        lrs = []
        count = 0
        for b in range(n_batches):
            rng = np.random.default_rng([cfg.seed, init_index, epoch, b])
            idx = sample_batch(y, batch_size, per_class, rng)
            if annealing:
                lr = cfg.min_lr
            else:
                lr = triangular_lr(
                    epoch + b / n_batches, cfg.min_lr, cfg.max_lr, cfg.lr_step_epochs, cfg.base_lr
                )
            try:
                value, grad = loss_and_gradient(W, X[idx], y[idx], cfg.gamma)
                W_next = normalize_rows(opt.step(W, grad, lr))
                if not np.all(np.isfinite(W_next)):
                    raise NumericError("non-finite weights after update")
            except (NumericError, DegenerateInputError) as exc:
                raise TrainingError(
                    f"training diverged at epoch {epoch}, batch {b}: {exc}", checkpoint=W, log=log
                ) from exc
            W = W_next
            totals += (value.total, value.orbit, value.reconstruction)
            count += value.n_samples
            lrs.append(lr)
        mean_loss, mean_orbit, mean_recon = totals / count
        row = {
            "epoch": epoch,
            "mean_loss": float(mean_loss),
            "mean_orbit_term": float(mean_orbit),
            "mean_recon_term": float(mean_recon),
            "lr": float(np.mean(lrs)),
        }
        log.append(row)
        if callback is not None:
            callback(epoch, W, row)
        epoch += 1

        if annealing:
            anneal_left -= 1
            if anneal_left <= 0:
                break
            continue
        if best - mean_loss < cfg.plateau_tol:
            stale += 1
        else:
            stale = 0
        best = min(best, mean_loss)
        if stale >= cfg.plateau_patience:
            converged = True
            stop_reason = "plateau"
        if converged or epoch >= cfg.max_epochs:
            if cfg.anneal_epochs > 0:
                anneal_left = cfg.anneal_epochs
                continue
            break
    return TrainResult(W, log, converged, stop_reason, init_index)


def train(dataset, cfg: TrainConfig = None, W0=None, callback=None) -> TrainResult:
    """Fit network weights with the Orbit Separation Loss.

    ``dataset`` is an :class:`OrbitDataset` or an ``(X, labels)`` pair.  Adam
    runs under a triangular cyclic learning rate; every row of ``W`` is rescaled
    to unit norm after each step.  Training stops when the epoch-mean loss has
    improved by less than ``plateau_tol`` for ``plateau_patience`` epochs or at
    ``max_epochs``, then runs ``anneal_epochs`` more epochs at ``min_lr``.

    With ``n_init > 1`` independent initializations are trained and the one
    with the lowest final epoch-mean loss is returned.
    """
    cfg = cfg or TrainConfig()
    cfg.validate()
    X, y = _as_arrays(dataset)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ConfigError("training needs a non-empty 2-D array of signals")
    if y.shape != (X.shape[0],):
        raise ConfigError(f"{y.shape} labels for {X.shape[0]} signals")
    counts = np.bincount(np.unique(y, return_inverse=True)[1])
    if counts.size < 2 and counts.max() < 2:
        raise ConfigError("need at least two classes or two samples in a class")
    batch_size, per_class = resolve_batch_shape(y, cfg.batch_size, cfg.per_class)
    n = X.shape[1]

    best = None
    restart_losses = []
    for k in range(cfg.n_init):
        rng = np.random.default_rng([cfg.seed, k])
        W = _initial_weights(W0 if k == 0 else None, n, rng)
        result = _run(X, y, cfg, batch_size, per_class, W, k, callback)
        restart_losses.append(result.final_loss)
        logger.info(
            "init %d: %d epochs, final loss %.3g (%s)",
            k, result.n_epochs, result.final_loss, result.stop_reason,
        )
        if best is None or result.final_loss < best.final_loss:
            best = result
    best.restart_losses = restart_losses
    return best


def invariance_error(W, x, group: FiniteAbelianGroup, forward_fn=None) -> float:
    """``max_g ||out(act(g, x)) - out(x)||`` over the whole group."""
    from .network import forward

    forward_fn = forward_fn or (lambda s: forward(W, s))
    x = np.asarray(x)
    translates = np.stack([act_on_signal(g, x, group) for g in range(group.order)])
    out = forward_fn(translates)
    return float(np.max(np.linalg.norm(out - out[0], axis=-1)))


@dataclass
class EquivarianceReport:
    """Per-row behaviour of ``z(g) = W act(g, x)`` across the group.

    ``frequency[i]`` is the irrep label whose character best explains row
    ``i``'s phase trajectory and ``phase_residual[i]`` the RMS misfit of that
    explanation.
    """

    z: np.ndarray
    modulus_variation: np.ndarray
    phase_residual: np.ndarray
    frequency: np.ndarray

    @property
    def max_modulus_variation(self) -> float:
        return float(self.modulus_variation.max())

    @property
    def max_phase_residual(self) -> float:
        return float(np.nanmax(self.phase_residual)) if np.any(np.isfinite(self.phase_residual)) else np.nan


def equivariance_report(W, x, group: FiniteAbelianGroup) -> EquivarianceReport:
    from .spectral import character_table

    W = np.asarray(W, dtype=complex)
    x = np.asarray(x)
    translates = np.stack([act_on_signal(g, x, group) for g in range(group.order)])
    z = translates @ W.T  # z[g, i]
    mod = np.abs(z)
    modulus_variation = np.max(np.abs(mod - mod[0]), axis=0)

    # unit phase of each row relative to the identity translate
    rel = z * z[0].conj()
    size = np.abs(rel)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(size > 1e-300, rel / size, np.nan)
    chars = character_table(group).matrix  # chars[rho, g]
    misfit = np.sqrt(np.mean(np.abs(u.T[:, None, :] - chars[None, :, :]) ** 2, axis=-1))
    frequency = np.argmin(np.nan_to_num(misfit, nan=np.inf), axis=1)
    residual = misfit[np.arange(W.shape[0]), frequency]
    return EquivarianceReport(z, modulus_variation, residual, frequency)

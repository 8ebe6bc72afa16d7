"""Synthetic orbit datasets, stratified splits and class-balanced batches."""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ConfigError, SamplingError
from .groups import FiniteAbelianGroup, make_group, orbit

__all__ = ["OrbitDataset", "generate", "split", "sample_batch", "resolve_batch_shape"]


@dataclass(eq=False)
class OrbitDataset:
    """Samples ``X[s] = act(transforms[s], exemplars[labels[s]])``."""

    group: FiniteAbelianGroup
    X: np.ndarray
    labels: np.ndarray
    exemplars: np.ndarray
    transforms: np.ndarray
    subset_fraction: float = 1.0
    normalize: bool = False
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.X.shape[0]

    @property
    def n_classes(self) -> int:
        return int(self.exemplars.shape[0])

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def subset(self, idx) -> "OrbitDataset":
        idx = np.asarray(idx, dtype=np.intp)
        return replace(self, X=self.X[idx], labels=self.labels[idx], transforms=self.transforms[idx])


def _standardize(x):
    std = x.std(axis=-1, keepdims=True)
    std = np.where(std > 0, std, 1.0)
    return (x - x.mean(axis=-1, keepdims=True)) / std


def generate(group, num_exemplars=100, subset_fraction=1.0, seed=0, normalize=False) -> OrbitDataset:
    """Draw standard-normal exemplars and enumerate (a subset of) each orbit.

    Subsets keep ``ceil(subset_fraction * N)`` translates per exemplar, always
    including the untransformed exemplar itself.
    """
    if not isinstance(group, FiniteAbelianGroup):
        group = make_group(group)
    if num_exemplars < 1:
        raise ConfigError(f"need at least one exemplar, got {num_exemplars}")
    if not 0.0 < subset_fraction <= 1.0:
        raise ConfigError(f"subset fraction must lie in (0, 1], got {subset_fraction}")
    rng = np.random.default_rng(seed)
    n = group.order
    exemplars = rng.standard_normal((num_exemplars, n))
    if normalize:
        # translation permutes entries, so standardizing before or after the orbit agrees
        exemplars = _standardize(exemplars)
    keep = math.ceil(subset_fraction * n)
    X, labels, transforms = [], [], []
    for c, ex in enumerate(exemplars):
        if keep == n:
            g = np.arange(n)
        else:
            g = np.concatenate([[0], 1 + rng.choice(n - 1, keep - 1, replace=False)])
            g.sort()
        X.append(orbit(ex, group)[g])
        labels.append(np.full(keep, c))
        transforms.append(g)
    return OrbitDataset(
        group=group,
        X=np.concatenate(X),
        labels=np.concatenate(labels),
        exemplars=exemplars,
        transforms=np.concatenate(transforms),
        subset_fraction=subset_fraction,
        normalize=normalize,
        seed=seed,
    )


def split(ds: OrbitDataset, val_fraction=0.2, seed=0):
    """Stratified train/validation split that never empties a class in train.

    The validation size is ``round(val_fraction * len(ds))``, allocated across
    classes by largest remainder with random tie-breaking.
    """
    if not 0.0 <= val_fraction < 1.0:
        raise ConfigError(f"validation fraction must lie in [0, 1), got {val_fraction}")
    rng = np.random.default_rng(seed)
    counts = ds.class_counts()
    target = int(round(val_fraction * len(ds)))
    quota = val_fraction * counts
    take = np.minimum(np.floor(quota).astype(int), np.maximum(counts - 1, 0))
    remainder = quota - take
    capacity = np.maximum(counts - 1, 0) - take
    order = np.lexsort((rng.random(counts.size), -remainder))
    short = target - take.sum()
    for c in order:
        if short <= 0:
            break
        if capacity[c] > 0:
            take[c] += 1
            short -= 1
    val = []
    for c in np.flatnonzero(take):
        members = np.flatnonzero(ds.labels == c)
        val.append(rng.choice(members, take[c], replace=False))
    val = np.sort(np.concatenate(val)) if val else np.array([], dtype=np.intp)
    mask = np.ones(len(ds), dtype=bool)
    mask[val] = False
    return ds.subset(np.flatnonzero(mask)), ds.subset(val)


def resolve_batch_shape(labels, batch_size, per_class):
    """Fill in ``per_class=None`` and shrink the batch to what the data supports.

    With ``per_class=None`` the per-class count is ``min(10, smallest class)``
    and the batch holds as many whole classes as fit in ``batch_size``.
    """
    counts = np.bincount(np.asarray(labels))
    counts = counts[counts > 0]
    if per_class is None:
        per_class = int(min(10, counts.min()))
        n_classes = min(batch_size // per_class, int(np.sum(counts >= per_class)))
        batch_size = max(n_classes, 1) * per_class
    if per_class < 1 or batch_size % per_class:
        raise ConfigError(
            f"batch size {batch_size} must be a positive multiple of per-class count {per_class}"
        )
    return batch_size, per_class


def sample_batch(ds, batch_size, per_class, rng):
    """Indices of ``batch_size // per_class`` random classes times ``per_class`` samples each.

    ``ds`` is an :class:`OrbitDataset` or a label array.
    """
    labels = ds.labels if isinstance(ds, OrbitDataset) else np.asarray(ds)
    if per_class < 1 or batch_size % per_class:
        raise SamplingError(f"batch size {batch_size} is not a multiple of {per_class}")
    n_classes = batch_size // per_class
    classes, counts = np.unique(labels, return_counts=True)
    eligible = classes[counts >= per_class]
    if eligible.size < n_classes:
        worst = classes[np.argsort(counts)[: n_classes - eligible.size]]
        raise SamplingError(
            f"need {n_classes} classes with >= {per_class} samples, only {eligible.size} "
            f"qualify (limiting class {int(worst[0])} has {int(counts[classes == worst[0]][0])})"
        )
    chosen = rng.choice(eligible, n_classes, replace=False)
    idx = [rng.choice(np.flatnonzero(labels == c), per_class, replace=False) for c in chosen]
    return np.concatenate(idx)

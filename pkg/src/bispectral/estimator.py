"""scikit-learn estimators wrapping the analytic and learned bispectra."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .cayley import recover
from .exceptions import DomainError
from .groups import FiniteAbelianGroup, make_group
from .network import forward, normalize_rows
from .spectral import bispectrum, character_table, gft, normalized_bispectrum
from .training import TrainConfig, equivariance_report, train

__all__ = ["BispectralNetwork", "BispectrumTransformer", "check_signals"]


def check_signals(X, n_features=None, allow_complex=True, ensure_2d=True):
    """Validate a batch of signals without discarding imaginary parts.

    ``sklearn.utils.check_array`` rejects complex input, which both the
    analytic transforms and the network accept.
    """
    X = np.asarray(X)
    if X.dtype == object or not np.issubdtype(X.dtype, np.number):
        raise DomainError(f"signals must be numeric, got dtype {X.dtype}")
    if ensure_2d and X.ndim == 1:
        raise DomainError("expected a 2-D array of signals; reshape a single signal with x[None, :]")
    if X.ndim != 2:
        raise DomainError(f"expected a 2-D array of signals, got {X.ndim} dimensions")
    if X.shape[0] == 0:
        raise DomainError("no signals given")
    if np.iscomplexobj(X) and not allow_complex:
        raise DomainError("complex signals are not supported here")
    if not np.all(np.isfinite(X)):
        raise DomainError("signals contain NaN or infinity")
    if n_features is not None and X.shape[1] != n_features:
        raise DomainError(f"signals have {X.shape[1]} entries, expected {n_features}")
    return X.astype(complex if np.iscomplexobj(X) else float, copy=False)


class BispectralNetwork(TransformerMixin, BaseEstimator):
    """Learn a group-invariant map from orbit-labelled signals.

    ``fit(X, y)`` learns a complex weight matrix whose rows converge to the
    irreducible representations of the group generating the orbits; ``y``
    only says which signals share an orbit.  ``transform`` returns the
    normalized triple products, one row of ``n (n + 1) / 2`` complex values per
    signal.

    Parameters mirror :class:`TrainConfig`.

    Attributes
    ----------
    weights_ : ndarray of shape (n_features, n_features)
        Learned weights with unit-norm rows.
    history_ : list of dict
        Per-epoch training log of the selected initialization.
    converged_ : bool
        Whether training stopped on a loss plateau.
    """

    def __init__(
        self,
        *,
        gamma=1.0,
        base_lr=0.002,
        min_lr=1e-4,
        max_lr=5e-3,
        lr_step_epochs=10.0,
        batch_size=100,
        per_class=None,
        max_epochs=2000,
        plateau_patience=50,
        plateau_tol=1e-6,
        anneal_epochs=50,
        n_init=1,
        random_state=0,
    ):
        self.gamma = gamma
        self.base_lr = base_lr
        self.min_lr = min_lr
        self.max_lr = max_lr
        self.lr_step_epochs = lr_step_epochs
        self.batch_size = batch_size
        self.per_class = per_class
        self.max_epochs = max_epochs
        self.plateau_patience = plateau_patience
        self.plateau_tol = plateau_tol
        self.anneal_epochs = anneal_epochs
        self.n_init = n_init
        self.random_state = random_state

    def _train_config(self):
        params = self.get_params()
        seed = params.pop("random_state")
        if seed is None:
            seed = int(np.random.SeedSequence().entropy % (2**32))
        return TrainConfig(seed=int(seed), **params)

    def fit(self, X, y, W0=None):
        X = check_signals(X)
        y = np.asarray(y)
        if y.shape != (X.shape[0],):
            raise DomainError(f"{y.shape[0] if y.ndim else 0} labels for {X.shape[0]} signals")
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        result = train((X, y_enc), self._train_config(), W0=W0)
        self._set_weights(result.weights)
        self.history_ = result.log
        self.converged_ = result.converged
        self.restart_losses_ = result.restart_losses
        self.n_iter_ = result.n_epochs
        return self

    def _set_weights(self, W):
        self.weights_ = np.asarray(W, dtype=complex)
        self.n_features_in_ = self.weights_.shape[1]

    @classmethod
    def from_weights(cls, W, **params):
        """A fitted estimator holding given weights (rows rescaled to unit norm)."""
        est = cls(**params)
        est._set_weights(normalize_rows(W))
        est.history_ = []
        est.converged_ = True
        return est

    @classmethod
    def from_group(cls, group, **params):
        """A fitted estimator holding the unit-normalized character table of ``group``."""
        group = group if isinstance(group, FiniteAbelianGroup) else make_group(group)
        return cls.from_weights(character_table(group).unit_rows(), **params)

    def transform(self, X):
        check_is_fitted(self, "weights_")
        X = check_signals(X, self.n_features_in_)
        return forward(self.weights_, X)

    def invariance_error(self, X, group):
        """Per-signal ``max_g ||out(act(g, x)) - out(x)||``."""
        from .training import invariance_error

        check_is_fitted(self, "weights_")
        X = check_signals(X, self.n_features_in_)
        group = group if isinstance(group, FiniteAbelianGroup) else make_group(group)
        return np.array([invariance_error(self.weights_, x, group) for x in X])

    def equivariance_report(self, x, group):
        check_is_fitted(self, "weights_")
        group = group if isinstance(group, FiniteAbelianGroup) else make_group(group)
        return equivariance_report(self.weights_, x, group)

    def cayley_table(self, group=None):
        """Recovered Cayley table; tested for isomorphism when ``group`` is given."""
        check_is_fitted(self, "weights_")
        return recover(self.weights_, group)


class BispectrumTransformer(TransformerMixin, BaseEstimator):
    """Analytic (normalized) bispectrum over a known group.

    Parameters
    ----------
    group : str or sequence of int
        Cyclic factors, e.g. ``"4,2"``.
    normalize : bool
        Scale each output row to unit norm.
    """

    def __init__(self, group="8", normalize=True):
        self.group = group
        self.normalize = normalize

    def fit(self, X=None, y=None):
        self.group_ = make_group(self.group)
        self.table_ = character_table(self.group_)
        self.n_features_in_ = self.group_.order
        if X is not None:
            check_signals(X, self.n_features_in_)
        return self

    def transform(self, X):
        check_is_fitted(self, "table_")
        X = check_signals(X, self.n_features_in_)
        b = bispectrum(gft(X, self.table_), self.table_)
        if self.normalize:
            b = normalized_bispectrum(b)
        return b.values

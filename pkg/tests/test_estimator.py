import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from bispectral import BispectralNetwork, BispectrumTransformer
from bispectral.data import generate
from bispectral.exceptions import DomainError
from bispectral.groups import act_on_signal, make_group


def test_params_and_clone():
    est = BispectralNetwork(gamma=0.5, n_init=2, random_state=4)
    params = est.get_params()
    assert params["gamma"] == 0.5 and params["n_init"] == 2 and params["random_state"] == 4
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(gamma=0.2)
    assert est.gamma == 0.2


def test_unfitted_transform_raises():
    with pytest.raises(NotFittedError):
        BispectralNetwork().transform(np.ones((1, 4)))


def test_fit_transform():
    ds = generate("4", 10, seed=0)
    est = BispectralNetwork(max_epochs=20, plateau_patience=5, anneal_epochs=2, random_state=0)
    out = est.fit(ds.X, ds.labels).transform(ds.X)
    assert out.shape == (40, 10)
    assert np.allclose(np.linalg.norm(out, axis=1), 1)
    assert est.n_features_in_ == 4 and len(est.history_) == est.n_iter_
    with pytest.raises(DomainError):
        est.transform(np.ones((2, 5)))


def test_labels_may_be_strings():
    ds = generate("4", 4, seed=0)
    y = np.array(["abcd"[c] for c in ds.labels])
    est = BispectralNetwork(max_epochs=3, anneal_epochs=0).fit(ds.X, y)
    assert list(est.classes_) == list("abcd")


def test_input_validation():
    est = BispectralNetwork.from_group("4")
    with pytest.raises(DomainError):
        est.transform(np.ones(4))
    with pytest.raises(DomainError):
        est.transform(np.array([[1, np.nan, 0, 0]]))
    with pytest.raises(DomainError):
        est.fit(np.ones((3, 4)), [0, 1])


def test_from_group_is_invariant(rng):
    G = make_group("4,2")
    est = BispectralNetwork.from_group(G)
    x = rng.standard_normal(8)
    X = np.stack([act_on_signal(g, x, G) for g in range(8)])
    out = est.transform(X)
    assert np.allclose(out, out[0], atol=1e-9)
    assert est.invariance_error(x[None], G).max() <= 1e-9
    assert est.cayley_table(G).isomorphic_to == "4,2"


def test_bispectrum_transformer_in_pipeline(rng):
    X = rng.standard_normal((5, 8))
    pipe = make_pipeline(BispectrumTransformer(group="8"))
    out = pipe.fit_transform(X)
    assert out.shape == (5, 36)
    assert np.allclose(out, BispectralNetwork.from_group("8").transform(X))
    raw = BispectrumTransformer(group="8", normalize=False).fit(X).transform(X)
    assert not np.allclose(np.linalg.norm(raw, axis=1), 1)

"""Adam for complex parameters and the learning-rate schedules used in training."""

import numpy as np

__all__ = ["ComplexAdam", "triangular_lr", "ReduceOnPlateau"]


class ComplexAdam:
    """Adam with independent moment estimates for real and imaginary parts.

    ``step`` takes the Wirtinger gradient ``dL/d conj(w)``; the real-view
    gradient ``(dL/dRe, dL/dIm)`` is ``2 * (Re g, Im g)``.
    """

    def __init__(self, lr=0.002, beta1=0.9, beta2=0.999, eps=1e-8):
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        if not 0.0 <= beta1 < 1.0 or not 0.0 <= beta2 < 1.0:
            raise ValueError("Adam betas must lie in [0, 1)")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = None
        self._v = None

    def step(self, params, wirtinger_grad, lr=None):
        lr = self.lr if lr is None else lr
        g = 2.0 * np.asarray(wirtinger_grad)
        g = np.stack([g.real, g.imag]) if np.iscomplexobj(params) else g.real
        if self._m is None:
            self._m = np.zeros_like(g)
            self._v = np.zeros_like(g)
        self.t += 1
        self._m = self.beta1 * self._m + (1 - self.beta1) * g
        self._v = self.beta2 * self._v + (1 - self.beta2) * g * g
        m_hat = self._m / (1 - self.beta1**self.t)
        v_hat = self._v / (1 - self.beta2**self.t)
        update = lr * m_hat / (np.sqrt(v_hat) + self.eps)
        if np.iscomplexobj(params):
            return params - (update[0] + 1j * update[1])
        return params - update


def triangular_lr(epoch_position, min_lr, max_lr, step_epochs, start_lr=None):
    """Triangular cyclic learning rate at a (fractional) epoch position.

    The wave rises from ``min_lr`` to ``max_lr`` over ``step_epochs`` epochs and
    falls back over the next ``step_epochs``.  ``start_lr`` shifts the phase so
    that position 0 sits on the rising edge at that value.
    """
    span = max_lr - min_lr
    offset = 0.0
    if start_lr is not None and span > 0:
        offset = (np.clip(start_lr, min_lr, max_lr) - min_lr) / span * step_epochs
    cycle_pos = (epoch_position + offset) / step_epochs
    frac = cycle_pos % 2.0
    tri = frac if frac <= 1.0 else 2.0 - frac
    return min_lr + span * tri


class ReduceOnPlateau:
    """Multiply the learning rate by ``factor`` after ``patience`` non-improving steps.

    Improvement means dropping below ``best * (1 - threshold)``.
    """

    def __init__(self, lr, factor=0.1, patience=10, threshold=1e-4, min_lr=0.0):
        self.lr = lr
        self.factor = factor
        self.patience = patience
        self.threshold = threshold
        self.min_lr = min_lr
        self.best = np.inf
        self.bad_steps = 0

    def update(self, value):
        if value < self.best * (1 - self.threshold):
            self.best = value
            self.bad_steps = 0
        else:
            self.bad_steps += 1
            if self.bad_steps > self.patience:
                self.lr = max(self.lr * self.factor, self.min_lr)
                self.bad_steps = 0
        return self.lr

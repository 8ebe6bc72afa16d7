"""Bispectral neural networks for finite commutative groups."""

from .attacks import AttackConfig, AttackResult, attack
from .cayley import RecoveryReport, cayley_from_irreps, is_isomorphic, recover
from .data import OrbitDataset, generate, sample_batch, split
from .estimator import BispectralNetwork, BispectrumTransformer
from .exceptions import (
    BispectralError,
    CapacityError,
    ConfigError,
    DegenerateInputError,
    DomainError,
    InvalidGroupError,
    NumericError,
    SamplingError,
    TrainingError,
)
from .groups import (
    FiniteAbelianGroup,
    GroupElement,
    act_on_signal,
    cayley_from_group,
    compose,
    make_group,
    orbit,
)
from .network import forward, forward_linear, loss_gradient, orbit_separation_loss
from .spectral import (
    bispectrum,
    character_table,
    gft,
    inverse_gft,
    normalized_bispectrum,
    power_spectrum,
    triple_correlation,
)
from .training import TrainConfig, TrainResult, equivariance_report, train

__version__ = "0.1.0"

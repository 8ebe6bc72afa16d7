"""Analytic Fourier analysis on finite commutative groups.

Character tables, the group Fourier transform, power spectrum, bispectrum,
triple correlation and exhaustive orbit-distance oracles.  Everything here is
ground truth against which learned weights are compared.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import DegenerateInputError, DomainError
from .groups import FiniteAbelianGroup, orbit

__all__ = [
    "CharacterTable",
    "BispectrumMatrix",
    "character_table",
    "row_closure",
    "gft",
    "inverse_gft",
    "power_spectrum",
    "bispectrum",
    "full_bispectrum",
    "normalized_bispectrum",
    "triple_correlation",
    "gft2",
    "bispectrum_distance_to_orbit",
    "scaled_orbit_distance",
    "symmetry_partners",
    "phase_scrambled",
    "orbit_scale",
    "random_generic_signal",
]


def row_closure(rows) -> np.ndarray:
    """Index table ``c`` such that ``rows[i] * rows[j]`` best matches ``rows[c[i, j]]``.

    Rows are compared after scaling to unit norm, by the largest modulus of the
    inner product (conjugate-linear in the second argument).  For exact
    characters the match is exact.
    """
    rows = np.asarray(rows, dtype=complex)
    unit = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    prod = unit[:, None, :] * unit[None, :, :]
    scores = np.abs(prod @ unit.conj().T)
    return np.argmax(scores, axis=-1)


@dataclass(frozen=True, eq=False)
class CharacterTable:
    """``matrix[rho, g] = exp(-2 pi i sum_j rho_j g_j / n_j)``."""

    group: FiniteAbelianGroup
    matrix: np.ndarray

    @property
    def order(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def closure(self) -> np.ndarray:
        """``closure[i, j]`` is the irrep label of the product character ``chi_i chi_j``."""
        c = row_closure(self.matrix)
        c.flags.writeable = False
        return c

    def unit_rows(self) -> np.ndarray:
        """Character table with every row scaled to unit Euclidean norm."""
        return self.matrix / np.sqrt(self.order)


def character_table(group: FiniteAbelianGroup) -> CharacterTable:
    coords = group.coords
    phase = (coords[:, None, :] * coords[None, :, :] / np.asarray(group.factors)).sum(-1)
    matrix = np.exp(-2j * np.pi * phase)
    # snap roots of unity so that row closure is exact in floating point
    matrix.real[np.abs(matrix.real) < 1e-15] = 0.0
    matrix.imag[np.abs(matrix.imag) < 1e-15] = 0.0
    matrix.flags.writeable = False
    return CharacterTable(group, matrix)


def _check_length(x, n):
    x = np.asarray(x)
    if x.ndim == 0 or x.shape[-1] != n:
        raise DomainError(f"signal length {x.shape[-1] if x.ndim else 0} != group order {n}")
    return x


def gft(x, table: CharacterTable) -> np.ndarray:
    """Group Fourier transform ``f_hat = T @ x`` (batched over leading axes)."""
    x = _check_length(x, table.order)
    return x @ table.matrix.T


def inverse_gft(fhat, table: CharacterTable) -> np.ndarray:
    fhat = _check_length(fhat, table.order)
    return fhat @ table.matrix.conj() / table.order


def power_spectrum(fhat) -> np.ndarray:
    fhat = np.asarray(fhat)
    return (fhat.conj() * fhat).real


@dataclass(frozen=True)
class BispectrumMatrix:
    """Upper triangle (diagonal included) of an ``n x n`` bispectrum.

    ``values[..., m]`` holds the entry for ``pairs[m] = (i, j)`` with ``i <= j``,
    in ``numpy.triu_indices`` order.  Leading axes index a batch.
    """

    values: np.ndarray
    n: int

    @property
    def pairs(self):
        return np.triu_indices(self.n)

    def __getitem__(self, ij):
        i, j = ij
        if i > j:
            i, j = j, i
        # row-major offset into the packed upper triangle
        m = i * self.n - i * (i - 1) // 2 + (j - i)
        return self.values[..., m]

    def full(self) -> np.ndarray:
        """Symmetric square view ``B[i, j] = B[j, i]``."""
        out = np.zeros(self.values.shape[:-1] + (self.n, self.n), dtype=self.values.dtype)
        iu, ju = self.pairs
        out[..., iu, ju] = self.values
        out[..., ju, iu] = self.values
        return out

    def norm(self):
        return np.linalg.norm(self.values, axis=-1)


def full_bispectrum(fhat, table: CharacterTable) -> np.ndarray:
    """Square bispectrum ``B[i, j] = f_i f_j conj(f_{c(i, j)})``."""
    fhat = _check_length(fhat, table.order)
    c = table.closure
    return fhat[..., :, None] * fhat[..., None, :] * fhat[..., c].conj()


def bispectrum(fhat, table: CharacterTable) -> BispectrumMatrix:
    iu, ju = np.triu_indices(table.order)
    fhat = _check_length(fhat, table.order)
    values = fhat[..., iu] * fhat[..., ju] * fhat[..., table.closure[iu, ju]].conj()
    return BispectrumMatrix(values, table.order)


def normalized_bispectrum(b: BispectrumMatrix) -> BispectrumMatrix:
    norm = b.norm()
    if np.any(norm == 0):
        raise DegenerateInputError("cannot normalize an all-zero bispectrum")
    return BispectrumMatrix(b.values / np.expand_dims(norm, -1), b.n)


def triple_correlation(x, group: FiniteAbelianGroup) -> np.ndarray:
    """``A[s1, s2] = sum_g conj(x[g]) x[g + s1] x[g + s2]``."""
    x = _check_length(x, group.order)
    if x.ndim != 1:
        raise DomainError("triple_correlation expects a single signal")
    shifted = x[group.table]  # shifted[g, s] = x[g + s]
    return np.einsum("g,gs,gt->st", x.conj(), shifted, shifted)


def gft2(a, table: CharacterTable) -> np.ndarray:
    """Fourier transform over both arguments of a function on ``G x G``."""
    t = table.matrix
    return t @ np.asarray(a) @ t.T


def bispectrum_distance_to_orbit(x, y, group: FiniteAbelianGroup, table=None) -> float:
    """Exact distance ``min_g ||act(g, x) - y||`` by exhaustive search.

    ``table`` is accepted for call-site symmetry with the spectral functions and
    is not needed: the search runs in signal space.
    """
    x = _check_length(x, group.order)
    y = _check_length(y, group.order)
    return float(np.min(np.linalg.norm(orbit(x, group) - y, axis=1)))


def scaled_orbit_distance(x, y, group: FiniteAbelianGroup):
    """``min over g, c >= 0 of ||c * act(g, x) - y||``.

    Returns ``(distance, best_scalar, best_index)``.  For each translate the
    optimal scalar is the clipped least-squares coefficient.
    """
    x = _check_length(x, group.order)
    y = _check_length(y, group.order)
    translates = orbit(x, group)
    sq = np.einsum("gk,gk->g", translates.conj(), translates).real
    proj = (translates.conj() @ y).real
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(sq > 0, np.maximum(proj / sq, 0.0), 0.0)
    dist = np.linalg.norm(c[:, None] * translates - y, axis=1)
    g = int(np.argmin(dist))
    return float(dist[g]), float(c[g]), g


def symmetry_partners(k1: int, k2: int, n: int):
    """Index pairs sharing a bispectrum value with ``(k1, k2)`` for real signals on ``Z/n``.

    Each entry is ``((a, b), conjugated)``: ``B[a, b]`` equals ``B[k1, k2]`` or,
    when ``conjugated`` is true, its complex conjugate.
    """
    s = (-k1 - k2) % n
    return [
        ((k2 % n, k1 % n), False),
        ((-k2 % n, -k1 % n), True),
        ((s, k2 % n), False),
        ((k1 % n, s), False),
        ((s, k1 % n), False),
        ((k2 % n, s), False),
    ]


def phase_scrambled(x, table: CharacterTable, rng) -> np.ndarray:
    """Real signal with the same Fourier moduli as real ``x`` but random phases.

    Phases are drawn antisymmetric under irrep inversion so the result stays
    real; self-inverse irreps get a random sign instead.
    """
    x = _check_length(x, table.order)
    inv = table.group.inverses
    phi = rng.uniform(-np.pi, np.pi, table.order)
    phi = np.where(np.arange(table.order) < inv, phi, -phi[inv])
    self_inverse = inv == np.arange(table.order)
    phi[self_inverse] = np.pi * rng.integers(0, 2, self_inverse.sum())
    return inverse_gft(gft(x, table) * np.exp(1j * phi), table).real


def orbit_scale(x, y, table: CharacterTable) -> float:
    """Scalar ``c = (||B(x)|| / ||B(y)||)^(1/3)`` relating orbits with equal normalized bispectra."""
    bx = bispectrum(gft(x, table), table).norm()
    by = bispectrum(gft(y, table), table).norm()
    if by == 0:
        raise DegenerateInputError("second signal has an all-zero bispectrum")
    return float(np.cbrt(bx / by))


def random_generic_signal(n, rng, threshold=1e-3, table=None, complex_valued=False, max_tries=1000):
    """Draw a standard-normal signal whose Fourier coefficients all exceed ``threshold``.

    Completeness of the bispectrum only holds for such signals.
    """
    for _ in range(max_tries):
        x = rng.standard_normal(n)
        if complex_valued:
            x = x + 1j * rng.standard_normal(n)
        fhat = x @ table.matrix.T if table is not None else np.fft.fft(x)
        if np.min(np.abs(fhat)) > threshold:
            return x
    raise RuntimeError(f"no generic signal found in {max_tries} draws")

"""Recover a Cayley table from irreducible representations and test isomorphism."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import CapacityError, DomainError
from .groups import FiniteAbelianGroup, identity_index, is_latin_square, make_group

__all__ = [
    "MAX_ISOMORPHISM_ORDER",
    "RecoveryReport",
    "cayley_from_irreps",
    "find_isomorphism",
    "is_isomorphic",
    "relabel_table",
    "recover",
]

MAX_ISOMORPHISM_ORDER = 8
TIE_RTOL = 1e-9


@dataclass
class RecoveryReport:
    table: np.ndarray
    match_scores: np.ndarray
    ties: np.ndarray = field(repr=False)
    is_latin: bool
    is_symmetric: bool
    identity: Optional[int]
    isomorphic_to: Optional[str] = None
    witness_permutation: Optional[tuple] = None

    @property
    def n_ties(self) -> int:
        return int(self.ties.sum())

    def format_table(self) -> str:
        width = len(str(self.table.shape[0] - 1))
        return "\n".join(" ".join(f"{v:>{width}d}" for v in row) for row in self.table)


def cayley_from_irreps(W) -> RecoveryReport:
    """Estimate the Cayley table from (unordered) one-dimensional irreps.

    For every pair of rows, the Hadamard product ``W_i * W_j`` is matched to the
    row ``W_k`` maximizing ``|<W_i * W_j, W_k>|``; ties go to the smallest ``k``
    and are flagged.
    """
    W = np.asarray(W, dtype=complex)
    if W.ndim != 2:
        raise DomainError(f"weights must be a matrix, got shape {W.shape}")
    prod = W[:, None, :] * W[None, :, :]
    scores = np.abs(prod @ W.conj().T)
    table = np.argmax(scores, axis=-1)
    best = np.take_along_axis(scores, table[..., None], axis=-1)
    ties = np.sum(scores >= best * (1 - TIE_RTOL), axis=-1) > 1
    return RecoveryReport(
        table=table,
        match_scores=best[..., 0],
        ties=ties,
        is_latin=is_latin_square(table),
        is_symmetric=bool(np.array_equal(table, table.T)),
        identity=identity_index(table),
    )


def relabel_table(table, perm) -> np.ndarray:
    """Cayley table of the group whose element ``a`` is renamed ``perm[a]``."""
    table = np.asarray(table)
    perm = np.asarray(perm)
    out = np.empty_like(table)
    out[np.ix_(perm, perm)] = perm[table]
    return out


def find_isomorphism(reference, target):
    """Smallest lexicographic relabeling ``perm`` with ``relabel_table(reference, perm) == target``.

    Depth-first search over permutations, abandoning a branch at the first
    table entry that cannot match.  Returns ``None`` when no relabeling exists.
    """
    reference = np.asarray(reference)
    target = np.asarray(target)
    n = reference.shape[0]
    if target.shape != reference.shape:
        return None
    perm = [-1] * n
    used = [False] * n

    def consistent(a):
        # every product among already-assigned elements must map correctly
        pa = perm[a]
        for b in range(a + 1):
            pb = perm[b]
            for x, y, px, py in ((a, b, pa, pb), (b, a, pb, pa)):
                c = reference[x, y]
                t = target[px, py]
                if perm[c] >= 0:
                    if t != perm[c]:
                        return False
                elif used[t]:
                    return False
        return True

    def assign(a):
        if a == n:
            return True
        for v in range(n):
            if used[v]:
                continue
            perm[a], used[v] = v, True
            if consistent(a) and assign(a + 1):
                return True
            perm[a], used[v] = -1, False
        return False

    if not assign(0):
        return None
    perm = tuple(perm)
    if not np.array_equal(relabel_table(reference, perm), target):
        raise AssertionError("isomorphism witness failed re-verification")
    return perm


def is_isomorphic(group: FiniteAbelianGroup, W=None, table=None):
    """Decide whether the table recovered from ``W`` (or given ``table``) is ``group``'s.

    Returns ``(found, witness)`` where ``witness`` relabels the group's
    elements so its Cayley table equals the recovered one.
    """
    if table is None:
        if W is None:
            raise ValueError("pass either weights or a table")
        table = cayley_from_irreps(W).table
    table = np.asarray(table)
    n = group.order
    if n > MAX_ISOMORPHISM_ORDER:
        raise CapacityError(
            f"permutation search is limited to order {MAX_ISOMORPHISM_ORDER}, got {n}"
        )
    if table.shape != (n, n) or not is_latin_square(table):
        return False, None
    witness = find_isomorphism(group.table, table)
    return witness is not None, witness


def recover(W, group=None) -> RecoveryReport:
    """Extract the table from ``W`` and, when it is a Latin square, test it against ``group``."""
    report = cayley_from_irreps(W)
    if group is None or not report.is_latin:
        return report
    group = make_group(group) if not isinstance(group, FiniteAbelianGroup) else group
    found, witness = is_isomorphic(group, table=report.table)
    if found:
        report.isomorphic_to = group.spec
        report.witness_permutation = witness
    return report

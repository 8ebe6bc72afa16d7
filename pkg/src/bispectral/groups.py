"""Finite commutative groups as products of cyclic groups.

Elements are enumerated in mixed-radix order with the last factor varying
fastest, so a signal over ``Z/4 x Z/2`` reshaped to ``(4, 2)`` is laid out
row-major.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .exceptions import CapacityError, DomainError, InvalidGroupError

__all__ = [
    "DEFAULT_MAX_ORDER",
    "FiniteAbelianGroup",
    "GroupElement",
    "make_group",
    "parse_group_spec",
    "compose",
    "inverse",
    "act_on_signal",
    "cayley_from_group",
    "orbit",
    "unique_orbit",
    "is_latin_square",
    "identity_index",
]

DEFAULT_MAX_ORDER = 4096


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Direct product ``Z/n1 x ... x Z/nk`` of cyclic groups.

    Build instances through :func:`make_group`, which validates the factors.
    """

    factors: tuple

    @property
    def order(self) -> int:
        return int(np.prod(self.factors))

    def __len__(self):
        return self.order

    @property
    def spec(self) -> str:
        return ",".join(str(n) for n in self.factors)

    def __str__(self):
        return " x ".join(f"Z/{n}Z" for n in self.factors)

    @cached_property
    def coords(self) -> np.ndarray:
        """``(N, k)`` integer array; row ``i`` holds the coordinates of element ``i``."""
        grids = np.indices(self.factors).reshape(len(self.factors), -1)
        coords = grids.T.copy()
        coords.flags.writeable = False
        return coords

    @cached_property
    def _radix(self) -> np.ndarray:
        # place value of each coordinate; last factor fastest
        radix = np.ones(len(self.factors), dtype=np.int64)
        for j in range(len(self.factors) - 2, -1, -1):
            radix[j] = radix[j + 1] * self.factors[j + 1]
        return radix

    def index_of(self, coords) -> np.ndarray:
        """Flat index of one coordinate tuple or an ``(..., k)`` array of them."""
        coords = np.asarray(coords, dtype=np.int64)
        if coords.shape[-1] != len(self.factors):
            raise DomainError(
                f"expected {len(self.factors)} coordinates, got shape {coords.shape}"
            )
        coords = np.mod(coords, self.factors)
        return coords @ self._radix

    def element(self, g) -> "GroupElement":
        """Return the element addressed by flat index, coordinate tuple or element."""
        if isinstance(g, GroupElement):
            if g.group != self:
                raise DomainError(f"element of {g.group} used with {self}")
            return g
        if isinstance(g, (int, np.integer)):
            if not 0 <= g < self.order:
                raise DomainError(f"index {g} outside [0, {self.order})")
            return GroupElement(self, tuple(int(c) for c in self.coords[g]))
        coords = tuple(int(c) for c in g)
        if len(coords) != len(self.factors) or any(
            not 0 <= c < n for c, n in zip(coords, self.factors)
        ):
            raise DomainError(f"{coords} is not an element of {self}")
        return GroupElement(self, coords)

    def elements(self):
        return [self.element(i) for i in range(self.order)]

    @property
    def identity(self) -> "GroupElement":
        return GroupElement(self, (0,) * len(self.factors))

    def _index(self, g) -> int:
        if isinstance(g, (int, np.integer)):
            if not 0 <= g < self.order:
                raise DomainError(f"index {g} outside [0, {self.order})")
            return int(g)
        return self.element(g).index

    @cached_property
    def table(self) -> np.ndarray:
        """Cayley table on flat indices (read-only)."""
        c = self.coords
        table = self.index_of(c[:, None, :] + c[None, :, :])
        table.flags.writeable = False
        return table

    @cached_property
    def inverses(self) -> np.ndarray:
        inv = self.index_of(-self.coords)
        inv.flags.writeable = False
        return inv

    def translation(self, g) -> np.ndarray:
        """Index map ``perm`` with ``act(g, x) == x[..., perm]``."""
        g = self._index(g)
        # y[h] = x[h - g]
        return self.table[:, self.inverses[g]]


@dataclass(frozen=True)
class GroupElement:
    group: FiniteAbelianGroup = field(repr=False)
    coords: tuple

    @property
    def index(self) -> int:
        return int(self.group.index_of(self.coords))

    def __mul__(self, other):
        return compose(self, other)


def parse_group_spec(spec) -> tuple:
    """Parse ``"4,2"`` (or an iterable of ints) into a tuple of factors."""
    if isinstance(spec, FiniteAbelianGroup):
        return spec.factors
    if isinstance(spec, str):
        parts = [p.strip() for p in spec.replace("x", ",").split(",") if p.strip()]
        try:
            return tuple(int(p) for p in parts)
        except ValueError:
            raise InvalidGroupError(f"cannot parse group spec {spec!r}") from None
    if isinstance(spec, (int, np.integer)):
        return (int(spec),)
    return tuple(int(n) for n in spec)


def make_group(factors, max_order: int = DEFAULT_MAX_ORDER) -> FiniteAbelianGroup:
    """Build ``Z/n1 x ... x Z/nk`` from a list of cyclic orders or a spec string.

    >>> make_group([4, 2]).order
    8
    >>> make_group("8").spec
    '8'
    """
    factors = parse_group_spec(factors)
    if not factors:
        raise InvalidGroupError("a group needs at least one cyclic factor")
    bad = [n for n in factors if n < 2]
    if bad:
        raise InvalidGroupError(f"cyclic factors must be >= 2, got {list(factors)}")
    order = 1
    for n in factors:
        order *= n
        if order > max_order:
            raise CapacityError(
                f"group order {int(np.prod(factors, dtype=object))} exceeds "
                f"maximum {max_order}"
            )
    return FiniteAbelianGroup(factors)


ElementLike = Union[GroupElement, int, Sequence[int]]


def _as_element(g, group=None) -> GroupElement:
    if isinstance(g, GroupElement):
        if group is not None and g.group != group:
            raise DomainError(f"element of {g.group} used with {group}")
        return g
    if group is None:
        raise DomainError("a bare index or tuple needs a group to be interpreted")
    return group.element(g)


def compose(g: ElementLike, h: ElementLike, group: FiniteAbelianGroup = None) -> GroupElement:
    """Group product: componentwise addition modulo each factor."""
    g = _as_element(g, group)
    h = _as_element(h, group if group is not None else g.group)
    if g.group != h.group:
        raise DomainError(f"cannot compose elements of {g.group} and {h.group}")
    coords = tuple((a + b) % n for a, b, n in zip(g.coords, h.coords, g.group.factors))
    return GroupElement(g.group, coords)


def inverse(g: ElementLike, group: FiniteAbelianGroup = None) -> GroupElement:
    g = _as_element(g, group)
    return GroupElement(g.group, tuple((-a) % n for a, n in zip(g.coords, g.group.factors)))


def _check_signal(x, group):
    x = np.asarray(x)
    if x.ndim == 0 or x.shape[-1] != group.order:
        raise DomainError(
            f"signal length {x.shape[-1] if x.ndim else 0} does not match "
            f"group order {group.order}"
        )
    return x


def act_on_signal(g: ElementLike, x, group: FiniteAbelianGroup = None) -> np.ndarray:
    """Translate the domain of ``x`` by ``g``: ``y[h] = x[h - g]``.

    ``x`` may carry leading batch dimensions; the group acts on the last axis.
    """
    g = _as_element(g, group)
    x = _check_signal(x, g.group)
    return x[..., g.group.translation(g.index)]


def cayley_from_group(group: FiniteAbelianGroup) -> np.ndarray:
    """``C[i, j]`` is the flat index of ``element(i) * element(j)``."""
    return np.array(group.table)


def orbit(x, group: FiniteAbelianGroup) -> np.ndarray:
    """All translates of ``x``, one row per group element (row ``g`` is ``act(g, x)``)."""
    x = _check_signal(x, group)
    if x.ndim != 1:
        raise DomainError("orbit expects a single signal")
    perms = group.table[:, group.inverses].T
    return x[perms]


def unique_orbit(x, group: FiniteAbelianGroup) -> np.ndarray:
    """Distinct translates of ``x``; its length is ``N / |stabilizer|``."""
    return np.unique(orbit(x, group), axis=0)


def is_latin_square(table) -> bool:
    table = np.asarray(table)
    n = table.shape[0]
    if table.shape != (n, n):
        return False
    target = np.arange(n)
    return bool(
        np.all(np.sort(table, axis=1) == target) and np.all(np.sort(table, axis=0) == target[:, None])
    )


def identity_index(table):
    """Index ``e`` with ``table[e, j] == j`` for all ``j``, or ``None``."""
    table = np.asarray(table)
    hits = np.flatnonzero(np.all(table == np.arange(table.shape[1]), axis=1))
    return int(hits[0]) if hits.size else None

"""Dyadic sample space, Rademacher/Walsh functions and the fast Walsh-Hadamard transform.

Atoms are the integers ``0 <= m < 2**n``.  Coin ``j`` (``1 <= j <= n``) reads the
``j``-th most significant bit of the atom index, mapped ``0 -> -1`` and ``1 -> +1``.
With this ordering the cells of the level-``l`` filtration are contiguous index
blocks of length ``2**(n - l)``.

Walsh masks use the same convention: coin ``j`` is bit ``n - j`` of the mask
integer, so masks built from the first ``l`` coins are exactly the multiples of
``2**(n - l)``.
"""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import CapacityError, DomainError

DEFAULT_DEPTH_CAP = 24
DEPTH_CAP_ENV = "DYMART_DEPTH_CAP"

Mask = Union[int, Iterable[int]]


def depth_cap() -> int:
    """Largest depth a space may have; ``DYMART_DEPTH_CAP`` overrides the default."""
    raw = os.environ.get(DEPTH_CAP_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_DEPTH_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise DomainError(f"{DEPTH_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise DomainError(f"{DEPTH_CAP_ENV} must be >= 1, got {cap}")
    return cap


@dataclass(frozen=True)
class DyadicSpace:
    """The sample space of ``depth`` fair coin flips with the uniform measure."""

    depth: int

    def __post_init__(self):
        if isinstance(self.depth, bool) or not isinstance(self.depth, (int, np.integer)):
            raise DomainError(f"depth must be an integer, got {self.depth!r}")
        object.__setattr__(self, "depth", int(self.depth))
        if self.depth < 1:
            raise DomainError(f"depth must be >= 1, got {self.depth}")
        cap = depth_cap()
        if self.depth > cap:
            raise CapacityError(
                f"depth {self.depth} exceeds the depth cap {cap} "
                f"(set {DEPTH_CAP_ENV} to raise it)"
            )

    @property
    def size(self) -> int:
        return 1 << self.depth

    @property
    def atoms(self) -> np.ndarray:
        return _atom_indices(self.depth)

    def constant(self, c: float) -> "RandomVariable":
        return RandomVariable(self, np.full(self.size, float(c)))

    def zeros(self) -> "RandomVariable":
        return self.constant(0.0)


@functools.lru_cache(maxsize=None)
def _atom_indices(depth: int) -> np.ndarray:
    idx = np.arange(1 << depth, dtype=np.int64)
    idx.setflags(write=False)
    return idx


def tree_sum(values: np.ndarray, blocks: int = 1) -> np.ndarray:
    """Pairwise sum over the last axis, stopping when ``blocks`` partial sums remain.

    The last axis must have power-of-two length.  Partial sums always cover
    aligned contiguous blocks, so summing a block average back up reproduces the
    exact same intermediate values; this is what makes the tower law hold
    bit-for-bit.
    """
    a = np.asarray(values, dtype=np.float64)
    length = a.shape[-1]
    if length & (length - 1) or blocks & (blocks - 1) or blocks > length or blocks < 1:
        raise DomainError(f"cannot reduce length {length} to {blocks} blocks")
    while a.shape[-1] > blocks:
        a = a[..., 0::2] + a[..., 1::2]
    return a


class RandomVariable:
    """A real function on a :class:`DyadicSpace`, stored as one value per atom.

    Instances are immutable; arithmetic returns new variables.
    """

    __slots__ = ("space", "values")

    def __init__(self, space: DyadicSpace, values):
        arr = np.array(values, dtype=np.float64)
        if arr.shape != (space.size,):
            raise DomainError(
                f"expected {space.size} values for depth {space.depth}, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise DomainError(f"non-finite value {arr[bad]!r} at atom {bad}")
        arr.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("RandomVariable is immutable")

    @classmethod
    def _wrap(cls, space: DyadicSpace, arr: np.ndarray) -> "RandomVariable":
        return cls(space, arr)

    def _other(self, other) -> np.ndarray | float:
        if isinstance(other, RandomVariable):
            _same_space(self, other)
            return other.values
        return float(other)

    def __add__(self, other):
        return self._wrap(self.space, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.space, self.values - self._other(other))

    def __rsub__(self, other):
        return self._wrap(self.space, self._other(other) - self.values)

    def __mul__(self, other):
        return self._wrap(self.space, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.space, self.values / self._other(other))

    def __neg__(self):
        return self._wrap(self.space, -self.values)

    def __pow__(self, k):
        return self._wrap(self.space, self.values ** k)

    def __len__(self):
        return self.space.size

    def __repr__(self):
        return f"RandomVariable(depth={self.space.depth}, values={self.values!r})"


def _same_space(f: RandomVariable, g: RandomVariable) -> None:
    if f.space != g.space:
        raise DomainError(
            f"space mismatch: depth {f.space.depth} vs depth {g.space.depth}"
        )


@dataclass(frozen=True)
class SignPath:
    """The coin outcomes of one atom, most significant coin first."""

    depth: int
    signs: tuple

    def __post_init__(self):
        if len(self.signs) != self.depth:
            raise DomainError(f"expected {self.depth} signs, got {len(self.signs)}")
        if any(s not in (1, -1) for s in self.signs):
            raise DomainError(f"signs must be +1 or -1, got {self.signs}")


def binary_signs(m: int, n: int) -> SignPath:
    if n < 1:
        raise DomainError(f"depth must be >= 1, got {n}")
    if not 0 <= m < (1 << n):
        raise DomainError(f"atom index {m} out of range 0 <= m < 2**{n} = {1 << n}")
    bits = format(m, f"0{n}b")
    return SignPath(n, tuple(1 if b == "1" else -1 for b in bits))


def coin_bit(j: int, n: int) -> int:
    """Mask/atom bit carrying coin ``j`` at depth ``n``."""
    if not 1 <= j <= n:
        raise DomainError(f"coin index {j} out of range 1..{n}")
    return 1 << (n - j)


def mask_of(coins: Iterable[int], n: int) -> int:
    mask = 0
    for j in coins:
        mask |= coin_bit(int(j), n)
    return mask


def coins_of(mask: int, n: int) -> tuple:
    return tuple(j for j in range(1, n + 1) if mask & (1 << (n - j)))


def max_coin(mask: int, n: int) -> int:
    """Largest coin in ``mask`` (0 for the empty mask)."""
    if mask == 0:
        return 0
    return n - (mask & -mask).bit_length() + 1


def _as_mask(space: DyadicSpace, mask: Mask) -> int:
    if isinstance(mask, (int, np.integer)) and not isinstance(mask, bool):
        m = int(mask)
        if not 0 <= m < space.size:
            raise DomainError(f"mask {m} out of range for depth {space.depth}")
        return m
    return mask_of(mask, space.depth)


def rademacher(space: DyadicSpace, j: int) -> RandomVariable:
    bit = coin_bit(j, space.depth)
    return RandomVariable(space, np.where(space.atoms & bit, 1.0, -1.0))


def walsh(space: DyadicSpace, mask: Mask) -> RandomVariable:
    """Product of the Rademacher functions of the coins in ``mask``.

    ``mask`` is either a mask integer or an iterable of coin indices; the empty
    mask gives the constant 1.
    """
    m = _as_mask(space, mask)
    parity = (m.bit_count() - np.bitwise_count(space.atoms & m)) & 1
    return RandomVariable(space, 1.0 - 2.0 * parity)


def walsh_matrix(space: DyadicSpace) -> np.ndarray:
    """All Walsh functions as rows, ``W[mask, atom]``."""
    atoms = space.atoms
    masks = atoms[:, None]
    parity = (np.bitwise_count(masks) - np.bitwise_count(atoms[None, :] & masks)) & 1
    return 1.0 - 2.0 * parity


def expectation(f: RandomVariable) -> float:
    return float(tree_sum(f.values)[0]) / f.space.size


def inner_product(f: RandomVariable, g: RandomVariable) -> float:
    _same_space(f, g)
    return float(tree_sum(f.values * g.values)[0]) / f.space.size


def fwht(values: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Unnormalised Walsh-Hadamard butterfly over the last axis.

    Forward maps atom values to ``sum_m f(m) walsh(mask)(m)``; ``inverse`` maps
    coefficients to ``sum_mask c(mask) walsh(mask)(m)``.  Works on batches.
    """
    a = np.array(values, dtype=np.float64)
    size = a.shape[-1]
    if size < 1 or size & (size - 1):
        raise DomainError(f"transform length must be a power of two, got {size}")
    lead = a.shape[:-1]
    h = 1
    while h < size:
        v = a.reshape(lead + (size // (2 * h), 2, h))
        lo = v[..., 0, :]
        hi = v[..., 1, :]
        if inverse:
            # (without coin, with coin) -> (value at coin=-1, value at coin=+1)
            diff = lo - hi
            hi += lo
            lo[...] = diff
        else:
            total = lo + hi
            hi -= lo
            lo[...] = total
        h *= 2
    return a


@dataclass(frozen=True)
class WalshSpectrum:
    space: DyadicSpace
    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=np.float64)
        if arr.shape != (self.space.size,):
            raise DomainError(
                f"expected {self.space.size} coefficients, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise DomainError("spectrum contains non-finite coefficients")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def __getitem__(self, mask: Mask) -> float:
        return float(self.coeffs[_as_mask(self.space, mask)])

    def energy(self) -> float:
        return float(tree_sum(self.coeffs * self.coeffs)[0])


def wht_forward(f: RandomVariable) -> WalshSpectrum:
    return WalshSpectrum(f.space, fwht(f.values) / f.space.size)


def wht_inverse(s: WalshSpectrum) -> RandomVariable:
    return RandomVariable(s.space, fwht(s.coeffs, inverse=True))


def check_star_independence(
    space: DyadicSpace, coins: Sequence[int], thresholds: Sequence[float]
) -> tuple:
    """Both sides of the product formula for ``P(w_j1 < a1, ..., w_js < as)``.

    Each side is a count of atoms scaled by ``2**-n``, so the two agree exactly
    whenever the coins are independent.
    """
    coins = [int(j) for j in coins]
    if not coins:
        raise DomainError("coin set must be nonempty")
    if len(set(coins)) != len(coins):
        raise DomainError(f"coin indices must be distinct, got {coins}")
    if len(thresholds) != len(coins):
        raise DomainError(
            f"need one threshold per coin: {len(coins)} coins, {len(thresholds)} thresholds"
        )
    size = space.size
    joint = np.ones(size, dtype=bool)
    rhs = 1.0
    for j, alpha in zip(coins, thresholds):
        event = rademacher(space, j).values < alpha
        joint &= event
        rhs *= int(np.count_nonzero(event)) / size
    lhs = int(np.count_nonzero(joint)) / size
    return lhs, rhs

"""Dyadic cubes inside the unit cube and bottom-up aggregation over them.

A level-``j`` coefficient array in dimension ``d`` holds ``2**(j*d)`` values,
one per cube ``Q_{j,m}``, stored in row-major order of the position vector
``m`` (the last coordinate varies fastest).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

MAX_LATTICE_BITS = 24


def _check_lattice(dim: int, level: int) -> None:
    if dim < 1:
        raise ValueError(f"dimension must be positive, got {dim}")
    if level < 0:
        raise ValueError(f"level must be nonnegative, got {level}")
    if level * dim > MAX_LATTICE_BITS:
        raise ValueError(
            f"level*dim = {level * dim} exceeds the supported {MAX_LATTICE_BITS} bits"
        )


@dataclass(frozen=True)
class CubeIndex:
    """The dyadic cube ``Q_{level,position}`` inside ``[0,1)^d``."""

    level: int
    position: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(int(m) for m in self.position))
        if self.level < 0:
            raise ValueError("cube level must be nonnegative")
        if not self.position:
            raise ValueError("cube position must have at least one coordinate")
        side = 1 << self.level
        if any(m < 0 or m >= side for m in self.position):
            raise ValueError(f"position {self.position} outside the unit cube at level {self.level}")

    @property
    def dim(self) -> int:
        return len(self.position)

    @property
    def linear(self) -> int:
        return linear_index(self.position, self.level)


def linear_index(position: Sequence[int], level: int) -> int:
    """Row-major index of ``position`` among the ``2**(level*d)`` cubes of a level."""
    idx = 0
    for m in position:
        idx = (idx << level) | int(m)
    return idx


def position_of(index: int, dim: int, level: int) -> tuple[int, ...]:
    """Inverse of :func:`linear_index`."""
    mask = (1 << level) - 1
    out = []
    for _ in range(dim):
        out.append(index & mask)
        index >>= level
    return tuple(reversed(out))


def contains(parent: CubeIndex, child: CubeIndex) -> bool:
    """Whether ``Q_child`` is a subset of ``Q_parent``."""
    if parent.dim != child.dim:
        raise ValueError("cube dimensions differ")
    shift = child.level - parent.level
    if shift < 0:
        return False
    return all((c >> shift) == p for p, c in zip(parent.position, child.position))


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LevelSequence:
    """Coefficients ``lambda_{j,m}`` of a single level, indexed by cube."""

    dim: int
    level: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_lattice(self.dim, self.level)
        coeffs = _frozen(np.ravel(self.coeffs))
        if coeffs.size != self.size:
            raise ValueError(f"expected {self.size} coefficients, got {coeffs.size}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def size(self) -> int:
        return 1 << (self.level * self.dim)

    @classmethod
    def zeros(cls, dim: int, level: int) -> "LevelSequence":
        return cls(dim, level, np.zeros(1 << (level * dim)))

    def __getitem__(self, position: Sequence[int]) -> float:
        return float(self.coeffs[linear_index(position, self.level)])

    def scaled(self, c: float) -> "LevelSequence":
        return LevelSequence(self.dim, self.level, c * self.coeffs)


@dataclass(frozen=True)
class MultiLevelSequence:
    """Coefficients on levels ``0..max_level`` of the lattice."""

    dim: int
    levels: tuple[LevelSequence, ...]

    def __post_init__(self):
        levels = tuple(self.levels)
        if not levels:
            raise ValueError("need at least level 0")
        for j, lev in enumerate(levels):
            if lev.level != j or lev.dim != self.dim:
                raise ValueError(f"levels[{j}] has level {lev.level}, dim {lev.dim}")
        object.__setattr__(self, "levels", levels)

    @property
    def max_level(self) -> int:
        return len(self.levels) - 1

    @property
    def size(self) -> int:
        return sum(lev.size for lev in self.levels)

    @classmethod
    def zeros(cls, dim: int, max_level: int) -> "MultiLevelSequence":
        return cls(dim, tuple(LevelSequence.zeros(dim, j) for j in range(max_level + 1)))

    @classmethod
    def from_flat(cls, dim: int, max_level: int, flat: np.ndarray) -> "MultiLevelSequence":
        flat = np.ravel(flat)
        out, start = [], 0
        for j in range(max_level + 1):
            n = 1 << (j * dim)
            out.append(LevelSequence(dim, j, flat[start:start + n]))
            start += n
        if start != flat.size:
            raise ValueError(f"expected {start} coefficients, got {flat.size}")
        return cls(dim, tuple(out))

    def flat(self) -> np.ndarray:
        return np.concatenate([lev.coeffs for lev in self.levels])

    def __add__(self, other: "MultiLevelSequence") -> "MultiLevelSequence":
        if other.dim != self.dim or other.max_level != self.max_level:
            raise ValueError("sequences live on different lattices")
        return MultiLevelSequence.from_flat(self.dim, self.max_level, self.flat() + other.flat())

    def scaled(self, c: float) -> "MultiLevelSequence":
        return MultiLevelSequence(self.dim, tuple(lev.scaled(c) for lev in self.levels))


def block_sums(values: np.ndarray, dim: int, level: int) -> list[np.ndarray]:
    """Sums of ``values`` over every dyadic cube, for a batch of level arrays.

    ``values`` has shape ``(..., 2**(level*dim))``.  Returns a list indexed by
    the coarse level ``nu = 0..level`` whose entries have shape
    ``(..., 2**(nu*dim))``; each parent is the sum of its ``2**dim`` children.
    """
    _check_lattice(dim, level)
    values = np.asarray(values, dtype=float)
    batch = values.shape[:-1]
    if values.shape[-1] != 1 << (level * dim):
        raise ValueError("last axis does not match the lattice size")
    sums = [None] * (level + 1)
    cur = values.reshape(batch + (1 << level,) * dim)
    sums[level] = values
    nb = len(batch)
    for nu in range(level - 1, -1, -1):
        side = 1 << nu
        split = cur.reshape(batch + (side, 2) * dim)
        cur = split.sum(axis=tuple(nb + 2 * i + 1 for i in range(dim)))
        sums[nu] = cur.reshape(batch + (side**dim,))
    return sums


def aggregate_powers(seq: LevelSequence, p: float) -> list[np.ndarray]:
    """``S(nu, k) = sum |lambda_{j,m}|**p`` over level-``j`` cubes inside ``Q_{nu,k}``.

    ``result[nu][k]`` uses the row-major index ``k`` of the coarse cube.
    """
    p = float(p)
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    return block_sums(np.abs(seq.coeffs) ** p, seq.dim, seq.level)


def subcube_indicator(dim: int, level: int, cube: CubeIndex) -> np.ndarray:
    """0/1 array of the level cells contained in ``cube``."""
    if cube.dim != dim or cube.level > level:
        raise ValueError("cube is not a coarser cube of this lattice")
    shift = level - cube.level
    grid = np.zeros((1 << level,) * dim)
    grid[tuple(slice(m << shift, (m + 1) << shift) for m in cube.position)] = 1.0
    return grid.ravel()


def iter_cubes(dim: int, level: int):
    """All cubes of one level, in row-major order."""
    for idx in range(1 << (level * dim)):
        yield CubeIndex(level, position_of(idx, dim, level))

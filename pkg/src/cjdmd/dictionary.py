"""State-inclusive monomial dictionaries over delay windows.

A dictionary is an exponent table. Row ``i`` defines the observable
``prod_j w[j] ** E[i, j]``. Rows come in graded order (all degree-1
monomials, then degree 2, ...) and in descending lexicographic order
within a degree, so the first ``window_dim`` observables are the window
itself.
"""

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations_with_replacement
from math import comb

import numpy as np

from .errors import CapacityError, ContractError

MAX_TABLE_LENGTH = 100_000


def dictionary_size(window_dim: int, max_order: int) -> int:
    """Number of monomials of total degree 1..max_order in ``window_dim`` variables."""
    return comb(window_dim + max_order, max_order) - 1


@dataclass(frozen=True)
class ObservableDictionary:
    window_dim: int
    max_order: int
    exponents: tuple
    # monomials restricted to blocks of this many consecutive coordinates (None: no restriction)
    block_dim: int | None = None

    def __post_init__(self):
        if self.window_dim < 1 or self.max_order < 1:
            raise ContractError("window_dim and max_order must be >= 1")
        table = self.table
        if table.ndim != 2 or table.shape[1] != self.window_dim:
            raise ContractError("exponent table width must equal window_dim")
        if table.shape[0] < self.window_dim or not np.array_equal(
            table[: self.window_dim], np.eye(self.window_dim, dtype=np.int64)
        ):
            raise ContractError("exponent table must start with the unit exponent vectors")
        degrees = table.sum(axis=1)
        if np.any(table < 0) or np.any(degrees < 1) or np.any(degrees > self.max_order):
            raise ContractError("exponents must be non-negative with degree in 1..max_order")

    @cached_property
    def table(self) -> np.ndarray:
        t = np.array(self.exponents, dtype=np.int64).reshape(-1, self.window_dim)
        t.flags.writeable = False
        return t

    @cached_property
    def _terms(self):
        # (coordinate indices, exponents) per monomial, for direct power products
        return [(np.flatnonzero(row), row[row > 0]) for row in self.table]

    @cached_property
    def _plan(self):
        # monomial i = monomial parent[i] * w[coord[i]] whenever that parent precedes i
        index = {tuple(row): i for i, row in enumerate(self.exponents)}
        steps = []
        for i in range(self.window_dim, self.size):
            row = list(self.exponents[i])
            j = next(c for c, e in enumerate(row) if e)
            row[j] -= 1
            parent = index.get(tuple(row), -1)
            steps.append((i, parent if 0 <= parent < i else -1, j))
        return steps

    def __len__(self) -> int:
        return len(self.exponents)

    @property
    def size(self) -> int:
        return len(self.exponents)

    def degrees(self) -> np.ndarray:
        return self.table.sum(axis=1)

    def lift(self, windows) -> np.ndarray:
        """Evaluate all observables on a batch of windows, shape ``(B, window_dim) -> (B, size)``."""
        w = np.asarray(windows, dtype=np.float64)
        if w.ndim != 2 or w.shape[1] != self.window_dim:
            raise ContractError(
                f"windows must have shape (B, {self.window_dim}), got {w.shape}"
            )
        out = np.empty((w.shape[0], self.size))
        out[:, : self.window_dim] = w
        for i, parent, j in self._plan:
            if parent >= 0:
                np.multiply(out[:, parent], w[:, j], out=out[:, i])
            else:
                idx, exps = self._terms[i]
                out[:, i] = np.prod(w[:, idx] ** exps, axis=1)
        return out

    def per_lag(self, block_dim: int) -> "ObservableDictionary":
        """Drop every monomial that mixes coordinates from different blocks of ``block_dim``."""
        if block_dim < 1 or self.window_dim % block_dim:
            raise ContractError(f"block_dim {block_dim} does not divide window_dim {self.window_dim}")
        blocks = np.arange(self.window_dim) // block_dim
        keep = [
            row
            for row, (idx, _) in zip(self.exponents, self._terms)
            if np.unique(blocks[idx]).size == 1
        ]
        return ObservableDictionary(self.window_dim, self.max_order, tuple(keep), block_dim)

    def to_dict(self) -> dict:
        return {
            "window_dim": self.window_dim,
            "max_order": self.max_order,
            "block_dim": self.block_dim,
            "exponents": [list(e) for e in self.exponents],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ObservableDictionary":
        exps = tuple(tuple(int(v) for v in row) for row in d["exponents"])
        block = d.get("block_dim")
        return cls(int(d["window_dim"]), int(d["max_order"]), exps, None if block is None else int(block))


def build_dictionary(window_dim: int, max_order: int, cap: int = MAX_TABLE_LENGTH) -> ObservableDictionary:
    if window_dim < 1 or max_order < 1:
        raise ContractError("window_dim and max_order must be >= 1")
    n = dictionary_size(window_dim, max_order)
    if n > cap:
        raise CapacityError(
            f"dictionary({window_dim}, {max_order}) would hold {n} monomials (cap {cap})"
        )
    rows = []
    for degree in range(1, max_order + 1):
        # sorted index multisets in lex order == exponent vectors in descending lex order
        for combo in combinations_with_replacement(range(window_dim), degree):
            e = [0] * window_dim
            for j in combo:
                e[j] += 1
            rows.append(tuple(e))
    return ObservableDictionary(window_dim, max_order, tuple(rows))


def evaluate(dictionary: ObservableDictionary, window) -> np.ndarray:
    w = np.asarray(window, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != dictionary.window_dim:
        raise ContractError(
            f"window length must be {dictionary.window_dim}, got shape {w.shape}"
        )
    if not np.all(np.isfinite(w)):
        raise ContractError("window contains non-finite entries")
    return dictionary.lift(w[None, :])[0]

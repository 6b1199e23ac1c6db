"""Finite measure spaces with exact dyadic atom weights.

Atomlessness is modeled by on-demand refinement: any atom can be split into
2^t equal children, and every derived object (set, sign, operator column) is
remapped through the returned :class:`RefineMap`.  All measure arithmetic is
exact: weights are integers over a common power-of-two denominator, so
mean-zero and equal-measure predicates never involve a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidAtom,
    NonDyadic,
    NotDivisible,
    UnequalWeights,
    Unsplittable,
)


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class RefineMap:
    """Index mapping produced by a refinement.

    Old atom ``i`` is replaced by ``counts[i]`` consecutive children starting
    at ``start(i)``.  Order of atoms is preserved.
    """

    counts: tuple[int, ...]

    def __post_init__(self):
        if any(c < 1 for c in self.counts):
            raise ValueError("child counts must be >= 1")

    @staticmethod
    def identity(n: int) -> "RefineMap":
        return RefineMap(counts=(1,) * n)

    @property
    def n_old(self) -> int:
        return len(self.counts)

    @property
    def n_new(self) -> int:
        return sum(self.counts)

    @property
    def is_identity(self) -> bool:
        return all(c == 1 for c in self.counts)

    def starts(self) -> np.ndarray:
        c = np.asarray(self.counts, dtype=np.int64)
        out = np.zeros(len(c), dtype=np.int64)
        np.cumsum(c[:-1], out=out[1:])
        return out

    def children(self, old_index: int) -> range:
        s = int(self.starts()[old_index])
        return range(s, s + self.counts[old_index])

    def map_indices(self, indices: Iterable[int]) -> tuple[int, ...]:
        starts = self.starts()
        out: list[int] = []
        for i in indices:
            out.extend(range(int(starts[i]), int(starts[i]) + self.counts[i]))
        return tuple(out)

    def lift_values(self, values: Sequence[int] | np.ndarray) -> np.ndarray:
        """Each child inherits the parent's value (indicator lifting)."""
        v = np.asarray(values)
        if v.shape[-1] != self.n_old:
            raise InvalidAtom(f"expected {self.n_old} values, got {v.shape[-1]}")
        return np.repeat(v, self.counts, axis=-1)

    def split_columns(self, matrix: np.ndarray) -> np.ndarray:
        """Split column i into counts[i] equal parts (integral-kernel rule)."""
        m = np.asarray(matrix, dtype=float)
        if m.shape[1] != self.n_old:
            raise InvalidAtom(f"expected {self.n_old} columns, got {m.shape[1]}")
        c = np.asarray(self.counts, dtype=np.int64)
        return np.repeat(m / c, c, axis=1)

    def compose(self, later: "RefineMap") -> "RefineMap":
        """Map refining self's output further; returns old -> newest mapping."""
        if later.n_old != self.n_new:
            raise InvalidAtom("maps are not composable")
        lc = np.asarray(later.counts, dtype=np.int64)
        bounds = np.concatenate([[0], np.cumsum(np.asarray(self.counts))])
        cum = np.concatenate([[0], np.cumsum(lc)])
        counts = tuple(int(cum[b] - cum[a]) for a, b in zip(bounds[:-1], bounds[1:]))
        return RefineMap(counts=counts)


@dataclass(frozen=True)
class MeasureSpace:
    """Finite measure space as a list of positive dyadic atom weights.

    Atom ``i`` has weight ``numerators[i] / 2**denom_log2``.
    """

    denom_log2: int
    numerators: tuple[int, ...]

    def __post_init__(self):
        if self.denom_log2 < 0:
            raise NonDyadic("denominator exponent must be >= 0")
        if not self.numerators:
            raise InvalidAtom("a measure space needs at least one atom")
        if any(int(n) != n or n <= 0 for n in self.numerators):
            raise InvalidAtom("atom weights must be positive integers / 2^k")
        # canonical form: lowest dyadic terms, so repeated refinement of
        # disjoint regions does not inflate the shared denominator
        k, nums = self.denom_log2, self.numerators
        while k > 0 and all(n % 2 == 0 for n in nums):
            k -= 1
            nums = tuple(n // 2 for n in nums)
        if k != self.denom_log2:
            object.__setattr__(self, "denom_log2", k)
            object.__setattr__(self, "numerators", nums)

    @staticmethod
    def from_weights(weights: Sequence[Fraction | int]) -> "MeasureSpace":
        """Build from exact weights; denominators must be powers of two."""
        fracs = [Fraction(w) for w in weights]
        k = 0
        for f in fracs:
            if not _is_power_of_two(f.denominator):
                raise NonDyadic(f"weight {f} is not dyadic")
            k = max(k, f.denominator.bit_length() - 1)
        nums = tuple(int(f * 2**k) for f in fracs)
        return MeasureSpace(denom_log2=k, numerators=nums)

    @staticmethod
    def uniform(n_atoms: int, total: Fraction | int = 1) -> "MeasureSpace":
        """n_atoms equal atoms; n_atoms must be a power of two in exact mode."""
        if not _is_power_of_two(n_atoms):
            raise NonDyadic("uniform spaces need a power-of-two atom count")
        w = Fraction(total, n_atoms)
        return MeasureSpace.from_weights([w] * n_atoms)

    @property
    def n_atoms(self) -> int:
        return len(self.numerators)

    @property
    def total(self) -> Fraction:
        return Fraction(sum(self.numerators), 2**self.denom_log2)

    def weight(self, atom: int) -> Fraction:
        self._check_atom(atom)
        return Fraction(self.numerators[atom], 2**self.denom_log2)

    def weights_float(self) -> np.ndarray:
        return np.asarray(self.numerators, dtype=float) / 2.0**self.denom_log2

    def numerator_array(self) -> np.ndarray:
        return np.asarray(self.numerators, dtype=np.int64)

    def measure(self, indices: Iterable[int]) -> Fraction:
        total = 0
        for i in indices:
            self._check_atom(i)
            total += self.numerators[i]
        return Fraction(total, 2**self.denom_log2)

    def full_set(self) -> "MeasurableSet":
        return MeasurableSet(space=self, indices=tuple(range(self.n_atoms)))

    def subset(self, indices: Iterable[int]) -> "MeasurableSet":
        return MeasurableSet(space=self, indices=tuple(sorted(set(indices))))

    def _check_atom(self, atom: int) -> None:
        if not 0 <= atom < self.n_atoms:
            raise InvalidAtom(f"atom {atom} out of range [0, {self.n_atoms})")

    def refine(self, atom: int, parts: int) -> tuple["MeasureSpace", RefineMap]:
        """Split one atom into `parts` equal children; parts must be 2^t >= 2."""
        self._check_atom(atom)
        if parts < 2:
            raise InvalidAtom("parts must be >= 2")
        return self.refine_atoms([atom], parts)

    def refine_atoms(
        self, atoms: Iterable[int], parts: int
    ) -> tuple["MeasureSpace", RefineMap]:
        """Split each listed atom into `parts` equal children in one pass."""
        atoms = sorted(set(atoms))
        for a in atoms:
            self._check_atom(a)
        if parts < 2:
            raise InvalidAtom("parts must be >= 2")
        if not _is_power_of_two(parts):
            raise NonDyadic(f"parts={parts} is not a power of two")
        t = parts.bit_length() - 1
        scale = 2**t
        marked = set(atoms)
        nums: list[int] = []
        counts: list[int] = []
        for i, n in enumerate(self.numerators):
            if i in marked:
                nums.extend([n] * parts)
                counts.append(parts)
            else:
                nums.append(n * scale)
                counts.append(1)
        space = MeasureSpace(denom_log2=self.denom_log2 + t, numerators=tuple(nums))
        return space, RefineMap(counts=tuple(counts))

    def uniformize(self) -> tuple["MeasureSpace", RefineMap]:
        """Refine every atom down to the minimum atom weight.

        Requires every weight to be a power-of-two multiple of the smallest.
        """
        min_num = min(self.numerators)
        counts = []
        for n in self.numerators:
            q, r = divmod(n, min_num)
            if r != 0 or not _is_power_of_two(q):
                raise NonDyadic(
                    "weights are not power-of-two multiples of the minimum"
                )
            counts.append(q)
        if all(c == 1 for c in counts):
            return self, RefineMap.identity(self.n_atoms)
        nums = []
        for n, c in zip(self.numerators, counts):
            nums.extend([min_num] * c)
        space = MeasureSpace(denom_log2=self.denom_log2, numerators=tuple(nums))
        return space, RefineMap(counts=tuple(counts))

    def to_json(self) -> dict:
        return {
            "denominator_log2": self.denom_log2,
            "numerators": list(self.numerators),
        }

    @staticmethod
    def from_json(obj: dict) -> "MeasureSpace":
        return MeasureSpace(
            denom_log2=int(obj["denominator_log2"]),
            numerators=tuple(int(n) for n in obj["numerators"]),
        )


@dataclass(frozen=True)
class MeasurableSet:
    """Subset of atoms of a MeasureSpace (sorted, duplicate-free indices)."""

    space: MeasureSpace
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = self.indices
        if list(idx) != sorted(set(idx)):
            raise InvalidAtom("indices must be sorted and duplicate-free")
        if idx and (idx[0] < 0 or idx[-1] >= self.space.n_atoms):
            raise InvalidAtom("index out of range for the space")

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def is_empty(self) -> bool:
        return not self.indices

    @property
    def measure(self) -> Fraction:
        return self.space.measure(self.indices)

    def in_positive_sigma(self) -> bool:
        """Membership in Sigma^+: nonempty (all atoms carry positive weight)."""
        return not self.is_empty

    def weights_float(self) -> np.ndarray:
        w = self.space.weights_float()
        return w[list(self.indices)]

    def difference(self, other: "MeasurableSet") -> "MeasurableSet":
        drop = set(other.indices)
        return MeasurableSet(
            space=self.space,
            indices=tuple(i for i in self.indices if i not in drop),
        )

    def lift(self, rmap: RefineMap, space: MeasureSpace) -> "MeasurableSet":
        return MeasurableSet(space=space, indices=rmap.map_indices(self.indices))


@dataclass(frozen=True)
class SignVector:
    """{-1, 0, +1}-valued vector over the atoms of a space."""

    space: MeasureSpace
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != self.space.n_atoms:
            raise InvalidAtom("values length must equal the atom count")
        if any(v not in (-1, 0, 1) for v in self.values):
            raise ValueError("sign values must be in {-1, 0, +1}")

    @staticmethod
    def from_values(space: MeasureSpace, values: Sequence[int]) -> "SignVector":
        return SignVector(space=space, values=tuple(int(v) for v in values))

    @staticmethod
    def zero(space: MeasureSpace) -> "SignVector":
        return SignVector(space=space, values=(0,) * space.n_atoms)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.values) if v != 0)

    def support_set(self) -> MeasurableSet:
        return MeasurableSet(space=self.space, indices=self.support)

    @property
    def mean_zero(self) -> bool:
        """Exact: sum of value * weight vanishes in integer arithmetic."""
        return self.integral_numerator() == 0

    def integral_numerator(self) -> int:
        return int(
            np.dot(
                np.asarray(self.values, dtype=np.int64),
                self.space.numerator_array(),
            )
        )

    def integral(self) -> Fraction:
        return Fraction(self.integral_numerator(), 2**self.space.denom_log2)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def is_sign_on(self, mset: MeasurableSet) -> bool:
        """True iff support equals mset exactly (a 'sign on A' in the classical sense)."""
        return self.support == mset.indices

    def pointwise_product(self, other: "SignVector") -> "SignVector":
        if other.space is not self.space and other.space != self.space:
            raise InvalidAtom("signs live on different spaces")
        return SignVector(
            space=self.space,
            values=tuple(a * b for a, b in zip(self.values, other.values)),
        )

    def add_disjoint(self, other: "SignVector") -> "SignVector":
        """Sum of signs with disjoint supports (stays {-1,0,+1}-valued)."""
        vals = tuple(a + b for a, b in zip(self.values, other.values))
        return SignVector(space=self.space, values=vals)

    def lift(self, rmap: RefineMap, space: MeasureSpace) -> "SignVector":
        return SignVector(
            space=space, values=tuple(int(v) for v in rmap.lift_values(self.values))
        )


def rademacher_sign(mset: MeasurableSet, level: int) -> SignVector:
    """Block Rademacher sign on `mset`: alternating +-1 blocks of size
    |set| / 2^level.

    Requires equal atom weights inside the set and divisibility of the set
    size by 2^level.  Signs at distinct levels have a mean-zero pointwise
    product, the testable surrogate for probabilistic independence.
    """
    if level < 1:
        raise NotDivisible("level must be >= 1")
    s = mset.size
    blocks = 2**level
    if s % blocks != 0:
        raise NotDivisible(f"set size {s} not divisible by 2^{level}")
    nums = {mset.space.numerators[i] for i in mset.indices}
    if len(nums) != 1:
        raise UnequalWeights("atoms in the set must have equal weight")
    block_size = s // blocks
    values = [0] * mset.space.n_atoms
    for pos, atom in enumerate(mset.indices):
        values[atom] = 1 if (pos // block_size) % 2 == 0 else -1
    return SignVector(space=mset.space, values=tuple(values))


def half_split(mset: MeasurableSet) -> tuple[MeasurableSet, MeasurableSet]:
    """Split a set into two disjoint subsets of exactly equal measure.

    Greedy largest-first subset accumulation, with an exact subset-sum
    fallback for small sets.  Raises Unsplittable when no equal split exists
    (the caller should refine and retry).
    """
    if mset.is_empty:
        raise Unsplittable("cannot split the empty set")
    nums = [mset.space.numerators[i] for i in mset.indices]
    total = sum(nums)
    if total % 2 != 0:
        raise Unsplittable("total numerator is odd; refine first")
    half = total // 2

    order = sorted(range(len(nums)), key=lambda j: (-nums[j], j))
    acc = 0
    first: set[int] = set()
    for j in order:
        if acc + nums[j] <= half:
            acc += nums[j]
            first.add(j)
            if acc == half:
                break
    if acc != half:
        first_dp = _subset_sum(nums, half)
        if first_dp is None:
            raise Unsplittable("no subset achieves exactly half the measure")
        first = first_dp
    a = tuple(mset.indices[j] for j in sorted(first))
    b = tuple(mset.indices[j] for j in range(len(nums)) if j not in first)
    return (
        MeasurableSet(space=mset.space, indices=a),
        MeasurableSet(space=mset.space, indices=b),
    )


def _subset_sum(nums: list[int], target: int) -> set[int] | None:
    """Exact subset-sum over atom numerators; reachable-sum DP."""
    reachable: dict[int, int | None] = {0: None}
    parent: dict[int, tuple[int, int]] = {}
    for j, n in enumerate(nums):
        updates = {}
        for s in reachable:
            t = s + n
            if t <= target and t not in reachable and t not in updates:
                updates[t] = s
        for t, s in updates.items():
            reachable[t] = s
            parent[t] = (s, j)
        if target in reachable:
            break
    if target not in reachable:
        return None
    out: set[int] = set()
    cur = target
    while cur != 0:
        prev, j = parent[cur]
        out.add(j)
        cur = prev
    return out

"""Word groups with exact normal forms, word lengths and sphere enumeration.

Three families are supported, each with a decidable normal form:

* free groups F_d -- reduced words of signed generator indices,
* free abelian groups Z^d -- exponent vectors with the l1 word length,
* free products of finite cyclic groups Z_{n_1} * ... * Z_{n_k} --
  alternating syllables with exponents reduced modulo the factor order.

Word length is always taken with respect to the standard symmetric
generating set, so it coincides with graph distance in the Cayley graph
and spheres can be enumerated exactly by breadth-first search:
``C_k = {g : |g| = k}`` and ``B_r`` is the disjoint union of the C_k.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

DEFAULT_BUDGET = 5_000_000

_FPC_NAMES = "stuvw"


class BudgetExceededError(RuntimeError):
    """A ball enumeration would exceed the configured element budget."""

    def __init__(self, radius_reached: int, found: int, projected: float):
        super().__init__(
            f"ball enumeration stopped at radius {radius_reached} with "
            f"{found} elements; projected size ~{projected:.3g} exceeds budget"
        )
        self.radius_reached = radius_reached
        self.found = found
        self.projected = projected


@dataclass(frozen=True, slots=True)
class GroupElement:
    """A group element held in normal form; equality is word equality."""

    group: "Group"
    word: tuple

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return self.group.multiply(self, other)

    def inverse(self) -> "GroupElement":
        return self.group.inverse(self)

    def length(self) -> int:
        return self.group.length(self)

    def is_identity(self) -> bool:
        return not self.word

    def sort_key(self):
        return (self.group.length(self), self.word)

    def __repr__(self) -> str:
        return f"<{self.group.format_word(self)}>"


class Group:
    """Common interface of the three word-group families."""

    kind = "abstract"

    def identity(self) -> GroupElement:
        return GroupElement(self, ())

    def multiply(self, a: GroupElement, b: GroupElement) -> GroupElement:
        if a.group != self or b.group != self:
            raise ValueError(f"elements of {a.group} / {b.group} fed to {self}")
        return GroupElement(self, self._mul_words(a.word, b.word))

    def inverse(self, a: GroupElement) -> GroupElement:
        return GroupElement(self, self._inv_word(a.word))

    def length(self, a: GroupElement) -> int:
        return self._word_length(a.word)

    def generators(self) -> list[GroupElement]:
        raise NotImplementedError

    def symmetric_generators(self) -> list[GroupElement]:
        """Generators and their inverses, deduplicated, in a fixed order."""
        out: list[GroupElement] = []
        for g in self.generators():
            for h in (g, g.inverse()):
                if h not in out:
                    out.append(h)
        return out

    def letters_of(self, a: GroupElement) -> list[GroupElement]:
        """A geodesic spelling of ``a`` by symmetric generators.

        Every prefix of the returned sequence is itself geodesic, so the
        j-th partial product has word length exactly j.
        """
        raise NotImplementedError

    def chain_units(self, a: GroupElement) -> list[GroupElement] | None:
        """Decomposition of ``a`` used for ball-translation tables.

        Units are chosen so that applying them right-to-left to any h never
        leaves a ball that contains both h and a*h.  Returns None when no
        such decomposition is available and direct lookup must be used.
        """
        return None

    def _mul_words(self, u: tuple, v: tuple) -> tuple:
        raise NotImplementedError

    def _inv_word(self, u: tuple) -> tuple:
        raise NotImplementedError

    def _word_length(self, u: tuple) -> int:
        raise NotImplementedError

    def _enumerate_fast(self, radius: int, budget: int):
        """Optional direct sphere generation; None falls back to BFS."""
        return None

    def format_word(self, a: GroupElement) -> str:
        raise NotImplementedError

    def parse_word(self, text: str) -> GroupElement:
        raise NotImplementedError

    def spec_string(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.spec_string()


@dataclass(frozen=True)
class FreeGroup(Group):
    """Free group F_d; words are tuples of nonzero signed 1-based indices."""

    rank: int
    kind = "free"

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("free group rank must be >= 1")

    def generators(self):
        return [GroupElement(self, (i,)) for i in range(1, self.rank + 1)]

    def _mul_words(self, u, v):
        p = 0
        nu, nv = len(u), len(v)
        while p < nu and p < nv and u[nu - 1 - p] == -v[p]:
            p += 1
        return u[: nu - p] + v[p:]

    def _inv_word(self, u):
        return tuple(-x for x in reversed(u))

    def _word_length(self, u):
        return len(u)

    def letters_of(self, a):
        return [GroupElement(self, (x,)) for x in a.word]

    def chain_units(self, a):
        return self.letters_of(a)

    def _enumerate_fast(self, radius, budget):
        """Direct reduced-word generation, sorted sphere by sphere.

        Extending sorted words by letters in sorted order keeps each new
        sphere sorted, so no hashing or sorting is needed and the result
        matches the generic BFS ordering exactly.
        """
        letters = sorted(
            [i for i in range(1, self.rank + 1)] +
            [-i for i in range(1, self.rank + 1)]
        )
        gens = self.symmetric_generators()
        gen_for_letter = {g.word[0]: gi for gi, g in enumerate(gens)}
        spheres = [[()]]
        parent_pos = [-1]
        parent_gen = [-1]
        total = 1
        base = 0
        for k in range(radius):
            prev = spheres[k]
            grow = len(letters) if k == 0 else len(letters) - 1
            if total + len(prev) * grow > budget:
                projected = total * (grow ** (radius - k))
                raise BudgetExceededError(k, total, float(projected))
            level = []
            for offset, w in enumerate(prev):
                forbidden = -w[-1] if w else None
                gpos = base + offset
                for letter in letters:
                    if letter == forbidden:
                        continue
                    level.append(w + (letter,))
                    parent_pos.append(gpos)
                    parent_gen.append(gen_for_letter[letter])
            total += len(level)
            base += len(prev)
            spheres.append(level)
        element_spheres = [
            [GroupElement(self, w) for w in sph] for sph in spheres
        ]
        return element_spheres, parent_pos, parent_gen, gens

    def format_word(self, a):
        if not a.word:
            return "e"
        parts = []
        i = 0
        w = a.word
        while i < len(w):
            j = i
            while j < len(w) and w[j] == w[i]:
                j += 1
            run = j - i
            exp = run if w[i] > 0 else -run
            name = f"x{abs(w[i])}"
            parts.append(name if exp == 1 else f"{name}^{exp}")
            i = j
        return " ".join(parts)

    def parse_word(self, text):
        word: list[int] = []
        for tok in text.split():
            if tok == "e":
                continue
            m = re.fullmatch(r"x(\d+)(?:\^(-?\d+))?", tok)
            if not m:
                raise ValueError(f"bad free-group token {tok!r}")
            idx = int(m.group(1))
            if not 1 <= idx <= self.rank:
                raise ValueError(f"generator index {idx} out of range for {self}")
            exp = int(m.group(2)) if m.group(2) else 1
            letter = idx if exp > 0 else -idx
            for _ in range(abs(exp)):
                if word and word[-1] == -letter:
                    word.pop()
                else:
                    word.append(letter)
        return GroupElement(self, tuple(word))

    def spec_string(self):
        return f"free:{self.rank}"


@dataclass(frozen=True)
class FreeAbelian(Group):
    """Z^d; words are exponent vectors, word length is the l1 norm."""

    rank: int
    kind = "zd"

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("free abelian rank must be >= 1")

    def identity(self):
        return GroupElement(self, (0,) * self.rank)

    def generators(self):
        gens = []
        for i in range(self.rank):
            w = [0] * self.rank
            w[i] = 1
            gens.append(GroupElement(self, tuple(w)))
        return gens

    def _mul_words(self, u, v):
        return tuple(x + y for x, y in zip(u, v))

    def _inv_word(self, u):
        return tuple(-x for x in u)

    def _word_length(self, u):
        return sum(abs(x) for x in u)

    def letters_of(self, a):
        letters = []
        for i, x in enumerate(a.word):
            if x == 0:
                continue
            w = [0] * self.rank
            w[i] = 1 if x > 0 else -1
            letters.extend([GroupElement(self, tuple(w))] * abs(x))
        return letters

    def format_word(self, a):
        return "(" + ",".join(str(x) for x in a.word) + ")"

    def parse_word(self, text):
        text = text.strip()
        if text == "e":
            return self.identity()
        m = re.fullmatch(r"\(\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*\)", text)
        if not m:
            raise ValueError(f"bad lattice word {text!r}")
        coords = tuple(int(x) for x in m.group(1).split(","))
        if len(coords) != self.rank:
            raise ValueError(f"expected {self.rank} coordinates in {text!r}")
        return GroupElement(self, coords)

    def spec_string(self):
        return f"zd:{self.rank}"


@dataclass(frozen=True)
class FreeProductCyclic(Group):
    """Z_{n_1} * ... * Z_{n_k}; words are alternating (factor, exponent) syllables."""

    orders: tuple[int, ...]
    kind = "fpc"

    def __post_init__(self):
        if not self.orders:
            raise ValueError("need at least one cyclic factor")
        for n in self.orders:
            if n < 2:
                raise ValueError("cyclic orders must be >= 2")

    def generators(self):
        return [GroupElement(self, ((i, 1),)) for i in range(len(self.orders))]

    def _push(self, stack: list, fac: int, exp: int):
        exp %= self.orders[fac]
        if exp == 0:
            return
        if stack and stack[-1][0] == fac:
            prev_fac, prev_exp = stack.pop()
            self._push(stack, fac, prev_exp + exp)
        else:
            stack.append((fac, exp))

    def _mul_words(self, u, v):
        stack = list(u)
        for fac, exp in v:
            self._push(stack, fac, exp)
        return tuple(stack)

    def _inv_word(self, u):
        return tuple((fac, self.orders[fac] - exp) for fac, exp in reversed(u))

    def _syllable_length(self, fac: int, exp: int) -> int:
        n = self.orders[fac]
        return min(exp, n - exp)

    def _word_length(self, u):
        return sum(self._syllable_length(f, e) for f, e in u)

    def letters_of(self, a):
        letters = []
        for fac, exp in a.word:
            n = self.orders[fac]
            if exp <= n - exp:
                unit, count = (fac, 1), exp
            else:
                unit, count = (fac, n - 1), n - exp
            letters.extend([GroupElement(self, (unit,))] * count)
        return letters

    def chain_units(self, a):
        return [GroupElement(self, (syl,)) for syl in a.word]

    def _factor_name(self, i: int) -> str:
        return _FPC_NAMES[i] if i < len(_FPC_NAMES) else f"s{i}"

    def format_word(self, a):
        if not a.word:
            return "e"
        parts = []
        for fac, exp in a.word:
            name = self._factor_name(fac)
            parts.append(name if exp == 1 else f"{name}^{exp}")
        return " ".join(parts)

    def parse_word(self, text):
        names = {self._factor_name(i): i for i in range(len(self.orders))}
        word: list = []
        for tok in text.split():
            if tok == "e":
                continue
            base, _, exp_s = tok.partition("^")
            if base not in names:
                raise ValueError(f"bad factor name {base!r} in {tok!r}")
            exp = int(exp_s) if exp_s else 1
            self._push(word, names[base], exp)
        return GroupElement(self, tuple(word))

    def spec_string(self):
        return "fpc:" + ",".join(str(n) for n in self.orders)


def parse_group_spec(text: str) -> Group:
    """Parse a group specification string: free:d, zd:d or fpc:n1,n2,..."""
    m = re.fullmatch(r"(free|zd):(\d+)", text.strip())
    if m:
        cls = FreeGroup if m.group(1) == "free" else FreeAbelian
        return cls(int(m.group(2)))
    m = re.fullmatch(r"fpc:(\d+(?:,\d+)*)", text.strip())
    if m:
        return FreeProductCyclic(tuple(int(x) for x in m.group(1).split(",")))
    raise ValueError(f"bad group spec {text!r} (expected free:d, zd:d or fpc:n1,n2,...)")


def cancellation_number(a: GroupElement, b: GroupElement) -> int:
    """Number of length units cancelling in the product ab.

    The integer p with 2p <= |a| + |b| - |ab| < 2p + 2; always satisfies
    0 <= p <= min(|a|, |b|).
    """
    if a.group != b.group:
        raise ValueError("cancellation number needs elements of one group")
    defect = a.length() + b.length() - (a * b).length()
    return defect // 2


class SphereIndex:
    """Exhaustive spheres C_0..C_R of a group in a canonical order.

    Elements are stored sphere by sphere, each sphere sorted by word, so
    positions are deterministic.  A BFS parent tree is kept for building
    unitary stacks, and left-translation tables are cached lazily for
    fast row computation in compressions.
    """

    def __init__(self, group, spheres, parent_pos, parent_gen, gens):
        self.group = group
        self.radius = len(spheres) - 1
        self.spheres = tuple(tuple(s) for s in spheres)
        self.elements = tuple(g for sph in self.spheres for g in sph)
        self._pos = {g: i for i, g in enumerate(self.elements)}
        self.lengths = np.array(
            [k for k, sph in enumerate(self.spheres) for _ in sph], dtype=np.int64
        )
        self.parent_pos = parent_pos
        self.parent_gen = parent_gen
        self.gens = tuple(gens)
        self._unit_tables: dict = {}

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.spheres)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, g: GroupElement) -> bool:
        return g in self._pos

    def position(self, g: GroupElement) -> int:
        """Flat index of g in the ball, or -1 when outside."""
        return self._pos.get(g, -1)

    def sphere(self, k: int) -> tuple[GroupElement, ...]:
        return self.spheres[k]

    def ball_size(self, r: int) -> int:
        return sum(len(s) for s in self.spheres[: r + 1])

    def truncate(self, r: int) -> "SphereIndex":
        if r > self.radius:
            raise ValueError(f"cannot truncate radius-{self.radius} index to {r}")
        if r == self.radius:
            return self
        m = self.ball_size(r)
        return SphereIndex(
            self.group,
            self.spheres[: r + 1],
            self.parent_pos[:m],
            self.parent_gen[:m],
            self.gens,
        )

    def _unit_table(self, unit: GroupElement) -> np.ndarray:
        table = self._unit_tables.get(unit)
        if table is None:
            pos = self._pos
            core = [pos.get(unit * h, -1) for h in self.elements]
            core.append(-1)  # sentinel: -1 indexes here and stays -1
            table = np.array(core, dtype=np.int64)
            self._unit_tables[unit] = table
        return table

    def rows_for(self, g: GroupElement) -> np.ndarray:
        """Position of g*h for every ball element h; -1 where g*h is outside.

        Free groups chain by letters and free products by syllables: for
        those decompositions intermediate products stay inside any ball
        containing both endpoints, so chaining through translation tables
        is exact.  Lattices use direct lookup instead (chained coordinate
        moves may leave the ball between endpoints).
        """
        units = self.group.chain_units(g)
        if units is None:
            pos = self._pos
            return np.array(
                [pos.get(g * h, -1) for h in self.elements], dtype=np.int64
            )
        rows = np.arange(len(self.elements), dtype=np.int64)
        for unit in reversed(units):
            rows = self._unit_table(unit)[rows]
        return rows


def enumerate_spheres(group: Group, radius: int, budget: int = DEFAULT_BUDGET) -> SphereIndex:
    """Exact, duplicate-free BFS enumeration of the spheres C_0..C_radius."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    fast = group._enumerate_fast(radius, budget)
    if fast is not None:
        spheres, parent_pos, parent_gen, gens = fast
        return SphereIndex(
            group, spheres,
            np.array(parent_pos, dtype=np.int64),
            np.array(parent_gen, dtype=np.int64),
            gens,
        )
    gens = group.symmetric_generators()
    identity = group.identity()
    spheres: list[list[GroupElement]] = [[identity]]
    seen = {identity: 0}
    parent_pos: list[int] = [-1]
    parent_gen: list[int] = [-1]
    total = 1
    base = 0  # flat position of the first element of the current sphere
    for k in range(radius):
        current = spheres[k]
        discovered: dict[GroupElement, tuple[int, int]] = {}
        for offset, g in enumerate(current):
            gpos = base + offset
            for gi, s in enumerate(gens):
                h = g * s
                if h not in seen and h not in discovered:
                    discovered[h] = (gpos, gi)
        if total + len(discovered) > budget:
            ratio = max(len(discovered), 1) / max(len(current), 1)
            projected = total + len(discovered) * (
                (ratio ** (radius - k) - 1) / (ratio - 1) if ratio > 1 else radius - k
            )
            raise BudgetExceededError(k, total, projected)
        level = sorted(discovered, key=GroupElement.sort_key)
        for h in level:
            seen[h] = total
            total += 1
            p, gi = discovered[h]
            parent_pos.append(p)
            parent_gen.append(gi)
        base += len(current)
        spheres.append(level)
    return SphereIndex(
        group,
        spheres,
        np.array(parent_pos, dtype=np.int64),
        np.array(parent_gen, dtype=np.int64),
        gens,
    )


_INDEX_CACHE: dict = {}


def ball_index(group: Group, radius: int, budget: int = DEFAULT_BUDGET) -> SphereIndex:
    """Cached sphere enumeration; larger cached balls serve smaller requests."""
    per_group = _INDEX_CACHE.setdefault(group, {})
    idx = per_group.get(radius)
    if idx is not None:
        return idx
    best = max(per_group.values(), key=lambda i: i.radius, default=None)
    if best is not None and best.radius >= radius:
        idx = best.truncate(radius)
    else:
        idx = enumerate_spheres(group, radius, budget)
    per_group[radius] = idx
    return idx


def clear_index_cache():
    _INDEX_CACHE.clear()


@dataclass(frozen=True)
class GrowthFit:
    """Polynomial growth bound |C_k| <= C (1+k)^s fitted to enumerated spheres."""

    C: float
    s: int
    polynomial: bool
    tail_slope: float


def growth_fit(index: SphereIndex, growth_factor: float = 1.15) -> GrowthFit:
    """Fit the smallest integer degree s with a stable constant C.

    A candidate s is accepted when the ratios |C_k| / (1+k)^s stop growing
    over the outer half of the enumerated range: the maximum there must not
    sit at the boundary with the tail still rising by more than
    ``growth_factor``.  C is then the least integer bound valid on every
    enumerated sphere.  When no s up to the radius is stable the data is
    flagged non-polynomial within the enumerated window.
    """
    R = index.radius
    if R < 3:
        raise ValueError("growth fit needs spheres to radius >= 3")
    counts = index.cardinalities
    tail_ks = [k for k in range(1, R + 1) if k > R / 2]
    tail_slope = math.inf
    for s in range(R + 1):
        ratios = {k: counts[k] / (1 + k) ** s for k in tail_ks}
        rmax, rmin = max(ratios.values()), min(ratios.values())
        growing = max(ratios, key=ratios.get) == R and rmax > growth_factor * rmin
        if not growing:
            c_min = max(counts[k] / (1 + k) ** s for k in range(R + 1))
            xs = [math.log(1 + k) for k in tail_ks]
            ys = [math.log(max(ratios[k], 1e-300)) for k in tail_ks]
            xbar, ybar = sum(xs) / len(xs), sum(ys) / len(ys)
            denom = sum((x - xbar) ** 2 for x in xs)
            slope = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys)) / denom
            return GrowthFit(float(math.ceil(c_min - 1e-9)), s, True, slope)
    c_min = max(counts[k] / (1 + k) ** R for k in range(R + 1))
    return GrowthFit(float(math.ceil(c_min - 1e-9)), R, False, tail_slope)

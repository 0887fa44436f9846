"""Finitely supported crossed-product elements and their Fourier calculus.

An element X = sum_g L_g X_g is stored as a sparse map from group elements
to n x n complex coefficient blocks.  The covariance convention is fixed as
L_g a L_g^* = alpha_g(a), which pins the product and adjoint rules

    (X Y)_f   = sum_{g h = f} alpha_{h^{-1}}(X_g) Y_h,
    (X^*)_g   = alpha_{g^{-1}}(X_{g^{-1}}^*),

and is certified against the concrete regular representation elsewhere so
the two cannot drift apart.  Products accumulate term sums in a fixed
order (by cancellation number, then lexicographically), which makes the
block decomposition by cancellation number an exact partition of the
product, coefficient by coefficient.

Only exact structural zeros are dropped from coefficient maps; there is no
epsilon pruning, so algebraic identities are bit-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coeffalg import GroupAction, as_coeff, format_complex, op_norm, parse_complex, positive_part_norm
from .groups import Group, GroupElement, cancellation_number


class CPElement:
    """A finitely supported element of the crossed product, immutable."""

    __slots__ = ("group", "action", "coeffs")

    def __init__(self, action: GroupAction, coeffs, *, _trusted: bool = False):
        self.group: Group = action.group
        self.action = action
        if _trusted:
            self.coeffs = coeffs
            return
        clean: dict[GroupElement, np.ndarray] = {}
        for g, a in dict(coeffs).items():
            if g.group != self.group:
                raise ValueError(f"coefficient key {g!r} is not in {self.group}")
            m = as_coeff(a, action.dim)
            if np.count_nonzero(m):
                m = m.copy()
                m.setflags(write=False)
                clean[g] = m
        self.coeffs = {g: clean[g] for g in sorted(clean, key=GroupElement.sort_key)}

    # -- constructors ----------------------------------------------------

    @classmethod
    def zero(cls, action: GroupAction) -> "CPElement":
        return cls(action, {})

    @classmethod
    def unit(cls, action: GroupAction) -> "CPElement":
        return cls(action, {action.group.identity(): np.eye(action.dim)})

    @classmethod
    def delta(cls, action: GroupAction, g: GroupElement, coeff=None) -> "CPElement":
        """The single term L_g c (c defaults to the identity matrix)."""
        if coeff is None:
            coeff = np.eye(action.dim)
        return cls(action, {g: coeff})

    # -- basic structure ---------------------------------------------------

    @property
    def dim(self) -> int:
        return self.action.dim

    def support(self) -> tuple[GroupElement, ...]:
        return tuple(self.coeffs)

    def coeff(self, g: GroupElement) -> np.ndarray:
        a = self.coeffs.get(g)
        if a is None:
            return np.zeros((self.dim, self.dim), dtype=np.complex128)
        return a

    def is_zero(self) -> bool:
        return not self.coeffs

    def max_length(self) -> int:
        return max((g.length() for g in self.coeffs), default=0)

    def same_context(self, other: "CPElement") -> bool:
        return (self.group == other.group
                and self.action.fingerprint == other.action.fingerprint)

    def _require_context(self, other: "CPElement"):
        if not self.same_context(other):
            raise ValueError("operands live in different crossed products")

    def __add__(self, other: "CPElement") -> "CPElement":
        self._require_context(other)
        acc = {g: a.copy() for g, a in self.coeffs.items()}
        for g, a in other.coeffs.items():
            if g in acc:
                acc[g] = acc[g] + a
            else:
                acc[g] = a
        return CPElement(self.action, acc)

    def __sub__(self, other: "CPElement") -> "CPElement":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "CPElement":
        z = complex(scalar)
        return CPElement(self.action, {g: z * a for g, a in self.coeffs.items()})

    def __neg__(self) -> "CPElement":
        return (-1.0) * self

    def allclose(self, other: "CPElement", tol: float = 0.0) -> bool:
        keys = set(self.coeffs) | set(other.coeffs)
        return all(np.abs(self.coeff(g) - other.coeff(g)).max() <= tol for g in keys)

    def __repr__(self):
        return (f"CPElement({self.group}, n={self.dim}, "
                f"|supp|={len(self.coeffs)})")


def product(X: CPElement, Y: CPElement) -> CPElement:
    """Twisted convolution (X Y)_f = sum_{g h = f} alpha_{h^{-1}}(X_g) Y_h."""
    return _product_accumulate(X, Y, None)


def product_block(X: CPElement, Y: CPElement, p: int) -> CPElement:
    """The part of the product over pairs with cancellation number p.

    Summing the blocks over p = 0..min(max lengths) reproduces the product
    exactly: both sides accumulate the identical terms in the identical
    order.
    """
    if p < 0:
        raise ValueError("block index must be >= 0")
    return _product_accumulate(X, Y, p)


def _product_accumulate(X: CPElement, Y: CPElement, p_filter: int | None) -> CPElement:
    X._require_context(Y)
    terms = []
    for g, xg in X.coeffs.items():
        for h, yh in Y.coeffs.items():
            f = g * h
            p = (g.length() + h.length() - f.length()) // 2
            if p_filter is None or p == p_filter:
                terms.append((p, g.sort_key(), h.sort_key(), g, h, f, xg, yh))
    terms.sort(key=lambda t: (t[0], t[1], t[2]))
    acc: dict[GroupElement, np.ndarray] = {}
    action = X.action
    for _, _, _, g, h, f, xg, yh in terms:
        contrib = action.apply(h.inverse(), xg) @ yh
        if f in acc:
            acc[f] = acc[f] + contrib
        else:
            acc[f] = contrib
    return CPElement(action, acc)


def adjoint(X: CPElement) -> CPElement:
    """(X^*)_g = alpha_{g^{-1}}(X_{g^{-1}}^*); an exact involution."""
    acc = {}
    for h, xh in X.coeffs.items():
        acc[h.inverse()] = X.action.apply(h, xh.conj().T)
    return CPElement(X.action, acc)


def hadamard(X: CPElement, Y: CPElement) -> CPElement:
    """Coefficientwise product sum_f L_f X_f Y_f over the common support."""
    X._require_context(Y)
    acc = {}
    for g, xg in X.coeffs.items():
        yg = Y.coeffs.get(g)
        if yg is not None:
            acc[g] = xg @ yg
    return CPElement(X.action, acc)


# -- multiplier symbols ----------------------------------------------------


class MultiplierSymbol:
    """A total complex-valued function of group elements."""

    def __call__(self, g: GroupElement) -> complex:
        raise NotImplementedError

    def weighted_sup(self, s: float) -> float:
        """sup over the group of |phi(g)| (2 + |g|)^(s+1); may be inf."""
        raise NotImplementedError


@dataclass(frozen=True)
class ExponentialDecay(MultiplierSymbol):
    """g -> exp(-lam |g|)."""

    lam: float

    def __call__(self, g):
        return complex(math.exp(-self.lam * g.length()))

    def weighted_sup(self, s):
        if self.lam <= 0:
            return math.inf
        t_star = max(0.0, (s + 1) / self.lam - 2.0)
        window = range(0, int(math.ceil(t_star)) + 2)
        return max(math.exp(-self.lam * t) * (2 + t) ** (s + 1) for t in window)


@dataclass(frozen=True)
class PolynomialWeight(MultiplierSymbol):
    """g -> (1 + |g|)^exponent."""

    exponent: float

    def __call__(self, g):
        return complex((1 + g.length()) ** self.exponent)

    def weighted_sup(self, s):
        if self.exponent + s + 1 > 0:
            return math.inf
        return float(2 ** (s + 1))


@dataclass(frozen=True)
class IndicatorAnnulus(MultiplierSymbol):
    """Indicator of the sphere C_m = {g : |g| = m} (integer word lengths)."""

    m: int

    def __call__(self, g):
        return complex(1.0 if g.length() == self.m else 0.0)

    def weighted_sup(self, s):
        return float((2 + self.m) ** (s + 1))


@dataclass(frozen=True)
class IndicatorBall(MultiplierSymbol):
    """Indicator of the ball B_n = {g : |g| <= n}."""

    n: int

    def __call__(self, g):
        return complex(1.0 if g.length() <= self.n else 0.0)

    def weighted_sup(self, s):
        return float((2 + self.n) ** (s + 1))


class TableSymbol(MultiplierSymbol):
    """Explicit finite table of values, zero elsewhere."""

    def __init__(self, table: dict[GroupElement, complex]):
        self.table = {g: complex(v) for g, v in table.items()}

    def __call__(self, g):
        return self.table.get(g, 0j)

    def weighted_sup(self, s):
        return max(
            (abs(v) * (2 + g.length()) ** (s + 1) for g, v in self.table.items()),
            default=0.0,
        )


def multiply_symbol(phi: MultiplierSymbol, X: CPElement) -> CPElement:
    """M_phi X: scale each coefficient by phi(g); exact zeros are dropped."""
    return CPElement(X.action, {g: phi(g) * a for g, a in X.coeffs.items()})


def truncate_ball(X: CPElement, n: int) -> CPElement:
    return multiply_symbol(IndicatorBall(n), X)


# -- algebraic norms -------------------------------------------------------


def column_norm(X: CPElement) -> float:
    """|| sum_g X_g^* X_g ||^(1/2); a lower bound for the operator norm."""
    if X.is_zero():
        return 0.0
    return math.sqrt(positive_part_norm([a.conj().T @ a for a in X.coeffs.values()]))


def row_norm(X: CPElement) -> float:
    """|| sum_g alpha_g(X_g X_g^*) ||^(1/2)."""
    if X.is_zero():
        return 0.0
    return math.sqrt(positive_part_norm(
        [X.action.apply(g, a @ a.conj().T) for g, a in X.coeffs.items()]))


def triangle_bound(X: CPElement) -> float:
    """sum_g ||X_g||: the certified upper bound for the operator norm."""
    return sum(op_norm(a) for a in X.coeffs.values())


def weighted_gram_norm(X: CPElement, exponent: float, side: str = "column") -> float:
    """|| sum_g (1+|g|)^exponent G_g ||^(1/2) with G the column or row Gram terms."""
    if X.is_zero():
        return 0.0
    parts = []
    for g, a in X.coeffs.items():
        w = (1.0 + g.length()) ** exponent
        if side == "column":
            parts.append(w * (a.conj().T @ a))
        elif side == "row":
            parts.append(w * X.action.apply(g, a @ a.conj().T))
        else:
            raise ValueError("side must be 'column' or 'row'")
    return math.sqrt(positive_part_norm(parts))


def rd_rhs_scalar(X: CPElement, s: float) -> float:
    """(sum_g (1+|g|)^(2s) ||X_g||^2)^(1/2)."""
    return math.sqrt(sum(
        (1.0 + g.length()) ** (2 * s) * op_norm(a) ** 2
        for g, a in X.coeffs.items()))


def rd_rhs_operator(X: CPElement, s: float) -> float:
    """|| sum_g (1+|g|)^(2s) (alpha_g(X_g X_g^*) + X_g^* X_g) ||^(1/2)."""
    if X.is_zero():
        return 0.0
    parts = []
    for g, a in X.coeffs.items():
        w = (1.0 + g.length()) ** (2 * s)
        parts.append(w * (X.action.apply(g, a @ a.conj().T) + a.conj().T @ a))
    return math.sqrt(positive_part_norm(parts))


def rd_rhs_mixed(X: CPElement, s: float) -> float:
    """(sum_k (1+k)^(2s) || sum_{|g|=k} (alpha_g(X_g X_g^*) + X_g^* X_g) ||)^(1/2)."""
    if X.is_zero():
        return 0.0
    by_len: dict[int, list[np.ndarray]] = {}
    for g, a in X.coeffs.items():
        term = X.action.apply(g, a @ a.conj().T) + a.conj().T @ a
        by_len.setdefault(g.length(), []).append(term)
    total = 0.0
    for k, parts in by_len.items():
        total += (1.0 + k) ** (2 * s) * positive_part_norm(parts)
    return math.sqrt(total)


# -- serialization ---------------------------------------------------------


def dumps_element(X: CPElement) -> str:
    """Line-oriented text form: ``g=<word>; row0; row1; ...`` per coefficient."""
    lines = []
    for g, a in X.coeffs.items():
        rows = [" ".join(format_complex(z) for z in row) for row in a]
        lines.append("; ".join([f"g={X.group.format_word(g)}"] + rows))
    return "\n".join(lines) + ("\n" if lines else "")


def loads_element(text: str, action: GroupAction) -> CPElement:
    coeffs: dict[GroupElement, np.ndarray] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split(";")]
        if not fields[0].startswith("g="):
            raise ValueError(f"line {ln}: expected 'g=<word>' first")
        g = action.group.parse_word(fields[0][2:])
        rows = [[parse_complex(tok) for tok in f.split()] for f in fields[1:] if f]
        mat = np.array(rows, dtype=np.complex128)
        if mat.shape != (action.dim, action.dim):
            raise ValueError(
                f"line {ln}: matrix shape {mat.shape} does not match dim {action.dim}")
        if g in coeffs:
            coeffs[g] = coeffs[g] + mat
        else:
            coeffs[g] = mat
    return CPElement(action, coeffs)


def write_element_file(X: CPElement, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_element(X))


def read_element_file(path, action: GroupAction) -> CPElement:
    with open(path) as fh:
        return loads_element(fh.read(), action)

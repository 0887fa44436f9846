"""Matrix coefficient algebra M_n(C) and group actions by *-automorphisms.

Coefficients are plain complex numpy arrays; this module supplies the norm
helpers the crossed-product calculus needs and the ``GroupAction`` class
that turns generator images (permutations or unitaries) into a coherent
family of automorphisms ``a -> U_g a U_g^*`` along normal forms.  Relation
checking happens once, at construction: exactly for permutations, to an
explicit tolerance for general unitaries.
"""

from __future__ import annotations

import hashlib
import re
from pathlib import Path

import numpy as np

from .groups import FreeAbelian, FreeProductCyclic, Group, GroupElement

UNITARY_TOL = 1e-10


def as_coeff(a, dim: int | None = None) -> np.ndarray:
    """Coerce to a square complex matrix, optionally of prescribed size."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"coefficient must be square, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise ValueError(f"coefficient is {m.shape[0]}x{m.shape[0]}, expected {dim}")
    if not np.isfinite(m).all():
        raise ValueError("coefficient has non-finite entries")
    return m


def op_norm(a) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(as_coeff(a), 2))


def positive_part_norm(parts, tol: float = 1e-8) -> float:
    """Norm of a sum of Hermitian positive-semidefinite matrices.

    Validates Hermitianity and near-positivity of the sum (smallest
    eigenvalue >= -tol * scale) and returns the largest eigenvalue.
    """
    parts = list(parts)
    if not parts:
        return 0.0
    total = as_coeff(parts[0]).copy()
    for p in parts[1:]:
        total += as_coeff(p, total.shape[0])
    scale = max(1.0, float(np.abs(total).max()))
    if np.abs(total - total.conj().T).max() > tol * scale:
        raise ValueError("summands are not Hermitian within tolerance")
    eigs = np.linalg.eigvalsh((total + total.conj().T) / 2.0)
    if eigs[0] < -tol * scale:
        raise ValueError(f"sum is not positive: min eigenvalue {eigs[0]:.3e}")
    return float(max(eigs[-1], 0.0))


def _perm_matrix(perm: tuple[int, ...]) -> np.ndarray:
    n = len(perm)
    m = np.zeros((n, n), dtype=np.complex128)
    for j, i in enumerate(perm):
        m[i, j] = 1.0
    return m


def _compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    """Composition p after q as basis maps: (p*q)(j) = p(q(j))."""
    return tuple(p[q[j]] for j in range(len(q)))


def _perm_power(p: tuple[int, ...], k: int) -> tuple[int, ...]:
    out = tuple(range(len(p)))
    for _ in range(k):
        out = _compose(p, out)
    return out


class GroupAction:
    """An action of a word group on M_n(C) by inner *-automorphisms.

    Generator images extend multiplicatively along normal forms.  For free
    groups the images are unconstrained; lattice generators must commute
    and the i-th free-product factor image must have the factor's order.
    """

    def __init__(self, group: Group, dim: int, kind: str,
                 images: tuple[np.ndarray, ...], perms=None, label: str = ""):
        self.group = group
        self.dim = dim
        self.kind = kind
        self._images = tuple(np.ascontiguousarray(m) for m in images)
        self._perms = perms
        self.label = label or kind
        self._validate()
        h = hashlib.sha256()
        h.update(f"{group.spec_string()}|{dim}|{kind}".encode())
        for m in self._images:
            h.update(m.tobytes())
        self.fingerprint = h.hexdigest()

    # -- constructors ---------------------------------------------------

    @classmethod
    def trivial(cls, group: Group, dim: int) -> "GroupAction":
        return cls(group, dim, "trivial", (), label=f"trivial:{dim}")

    @classmethod
    def from_permutations(cls, group: Group, perms) -> "GroupAction":
        perms = [tuple(p) for p in perms]
        if not perms:
            raise ValueError("need one permutation per generator")
        n = len(perms[0])
        for p in perms:
            if sorted(p) != list(range(n)):
                raise ValueError(f"{p} is not a permutation of 0..{n - 1}")
        images = tuple(_perm_matrix(p) for p in perms)
        return cls(group, n, "permutation", images, perms=tuple(perms))

    @classmethod
    def from_unitaries(cls, group: Group, mats) -> "GroupAction":
        images = tuple(as_coeff(m) for m in mats)
        if not images:
            raise ValueError("need one unitary per generator")
        n = images[0].shape[0]
        return cls(group, n, "unitary", tuple(as_coeff(m, n) for m in images))

    # -- validation -----------------------------------------------------

    def _n_images_expected(self) -> int:
        if isinstance(self.group, FreeProductCyclic):
            return len(self.group.orders)
        return self.group.rank

    def _validate(self):
        if self.kind == "trivial":
            return
        expected = self._n_images_expected()
        if len(self._images) != expected:
            raise ValueError(
                f"{self.group} needs {expected} generator images, "
                f"got {len(self._images)}")
        eye = np.eye(self.dim)
        for i, u in enumerate(self._images):
            if u.shape != (self.dim, self.dim):
                raise ValueError("generator images must share one dimension")
            if np.abs(u @ u.conj().T - eye).max() > UNITARY_TOL:
                raise ValueError(f"generator image {i} is not unitary")
        if self._perms is not None:
            if isinstance(self.group, FreeAbelian):
                for i in range(len(self._perms)):
                    for j in range(i + 1, len(self._perms)):
                        if (_compose(self._perms[i], self._perms[j])
                                != _compose(self._perms[j], self._perms[i])):
                            raise ValueError(
                                f"lattice generator images {i},{j} do not commute")
            if isinstance(self.group, FreeProductCyclic):
                for i, p in enumerate(self._perms):
                    if _perm_power(p, self.group.orders[i]) != tuple(range(self.dim)):
                        raise ValueError(
                            f"factor image {i} does not have order "
                            f"dividing {self.group.orders[i]}")
        else:
            if isinstance(self.group, FreeAbelian):
                for i in range(len(self._images)):
                    for j in range(i + 1, len(self._images)):
                        a, b = self._images[i], self._images[j]
                        if np.abs(a @ b - b @ a).max() > UNITARY_TOL:
                            raise ValueError(
                                f"lattice generator images {i},{j} do not commute")
            if isinstance(self.group, FreeProductCyclic):
                for i, u in enumerate(self._images):
                    power = np.linalg.matrix_power(u, self.group.orders[i])
                    if np.abs(power - np.eye(self.dim)).max() > UNITARY_TOL:
                        raise ValueError(
                            f"factor image {i} does not have order "
                            f"dividing {self.group.orders[i]}")

    # -- evaluation -----------------------------------------------------

    @property
    def is_trivial(self) -> bool:
        return self.kind == "trivial"

    def generator_unitary(self, i: int) -> np.ndarray:
        if self.is_trivial:
            return np.eye(self.dim, dtype=np.complex128)
        return self._images[i]

    def unitary(self, g: GroupElement) -> np.ndarray:
        """U_g obtained by walking the normal form of g."""
        if g.group != self.group:
            raise ValueError("element belongs to a different group")
        u = np.eye(self.dim, dtype=np.complex128)
        if self.is_trivial:
            return u
        if isinstance(self.group, FreeProductCyclic):
            for fac, exp in g.word:
                u = u @ np.linalg.matrix_power(self._images[fac], exp)
            return u
        if isinstance(self.group, FreeAbelian):
            for i, e in enumerate(g.word):
                base = self._images[i] if e > 0 else self._images[i].conj().T
                u = u @ np.linalg.matrix_power(base, abs(e))
            return u
        for letter in g.word:  # free group: signed 1-based indices
            img = self._images[abs(letter) - 1]
            u = u @ (img if letter > 0 else img.conj().T)
        return u

    def apply(self, g: GroupElement, a) -> np.ndarray:
        """alpha_g(a) = U_g a U_g^*."""
        a = as_coeff(a, self.dim)
        if self.is_trivial:
            return a
        u = self.unitary(g)
        return u @ a @ u.conj().T

    def __repr__(self):
        return f"GroupAction({self.group}, dim={self.dim}, kind={self.kind})"


def apply_action(action: GroupAction, g: GroupElement, a) -> np.ndarray:
    return action.apply(g, a)


# -- CLI / file parsing --------------------------------------------------

_COMPLEX_RE = re.compile(r"^[+-]?[\d.eE+-]*i?$")


def parse_complex(token: str) -> complex:
    """Parse a complex literal written with i as the imaginary unit."""
    t = token.strip().replace(" ", "")
    if not t:
        raise ValueError("empty complex literal")
    try:
        return complex(t.replace("i", "j"))
    except ValueError as exc:
        raise ValueError(f"bad complex literal {token!r}") from exc


def format_complex(z: complex) -> str:
    z = complex(z)
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def parse_matrix_blocks(text: str) -> list[np.ndarray]:
    """Parse blank-line separated matrices of whitespace-separated literals."""
    blocks: list[np.ndarray] = []
    rows: list[list[complex]] = []
    for raw in text.splitlines() + [""]:
        line = raw.strip()
        if not line or line.startswith("#"):
            if rows:
                width = len(rows[0])
                if any(len(r) != width for r in rows):
                    raise ValueError("ragged matrix block")
                blocks.append(np.array(rows, dtype=np.complex128))
                rows = []
            continue
        rows.append([parse_complex(tok) for tok in line.split()])
    return blocks


def parse_action_spec(text: str, group: Group) -> GroupAction:
    """Build an action from a spec string.

    Formats: ``trivial:n``; ``perm:n:g1=cycle(0,1)cycle(2,3),g2=...``;
    ``unitary:file=PATH`` with one matrix block per generator.
    """
    text = text.strip()
    m = re.fullmatch(r"trivial:(\d+)", text)
    if m:
        return GroupAction.trivial(group, int(m.group(1)))
    m = re.fullmatch(r"perm:(\d+):(.*)", text)
    if m:
        n = int(m.group(1))
        assignments: dict[int, tuple[int, ...]] = {}
        for part in m.group(2).split(","):
            part = part.strip()
            gm = re.fullmatch(r"g(\d+)=((?:cycle\([\d\s;]*\))*)", part)
            if not gm:
                raise ValueError(f"bad permutation assignment {part!r}")
            perm = tuple(range(n))
            for cyc in re.findall(r"cycle\(([\d\s;]*)\)", gm.group(2)):
                pts = [int(x) for x in re.split(r"[;\s]+", cyc.strip()) if x]
                if any(p >= n for p in pts) or len(set(pts)) != len(pts):
                    raise ValueError(f"bad cycle ({cyc}) for dimension {n}")
                cperm = list(range(n))
                for a, b in zip(pts, pts[1:] + pts[:1]):
                    cperm[a] = b
                perm = _compose(tuple(cperm), perm)
            assignments[int(gm.group(1))] = perm
        count = (len(group.orders) if isinstance(group, FreeProductCyclic)
                 else group.rank)
        perms = []
        for i in range(1, count + 1):
            perms.append(assignments.get(i, tuple(range(n))))
        return GroupAction.from_permutations(group, perms)
    m = re.fullmatch(r"unitary:file=(.+)", text)
    if m:
        blocks = parse_matrix_blocks(Path(m.group(1)).read_text())
        return GroupAction.from_unitaries(group, blocks)
    raise ValueError(f"bad action spec {text!r}")

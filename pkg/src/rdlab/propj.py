"""Geodesic-prefix factorizations with length control and solution counting.

For a group element g and a real split point s, ``prefix_u`` returns the
deterministic geodesic prefix u of floor(s) letters, so u has length in
(s-1, s] and the complementary suffix v = u^{-1} g has length |g| - floor(s).
``check_J_on_ball`` verifies, over a whole ball truncation, that these
splits stay inside their prescribed length windows and that every product
pair (a, b) factors through them as a = u c, b = c^{-1} v with c of length
close to the cancellation number of the pair.  ``count_solutions`` and
``max_N_on_ball`` measure the uniform bound on the number of (c, v)
factorizations of a fixed element.

Window violations are collected and reported, never raised: discovering
where the factorization property fails is part of the tool's job.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .groups import (
    DEFAULT_BUDGET,
    Group,
    GroupElement,
    SphereIndex,
    ball_index,
    cancellation_number,
)


@dataclass(frozen=True)
class JParameters:
    """Window widths (alpha, beta, gamma), count widths (mu, nu), bound N."""

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    mu: float = 0.0
    nu: float = 0.0
    N: int = 1

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "mu", "nu"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if self.N < 1:
            raise ValueError("N must be a positive integer")


@dataclass(frozen=True)
class JDecomposition:
    """One factorization a = u c, b = c^{-1} v of a product g = a b."""

    g: GroupElement
    s: float
    u: GroupElement
    v: GroupElement
    a: GroupElement | None = None
    b: GroupElement | None = None
    c: GroupElement | None = None
    p: int | None = None


def prefix_u(g: GroupElement, s: float) -> GroupElement:
    """The geodesic prefix of g with floor(s) letters.

    Deterministic in (g, s): free groups and free products take the normal
    form's leading letters; lattices spell coordinates in axis order.
    Requires 0 <= s < |g| + 1.
    """
    glen = g.length()
    if not 0 <= s < glen + 1:
        raise ValueError(f"split point {s} outside [0, {glen + 1})")
    take = math.floor(s)
    if take == 0:
        return g.group.identity()
    letters = g.group.letters_of(g)
    u = g.group.identity()
    for letter in letters[:take]:
        u = u * letter
    return u


def split_element(g: GroupElement, s: float) -> JDecomposition:
    """Split g = u v at the geodesic prefix of floor(s) letters."""
    u = prefix_u(g, s)
    return JDecomposition(g=g, s=s, u=u, v=u.inverse() * g)


def factor_pair(a: GroupElement, b: GroupElement,
                prefix_fn=prefix_u) -> JDecomposition:
    """Factor a pair through the prefix split of its product.

    With p the cancellation number of (a, b) and g = a b, the split point
    is |a| - p; then c := u^{-1} a satisfies a = u c and b = c^{-1} v
    exactly, and |c| is close to p whenever prefixes behave geodesically.
    """
    p = cancellation_number(a, b)
    g = a * b
    s = a.length() - p
    u = prefix_fn(g, s)
    c = u.inverse() * a
    v = u.inverse() * g
    return JDecomposition(g=g, s=s, u=u, v=v, a=a, b=b, c=c, p=p)


def _in_band(length: int, center: float, width: float) -> bool:
    return center - width <= length <= center + width


@dataclass
class JReport:
    """Outcome of a ball-truncated factorization check."""

    group: str
    radius: int
    params: JParameters
    passed: bool
    violations: list[dict] = field(default_factory=list)
    splits_checked: int = 0
    pairs_checked: int = 0


def check_J_on_ball(group: Group, radius: int, params: JParameters,
                    budget: int = DEFAULT_BUDGET,
                    prefix_fn=prefix_u) -> JReport:
    """Verify the prefix windows and pair factorizations over a ball.

    For every g in the ball and integer split 0 <= s <= |g| the prefix u
    must lie in the band [s - alpha, s + alpha] and the suffix v in the
    band around |g| + 1 - s widened by beta.  The nominal suffix index
    |g| + 1 - s sits one unit above the actual suffix length, so the
    window extends one extra unit downward; with that closure exact
    geodesic prefixes pass with all widths zero.

    For every pair (a, b) with |a| + |b| <= radius the connector
    c = u^{-1} a must lie in [p - gamma, p + gamma] for p the cancellation
    number, and the identities a = u c, b = c^{-1} v are asserted exactly.
    """
    index = ball_index(group, radius, budget)
    report = JReport(group=group.spec_string(), radius=radius, params=params,
                     passed=True)

    for g in index.elements:
        glen = g.length()
        for s in range(glen + 1):
            u = prefix_fn(g, s)
            v = u.inverse() * g
            report.splits_checked += 1
            if not _in_band(u.length(), s, params.alpha):
                report.violations.append({
                    "check": "u_window", "g": group.format_word(g), "s": s,
                    "u": group.format_word(u), "length": u.length(),
                    "window": (s - params.alpha, s + params.alpha),
                })
            center = glen + 1 - s
            lo, hi = center - params.beta - 1, center + params.beta
            if not lo <= v.length() <= hi:
                report.violations.append({
                    "check": "v_window", "g": group.format_word(g), "s": s,
                    "v": group.format_word(v), "length": v.length(),
                    "window": (lo, hi),
                })

    elements_by_len = [
        [g for g in index.elements if g.length() == k]
        for k in range(radius + 1)
    ]
    for la in range(radius + 1):
        for lb in range(radius + 1 - la):
            for a in elements_by_len[la]:
                for b in elements_by_len[lb]:
                    dec = factor_pair(a, b, prefix_fn)
                    report.pairs_checked += 1
                    if dec.u * dec.c != a or dec.c.inverse() * dec.v != b:
                        report.violations.append({
                            "check": "factorization", "a": group.format_word(a),
                            "b": group.format_word(b),
                        })
                    if not _in_band(dec.c.length(), dec.p, params.gamma):
                        report.violations.append({
                            "check": "c_window", "a": group.format_word(a),
                            "b": group.format_word(b), "p": dec.p,
                            "c": group.format_word(dec.c),
                            "length": dec.c.length(),
                            "window": (dec.p - params.gamma, dec.p + params.gamma),
                        })
    report.passed = not report.violations
    return report


def count_solutions(b: GroupElement, p: int, mu: float, nu: float,
                    index: SphereIndex | None = None,
                    budget: int = DEFAULT_BUDGET) -> int:
    """Count pairs (c, v) with c in the band around p, v = c b, |v| near |b| - p.

    Exact brute force over the candidate band [p - mu, p + mu]; the v
    length window is the closed band [|b| - p - nu, |b| - p + nu].
    """
    blen = b.length()
    if not 0 <= p <= blen:
        raise ValueError(f"p={p} outside [0, |b|={blen}]")
    c_hi = math.floor(p + mu)
    if index is None or index.radius < c_hi:
        index = ball_index(b.group, c_hi, budget)
    c_lo = max(0, math.ceil(p - mu))
    v_lo, v_hi = blen - p - nu, blen - p + nu
    count = 0
    for k in range(c_lo, c_hi + 1):
        for c in index.sphere(k):
            if v_lo <= (c * b).length() <= v_hi:
                count += 1
    return count


def max_N_on_ball(group: Group, radius: int, mu: float, nu: float,
                  budget: int = DEFAULT_BUDGET) -> int:
    """Largest solution count over all b in the ball and all 0 <= p <= |b|."""
    index = ball_index(group, math.floor(radius + mu), budget)
    best = 0
    for b in index.elements:
        if b.length() > radius:
            continue
        for p in range(b.length() + 1):
            best = max(best, count_solutions(b, p, mu, nu, index=index))
    return best

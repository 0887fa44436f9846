"""Seeded experiment runners for the rapid-decay inequality family.

Every verifier instantiates one inequality with its exact constants, runs
randomized trials drawn from per-trial seed streams, and emits one report
per trial.  The left side of every comparison is a certified lower bound
on an operator norm, so a VIOLATION verdict is a genuine counterexample
(modulo the stated tolerance) and never a truncation artifact.  Probes
use the same machinery for statements the source material leaves open or
withdraws: their findings are recorded, never raised.

Reports are deterministic functions of (spec, parameters): identical
seeds reproduce byte-identical JSON lines.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .coeffalg import GroupAction, op_norm, parse_action_spec
from .crossed import (
    CPElement,
    ExponentialDecay,
    IndicatorAnnulus,
    MultiplierSymbol,
    adjoint,
    column_norm,
    multiply_symbol,
    product,
    rd_rhs_mixed,
    rd_rhs_scalar,
    row_norm,
    triangle_bound,
    weighted_gram_norm,
)
from .groups import DEFAULT_BUDGET, FreeAbelian, FreeGroup, ball_index, growth_fit, parse_group_spec
from .propj import check_J_on_ball, JParameters, max_N_on_ball
from .repnorm import norm_lower, norm_lower_pi

VERDICT_TOL = 1e-6
DEFAULT_RADIUS_SLACK = 6


@dataclass
class TrialSpec:
    """Deterministic description of a randomized trial family."""

    group: str = "free:2"
    action: str = "trivial:1"
    coeffs: str = "gaussian"        # gaussian | unitary | rankone
    scale: float = 1.0
    support: str = "sphere"         # sphere | sphere_subset | ball_subset
    support_size: int | None = None
    trials: int = 50
    seed: int = 7
    radius_slack: int = DEFAULT_RADIUS_SLACK
    tol: float = 1e-6
    max_iter: int = 5000
    budget: int = DEFAULT_BUDGET

    def resolve(self):
        group = parse_group_spec(self.group)
        action = parse_action_spec(self.action, group)
        return group, action

    def rng(self, trial: int) -> np.random.Generator:
        # per-trial seed streams: adding trials never perturbs earlier ones
        return np.random.default_rng(np.random.SeedSequence((self.seed, trial)))


@dataclass
class InequalityReport:
    """One trial of one inequality, with certified-lower-bound semantics."""

    inequality_id: str
    trial: int
    seed: int
    group: str
    action: str
    n: int
    lhs: float
    rhs: float
    margin: float
    verdict: str
    probe: bool = False
    params: dict = field(default_factory=dict)
    estimate: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = asdict(self)
        payload["record"] = "report"
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _verdict(lhs: float, rhs: float) -> str:
    scale = max(1.0, abs(lhs), abs(rhs))
    return "VIOLATION" if lhs > rhs + VERDICT_TOL * scale else "consistent"


def _make_report(inequality_id, spec, trial, lhs, rhs, estimate_meta,
                 params, probe=False, n=None) -> InequalityReport:
    return InequalityReport(
        inequality_id=inequality_id,
        trial=trial,
        seed=spec.seed,
        group=spec.group,
        action=spec.action,
        n=n,
        lhs=lhs,
        rhs=rhs,
        margin=rhs - lhs,
        verdict=_verdict(lhs, rhs),
        probe=probe,
        params=params,
        estimate=estimate_meta,
    )


# -- samplers ---------------------------------------------------------------


def sample_coeff(rng: np.random.Generator, n: int, kind: str, scale: float) -> np.ndarray:
    if kind == "gaussian":
        m = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(2)
        return scale * m
    if kind == "unitary":
        z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        q, r = np.linalg.qr(z)
        return scale * (q * (np.diagonal(r) / np.abs(np.diagonal(r))))
    if kind == "rankone":
        u = rng.normal(size=n) + 1j * rng.normal(size=n)
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        return scale * np.outer(u, v.conj())
    raise ValueError(f"unknown coefficient sampler {kind!r}")


def sample_support(rng, spec: TrialSpec, group, k: int):
    if spec.support == "sphere":
        return list(ball_index(group, k, spec.budget).sphere(k))
    if spec.support == "sphere_subset":
        sphere = ball_index(group, k, spec.budget).sphere(k)
        size = min(spec.support_size or max(1, len(sphere) // 2), len(sphere))
        picks = rng.choice(len(sphere), size=size, replace=False)
        return [sphere[i] for i in sorted(picks)]
    if spec.support == "ball_subset":
        index = ball_index(group, k, spec.budget)
        size = min(spec.support_size or max(2, len(index.elements) // 3),
                   len(index.elements))
        picks = rng.choice(len(index.elements), size=size, replace=False)
        return [index.elements[i] for i in sorted(picks)]
    raise ValueError(f"unknown support sampler {spec.support!r}")


def sample_element(rng, spec: TrialSpec, action: GroupAction, k: int) -> CPElement:
    support = sample_support(rng, spec, action.group, k)
    n = action.dim
    return CPElement(action, {
        g: sample_coeff(rng, n, spec.coeffs, spec.scale) for g in support
    })


# -- certified left sides ---------------------------------------------------


def certified_lhs(X: CPElement, spec: TrialSpec, radius: int | None = None):
    """max of the compression bound and the representation-free bound."""
    if X.is_zero():
        return 0.0, {"R": 0, "method": "zero", "iterations": 0, "residual": 0.0}
    R = radius if radius is not None else X.max_length() + spec.radius_slack
    est = norm_lower(X, R, tol=spec.tol, max_iter=spec.max_iter,
                     seed=spec.seed, budget=spec.budget)
    candidates = [CPElement.unit(X.action)]
    adj = adjoint(X)
    if not adj.is_zero():
        candidates.append(adj)
    pi = norm_lower_pi(X, candidates)
    lhs = max(est.value, pi)
    meta = {"R": est.R, "method": est.method, "iterations": est.iterations,
            "residual": est.residual, "pi_bound": pi}
    return lhs, meta


# -- verifiers --------------------------------------------------------------


def verify_prop61(spec: TrialSpec, k: int, N: int | None = None,
                  radius: int | None = None) -> list[InequalityReport]:
    """||X|| <= N (1+k) (sum_{|g|=k} ||X_g||^2)^(1/2) for X supported on C_k."""
    group, action = spec.resolve()
    if N is None:
        if not isinstance(group, FreeGroup):
            raise ValueError("N is required unless the group is free")
        N = 1
    ineq_id = "cor62_free" if isinstance(group, FreeGroup) and N == 1 else "prop61"
    reports = []
    for trial in range(spec.trials):
        rng = spec.rng(trial)
        X = sample_element(rng, spec, action, k)
        lhs, meta = certified_lhs(X, spec, radius)
        rhs = N * (1 + k) * rd_rhs_scalar(X, 0.0)
        reports.append(_make_report(
            ineq_id, spec, trial, lhs, rhs, meta,
            {"k": k, "N": N, "support_size": len(X.support())}, n=action.dim))
    return reports


def verify_thm64(spec: TrialSpec, M: float, k_max: int = 3,
                 radius: int | None = None) -> list[InequalityReport]:
    """||X|| <= M (sum_g (1+|g|)^4 ||X_g||^2)^(1/2) for mixed supports in a ball."""
    group, action = spec.resolve()
    ineq_id = ("cor65_free"
               if isinstance(group, FreeGroup) and M == 2.0 else "thm64")
    saved = spec.support
    if spec.support == "sphere":
        spec = TrialSpec(**{**asdict(spec), "support": "ball_subset"})
    reports = []
    for trial in range(spec.trials):
        rng = spec.rng(trial)
        X = sample_element(rng, spec, action, k_max)
        lhs, meta = certified_lhs(X, spec, radius)
        rhs = M * rd_rhs_scalar(X, 2.0)
        reports.append(_make_report(
            ineq_id, spec, trial, lhs, rhs, meta,
            {"k_max": k_max, "M": M, "support_size": len(X.support()),
             "support_mode": saved}, n=action.dim))
    return reports


def polygrowth_constant(C: float) -> float:
    """M = pi sqrt(2 C) / sqrt(6), the polynomial-growth constant."""
    return math.pi * math.sqrt(2.0 * C) / math.sqrt(6.0)


def verify_polygrowth(spec: TrialSpec, support_radius: int = 4,
                      fit_radius: int = 8,
                      radius: int | None = None) -> list[InequalityReport]:
    """Both weighted-positive-sum bounds for lattice crossed products.

    Uses the fitted growth data (C, s) and the constant M = pi sqrt(2C)/sqrt(6);
    the weight inside the positive sums is (1+|g|)^(s+2).
    """
    group, action = spec.resolve()
    if not isinstance(group, FreeAbelian):
        raise ValueError("polynomial-growth verification needs a lattice group")
    fit = growth_fit(ball_index(group, fit_radius, spec.budget))
    if not fit.polynomial:
        raise ValueError("group data flagged non-polynomial within the window")
    M = polygrowth_constant(fit.C)
    exponent = fit.s + 2.0
    if spec.support == "sphere":
        spec = TrialSpec(**{**asdict(spec), "support": "ball_subset"})
    reports = []
    for trial in range(spec.trials):
        rng = spec.rng(trial)
        X = sample_element(rng, spec, action, support_radius)
        lhs, meta = certified_lhs(X, spec, radius)
        for ineq_id, side in (("thm5_polygrowth_op", "column"),
                              ("thm5_polygrowth_row", "row")):
            rhs = M * weighted_gram_norm(X, exponent, side)
            reports.append(_make_report(
                ineq_id, spec, trial, lhs, rhs, meta,
                {"C": fit.C, "s": fit.s, "M": M,
                 "support_size": len(X.support())}, n=action.dim))
    return reports


def verify_hagprop(spec: TrialSpec, k: int, l: int, m: int, N: int = 1,
                   radius: int | None = None) -> list[InequalityReport]:
    """Both truncated-product bounds for X on C_k, Y on C_l, cut to C_m."""
    group, action = spec.resolve()
    reports = []
    for trial in range(spec.trials):
        rng = spec.rng(trial)
        X = sample_element(rng, spec, action, k)
        Y = sample_element(rng, spec, action, l)
        Z = multiply_symbol(IndicatorAnnulus(m), product(X, Y))
        lhs, meta = certified_lhs(Z, spec, radius)
        rhs_a = N * rd_rhs_scalar(X, 0.0) * weighted_gram_norm(Y, 0.0, "column")
        rhs_b = N * weighted_gram_norm(X, 0.0, "row") * rd_rhs_scalar(Y, 0.0)
        params = {"k": k, "l": l, "m": m, "N": N,
                  "supports": [len(X.support()), len(Y.support())]}
        reports.append(_make_report("cor63_hagprop_a", spec, trial, lhs,
                                    rhs_a, meta, params, n=action.dim))
        reports.append(_make_report("cor63_hagprop_b", spec, trial, lhs,
                                    rhs_b, meta, params, n=action.dim))
    return reports


def verify_multiplier(spec: TrialSpec, phi: MultiplierSymbol, C: float,
                      s: float, support_radius: int = 4,
                      radius: int | None = None) -> list[InequalityReport]:
    """||M_phi X|| <= 2 C m ||X||-upper, with m = sup |phi(g)| (2+|g|)^(s+1).

    The certified upper bound sum_g ||X_g|| stands in for ||X||; the sharper
    uncertified ratio against the lower bound of X is recorded as a
    diagnostic.
    """
    group, action = spec.resolve()
    m_const = phi.weighted_sup(s)
    if not math.isfinite(m_const):
        raise ValueError("symbol has infinite weighted supremum")
    if spec.support == "sphere":
        spec = TrialSpec(**{**asdict(spec), "support": "ball_subset"})
    reports = []
    for trial in range(spec.trials):
        rng = spec.rng(trial)
        X = sample_element(rng, spec, action, support_radius)
        MX = multiply_symbol(phi, X)
        lhs, meta = certified_lhs(MX, spec, radius)
        rhs = 2.0 * C * m_const * triangle_bound(X)
        x_lower, _ = certified_lhs(X, spec, radius)
        params = {"C": C, "s": s, "m": m_const,
                  "symbol": repr(phi),
                  "diag_ratio": (lhs / x_lower if x_lower > 0 else 0.0),
                  "support_size": len(X.support())}
        reports.append(_make_report("prop7_multiplier", spec, trial, lhs,
                                    rhs, meta, params, n=action.dim))
    return reports


def multiplier_continuity(spec: TrialSpec, lambdas, support_radius: int = 4,
                          radius: int | None = None) -> list[tuple[float, float]]:
    """Lower estimates of ||M_{phi_lam} X - X|| on one fixed X, per lambda."""
    group, action = spec.resolve()
    rng = spec.rng(0)
    X = sample_element(rng, spec, action, support_radius)
    out = []
    for lam in lambdas:
        D = multiply_symbol(ExponentialDecay(lam), X) - X
        val, _ = certified_lhs(D, spec, radius)
        out.append((lam, val))
    return out


def verify_zprop(spec: TrialSpec, support_radius: int = 10,
                 radius: int | None = None) -> list[InequalityReport]:
    """||x|| <= (pi^2/3 - 1)^(1/2) (sum |x_n|^2 (1+|n|)^2)^(1/2) on the line."""
    group, action = spec.resolve()
    if not (isinstance(group, FreeAbelian) and group.rank == 1 and action.dim == 1):
        raise ValueError("this bound is specific to scalar coefficients on the line")
    const = math.sqrt(math.pi ** 2 / 3.0 - 1.0)
    if spec.support == "sphere":
        spec = TrialSpec(**{**asdict(spec), "support": "ball_subset"})
    reports = []
    for trial in range(spec.trials):
        rng = spec.rng(trial)
        X = sample_element(rng, spec, action, support_radius)
        lhs, meta = certified_lhs(X, spec, radius)
        rhs = const * rd_rhs_scalar(X, 1.0)
        reports.append(_make_report(
            "zprop_section4", spec, trial, lhs, rhs, meta,
            {"const": const, "support_size": len(X.support())}, n=action.dim))
    return reports


# -- probes -----------------------------------------------------------------


def probe_desired(spec: TrialSpec, k: int, l: int, m: int, N: int = 1,
                  radius: int | None = None) -> list[InequalityReport]:
    """The open mixed row/column form of the truncated-product bound.

    A VIOLATION here is a reportable finding, not a test failure; reports
    carry the probe flag and the minimum margin is of primary interest.
    """
    group, action = spec.resolve()
    reports = []
    for trial in range(spec.trials):
        rng = spec.rng(trial)
        X = sample_element(rng, spec, action, k)
        Y = sample_element(rng, spec, action, l)
        Z = multiply_symbol(IndicatorAnnulus(m), product(X, Y))
        lhs, meta = certified_lhs(Z, spec, radius)
        rhs = N * weighted_gram_norm(X, 0.0, "row") * weighted_gram_norm(Y, 0.0, "column")
        reports.append(_make_report(
            "probe_desired", spec, trial, lhs, rhs, meta,
            {"k": k, "l": l, "m": m, "N": N}, probe=True, n=action.dim))
    return reports


def probe_mixed(spec: TrialSpec, C: float, s: float, k_max: int = 3,
                radius: int | None = None) -> list[InequalityReport]:
    """The withdrawn sphere-summed mixed bound, margin-mapped on free groups."""
    group, action = spec.resolve()
    if not isinstance(group, FreeGroup):
        raise ValueError("the mixed-type probe targets free groups")
    if spec.support == "sphere":
        spec = TrialSpec(**{**asdict(spec), "support": "ball_subset"})
    reports = []
    for trial in range(spec.trials):
        rng = spec.rng(trial)
        X = sample_element(rng, spec, action, k_max)
        lhs, meta = certified_lhs(X, spec, radius)
        rhs = C * rd_rhs_mixed(X, s)
        reports.append(_make_report(
            "probe_mixed", spec, trial, lhs, rhs, meta,
            {"C": C, "s": s, "k_max": k_max,
             "support_size": len(X.support())}, probe=True, n=action.dim))
    return reports


# -- report emission --------------------------------------------------------


def config_header(config: dict) -> str:
    payload = dict(config)
    payload["record"] = "config"
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def reports_to_jsonl(reports, config: dict | None = None) -> str:
    lines = []
    if config is not None:
        lines.append(config_header(config))
    lines.extend(r.to_json() for r in reports)
    return "\n".join(lines) + "\n"


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["inequality_id", "seed", "trial", "lhs", "rhs",
                     "margin", "verdict", "R", "residual"])
    for r in reports:
        writer.writerow([
            r.inequality_id, r.seed, r.trial, repr(r.lhs), repr(r.rhs),
            repr(r.margin), r.verdict,
            r.estimate.get("R", ""), repr(r.estimate.get("residual", 0.0)),
        ])
    return buf.getvalue()


def summarize(reports) -> str:
    if not reports:
        return "no reports"
    by_id: dict[str, list[InequalityReport]] = {}
    for r in reports:
        by_id.setdefault(r.inequality_id, []).append(r)
    lines = [f"{'inequality':<20} {'trials':>6} {'violations':>10} "
             f"{'min margin':>12} {'max lhs':>10}"]
    for ineq_id, rs in sorted(by_id.items()):
        violations = sum(1 for r in rs if r.verdict == "VIOLATION")
        min_margin = min(r.margin for r in rs)
        max_lhs = max(r.lhs for r in rs)
        lines.append(f"{ineq_id:<20} {len(rs):>6} {violations:>10} "
                     f"{min_margin:>12.6g} {max_lhs:>10.6g}")
    return "\n".join(lines)


def count_violations(reports, include_probes: bool = False) -> int:
    return sum(1 for r in reports
               if r.verdict == "VIOLATION" and (include_probes or not r.probe))

"""Residual-based classification of (alpha, beta)-metrics.

Two quantitative tests drive everything:

* Douglas test: G^i y^j - G^j y^i must be a homogeneous cubic polynomial
  in y.  We fit it by linear least squares over a probe set; the normalized
  fit residual doubles as a distance from the Douglas class.
* Hamel test: F_{x^m y^l} y^m - F_{x^l} must vanish.  The normalized RMS
  over probes is the distance from projective flatness.

The structural characterization conditions are checked by fitting tensor
or spray ansaetze with free scalars (tau, k2, rho_i) always fitted, never
supplied.  Verdicts are tri-state with a 10x hysteresis band: residual
tests cannot certify, only falsify or strongly corroborate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import ConfigurationError, DomainError, GeometryError, PreconditionError
from .jets import TwoArgField, jet_point, mixed_xy_derivatives
from .riemann import CovariantPackage, covariant_package
from .alphabeta import (
    AlphaBetaMetric,
    spray_full,
    spray_generic,
    spray_invariants,
)

__all__ = [
    "ProbeSet",
    "make_probe_set",
    "sphere_probes",
    "ClassificationReport",
    "ConditionReport",
    "CONDITION_TAGS",
    "verdict_of",
    "douglas_residual",
    "douglas_residual_direct",
    "hamel_residual",
    "hamel_residual_direct",
    "projective_factor",
    "flag_curvature_projective",
    "fit_tensor_ansatz",
    "check_condition",
]

DEFAULT_MARGIN = 0.05
DEFAULT_DELTA_MIN = 0.02

# default tolerances; pure policy, every report records the values used
DEFAULT_TOLERANCES = {
    "douglas": 1e-8,
    "hamel": 1e-8,
    "condition": 1e-8,
    "spray_crossval": 1e-6,
}


@dataclass(frozen=True)
class ProbeSet:
    """Unit directions at a base point, sampled off the singular locus."""

    x: tuple
    ys: np.ndarray
    seed: int
    margin: float

    @property
    def count(self):
        return int(self.ys.shape[0])


def sphere_probes(x, n, count, seed) -> ProbeSet:
    """Uniform unit directions with no locus filtering (regular metrics)."""
    rng = np.random.default_rng(seed)
    vs = rng.standard_normal((count, n))
    ys = vs / np.linalg.norm(vs, axis=1)[:, None]
    return ProbeSet(x=tuple(float(v) for v in x), ys=ys, seed=int(seed), margin=0.0)


def make_probe_set(
    M: AlphaBetaMetric,
    x,
    count,
    seed,
    margin=DEFAULT_MARGIN,
    delta_min=DEFAULT_DELTA_MIN,
    randers_min=0.01,
) -> ProbeSet:
    """Rejection-sample unit directions respecting the singular-locus margin.

    A direction is kept when |s|/b >= margin (s = beta/alpha), the spray
    invariants are defined there, and both Delta and phi - s phi' are
    bounded away from zero, so downstream solves stay well conditioned.
    """
    n = M.n
    rng = np.random.default_rng(seed)
    a = M.alpha.spd_matrix(x)
    b = M.beta.covector(x)
    ainv = np.linalg.inv(a)
    b2 = float(b @ ainv @ b)
    if b2 <= 0.0:
        raise DomainError(f"b = 0 at {tuple(float(v) for v in x)}")
    bnorm = math.sqrt(b2)
    ys = []
    attempts = 0
    max_attempts = 500 * count
    while len(ys) < count:
        attempts += 1
        if attempts > max_attempts:
            raise ConfigurationError(
                f"probe sampling stalled after {max_attempts} attempts "
                f"(margin {margin}, delta_min {delta_min})"
            )
        v = rng.standard_normal(n)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            continue
        y = v / norm
        alpha = math.sqrt(float(y @ a @ y))
        s = float(b @ y) / alpha
        if abs(s) / bnorm < margin:
            continue
        try:
            pv, pd1, _ = M.phi.jet(s)
            inv = spray_invariants(M.phi, s, b2)
        except DomainError:
            continue
        if abs(inv.delta) < delta_min:
            continue
        if abs(pv - s * pd1) < randers_min * max(1.0, abs(pv)):
            continue
        ys.append(y)
    return ProbeSet(
        x=tuple(float(v) for v in x),
        ys=np.asarray(ys),
        seed=int(seed),
        margin=float(margin),
    )


def verdict_of(residual: float, tol: float) -> str:
    """Tri-state verdict: yes below tol, no above 10x tol, else inconclusive."""
    if not math.isfinite(residual):
        return "inconclusive"
    if residual < tol:
        return "yes"
    if residual > 10.0 * tol:
        return "no"
    return "inconclusive"


def _cubic_monomials(n):
    return list(itertools.combinations_with_replacement(range(n), 3))


def _cubic_design(ys, monomials):
    N = ys.shape[0]
    design = np.empty((N, len(monomials)))
    for c, (i, j, k) in enumerate(monomials):
        design[:, c] = ys[:, i] * ys[:, j] * ys[:, k]
    return design


def _fit_ratio(design, d, floor=0.0):
    """Normalized residual of a least-squares fit.

    The 0/0 -> 0 rule extends to working precision: data below ``floor``
    (a caller-supplied noise scale) counts as identically zero.
    """
    rms_d = math.sqrt(float(np.mean(d * d)))
    if rms_d <= floor:
        return 0.0
    coef, *_ = np.linalg.lstsq(design, d, rcond=None)
    res = design @ coef - d
    return math.sqrt(float(np.mean(res * res))) / rms_d


def _spray_table(M, probes, cov):
    G = np.empty((probes.count, M.n))
    for t, y in enumerate(probes.ys):
        G[t] = spray_full(M, probes.x, y, cov=cov)
    return G


def douglas_residual(M: AlphaBetaMetric, probes: ProbeSet) -> float:
    """Worst normalized cubic-fit residual of G^i y^j - G^j y^i over probes."""
    n = M.n
    monomials = _cubic_monomials(n)
    if probes.count < len(monomials):
        raise ConfigurationError(
            f"{probes.count} probes underdetermine the {len(monomials)} "
            "homogeneous cubic monomials"
        )
    cov = covariant_package(M.alpha, M.beta, probes.x)
    G = _spray_table(M, probes, cov)
    design = _cubic_design(probes.ys, monomials)
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d = G[:, i] * probes.ys[:, j] - G[:, j] * probes.ys[:, i]
            worst = max(worst, _fit_ratio(design, d))
    return worst


def douglas_residual_direct(M: AlphaBetaMetric, probes: ProbeSet) -> float:
    """Redundant Douglas test on the covariant-data side of the identity.

    Fits alpha Q (s^i_0 y^j - s^j_0 y^i) + Psi (-2 alpha Q s_0 + r_00)
    (b^i y^j - b^j y^i) by homogeneous cubics; must agree with
    ``douglas_residual`` in verdict since the two sides differ by the
    polynomial spray part of alpha.
    """
    n = M.n
    monomials = _cubic_monomials(n)
    if probes.count < len(monomials):
        raise ConfigurationError("too few probes for the cubic fit")
    cov = covariant_package(M.alpha, M.beta, probes.x)
    W = np.empty((probes.count, n))
    for t, y in enumerate(probes.ys):
        alpha = math.sqrt(float(y @ cov.a @ y))
        s = float(cov.b_lo @ y) / alpha
        inv = spray_invariants(M.phi, s, cov.b2)
        s_i0 = cov.a_inv @ (cov.s @ y)
        s0 = float(cov.s_vec @ y)
        r00 = float(y @ cov.r @ y)
        common = -2.0 * alpha * inv.Q * s0 + r00
        W[t] = alpha * inv.Q * s_i0 + inv.psi * common * cov.b_up
    design = _cubic_design(probes.ys, monomials)
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d = W[:, i] * probes.ys[:, j] - W[:, j] * probes.ys[:, i]
            worst = max(worst, _fit_ratio(design, d))
    return worst


def _as_field(M) -> TwoArgField:
    if isinstance(M, AlphaBetaMetric):
        return M.F_field()
    if isinstance(M, TwoArgField):
        return M
    raise ConfigurationError(f"cannot take a Hamel residual of {type(M).__name__}")


def hamel_residual(M: Union[AlphaBetaMetric, TwoArgField], probes: ProbeSet) -> float:
    """Normalized RMS of the Hamel defect F_{x^m y^l} y^m - F_{x^l}."""
    F = _as_field(M)
    num = 0.0
    den = 0.0
    for y in probes.ys:
        _, fx, _, fxy = mixed_xy_derivatives(F, probes.x, y)
        h = y @ fxy - fx
        num += float(h @ h)
        den += float(fx @ fx)
    if den == 0.0:
        return 0.0
    return math.sqrt(num / den)


def hamel_residual_direct(M: AlphaBetaMetric, probes: ProbeSet) -> float:
    """Redundant projective-flatness test via the covariant-data identity.

    Checks (a_ml alpha^2 - y_m y_l) G^m_alpha + alpha^3 Q s_{l0}
    + Psi alpha (-2 alpha Q s_0 + r_00)(alpha b_l - s y_l) = 0, normalized
    by the magnitude of its summands.
    """
    cov = covariant_package(M.alpha, M.beta, probes.x)
    num = 0.0
    den = 0.0
    for y in probes.ys:
        alpha2 = float(y @ cov.a @ y)
        alpha = math.sqrt(alpha2)
        s = float(cov.b_lo @ y) / alpha
        inv = spray_invariants(M.phi, s, cov.b2)
        g_alpha = 0.5 * np.einsum("ijk,j,k->i", cov.gamma, y, y)
        ylow = cov.a @ y
        t1 = alpha2 * (g_alpha @ cov.a) - float(g_alpha @ ylow) * ylow
        t2 = alpha ** 3 * inv.Q * (cov.s @ y)
        s0 = float(cov.s_vec @ y)
        r00 = float(y @ cov.r @ y)
        common = -2.0 * alpha * inv.Q * s0 + r00
        t3 = inv.psi * alpha * common * (alpha * cov.b_lo - s * ylow)
        resid = t1 + t2 + t3
        num += float(resid @ resid)
        den += float(np.sum((np.abs(t1) + np.abs(t2) + np.abs(t3)) ** 2))
    if den == 0.0:
        return 0.0
    return math.sqrt(num / den)


def projective_factor(M: AlphaBetaMetric, x, y) -> float:
    """Hamel projective factor P = F_{x^m} y^m / (2 F)."""
    y = np.asarray(y, dtype=float)
    xj = jet_point(x, np.eye(M.n))
    F = M.F_jets(xj, [float(v) for v in y])
    if F.value == 0.0:
        raise DomainError(f"F = 0 at y={tuple(y)}", point=tuple(float(v) for v in x))
    return float(F.grad @ y) / (2.0 * F.value)


def flag_curvature_projective(
    M: AlphaBetaMetric,
    x,
    y,
    probes: Optional[ProbeSet] = None,
    check: bool = True,
    hamel_tol: float = 1e-6,
) -> float:
    """Scalar flag curvature K = (P^2 - y^m dP/dx^m) / F^2 of a projectively
    flat metric, reduced to second x-derivatives of F:

        K = (3 P^2 - y^T F_xx y / (2 F)) / F^2.

    Refuses to run when the Hamel residual at x exceeds ``hamel_tol``.
    """
    y = np.asarray(y, dtype=float)
    if check:
        pr = probes or make_probe_set(M, x, 24, seed=1234)
        res = hamel_residual(M, pr)
        if res > hamel_tol:
            raise PreconditionError(
                f"metric is not projectively flat at {tuple(float(v) for v in x)}: "
                f"Hamel residual {res:.3e} > {hamel_tol:.1e}"
            )
    xj = jet_point(x, np.eye(M.n))
    F = M.F_jets(xj, [float(v) for v in y])
    if F.value == 0.0:
        raise DomainError(f"F = 0 at y={tuple(y)}", point=tuple(float(v) for v in x))
    P = float(F.grad @ y) / (2.0 * F.value)
    quad = float(y @ F.hess @ y)
    return (3.0 * P * P - quad / (2.0 * F.value)) / (F.value * F.value)


def fit_tensor_ansatz(T, basis):
    """Least-squares coefficients of T over a basis of symmetric matrices.

    Returns (coefficients, residual) with the residual normalized by the
    Frobenius norm of T (0/0 -> 0).  The basis must be linearly independent,
    checked through the Gram determinant of the normalized elements.
    """
    T = np.asarray(T, dtype=float)
    vecs = [np.asarray(B, dtype=float).ravel() for B in basis]
    if not vecs:
        raise ConfigurationError("empty ansatz basis")
    norms = [float(np.linalg.norm(v)) for v in vecs]
    if any(nv == 0.0 for nv in norms):
        raise ConfigurationError("ansatz basis contains a zero element")
    unit = np.stack([v / nv for v, nv in zip(vecs, norms)], axis=0)
    gram = unit @ unit.T
    if abs(np.linalg.det(gram)) <= 1e-12:
        raise ConfigurationError("ansatz basis is linearly dependent")
    A = np.stack(vecs, axis=1)
    t = T.ravel()
    coef, *_ = np.linalg.lstsq(A, t, rcond=None)
    nt = float(np.linalg.norm(t))
    if nt == 0.0:
        return coef, 0.0
    res = float(np.linalg.norm(A @ coef - t))
    return coef, res / nt


# -- structural condition checks ----------------------------------------------

CONDITION_TAGS = (
    "s-wedge",
    "nabla-ansatz",
    "r-ansatz",
    "spray-kropina",
    "spray-closed",
    "spray-open",
)


@dataclass(frozen=True)
class ConditionReport:
    """Residual and fitted scalars for one structural condition at one point."""

    condition: str
    residual: float
    fitted: dict
    verdict: str
    tolerance: float


def _frob(a):
    return float(np.linalg.norm(np.asarray(a, dtype=float)))


def _check_s_wedge(M, cov):
    b2 = cov.b2
    model = (np.outer(cov.b_lo, cov.s_vec) - np.outer(cov.s_vec, cov.b_lo)) / b2
    ns = _frob(cov.s)
    if ns == 0.0:
        return 0.0, {}
    return _frob(cov.s - model) / ns, {}


def _check_nabla_ansatz(M, cov):
    m = M.phi.exponent
    b2 = cov.b2
    basis = [b2 * cov.a, np.outer(cov.b_lo, cov.b_lo)]
    names = ["metric", "bb"]
    sym_bs = np.outer(cov.b_lo, cov.s_vec) + np.outer(cov.s_vec, cov.b_lo)
    if _frob(sym_bs) > 1e-14 * max(1.0, _frob(cov.nabla)):
        basis.append(sym_bs)
        names.append("bs")
    if _frob(cov.nabla) == 0.0:
        return 0.0, {"tau": 0.0, "k2": 0.0}
    coef, residual = fit_tensor_ansatz(cov.nabla, basis)
    tau = float(coef[0]) / (2.0 * m)
    if abs(tau) > 1e-12:
        k2 = (-float(coef[1]) / (2.0 * tau) - (m + 1.0)) / b2
    else:
        k2 = float("nan")
    fitted = {"tau": tau, "k2": k2}
    if len(coef) > 2:
        fitted["bs_coeff"] = float(coef[2])
    return residual, fitted


def _check_r_ansatz(M, cov):
    m = M.phi.exponent
    k = M.phi.k_term
    b2 = cov.b2
    fixed = (
        -(m + 1.0 + 2.0 * k * b2)
        / ((m - 1.0) * b2)
        * (np.outer(cov.b_lo, cov.s_vec) + np.outer(cov.s_vec, cov.b_lo))
    )
    target = cov.r - fixed
    scale = max(_frob(cov.r), _frob(target))
    if scale == 0.0:
        return 0.0, {"tau": 0.0}
    basis = [
        2.0 * (m * b2 * cov.a - (m + 1.0 + k * b2) * np.outer(cov.b_lo, cov.b_lo))
    ]
    coef, _ = fit_tensor_ansatz(target, basis)
    tau = float(coef[0])
    model = tau * basis[0]
    residual = _frob(target - model) / scale
    return residual, {"tau": tau}


def _spray_condition_fit(M, cov, probes, tau_column, fixed_terms):
    """Shared least-squares core of the spray-type conditions.

    Solves G_alpha(x, y) = rho_j y^j y^i + tau * tau_column(y) + fixed(y)
    for the free 1-form rho (and tau when a column is supplied).
    """
    n = M.n
    N = probes.count
    unknowns = n + (1 if tau_column is not None else 0)
    if N * n < unknowns or N < 4:
        raise ConfigurationError(
            f"{N} probes underdetermine the spray ansatz with {unknowns} unknowns"
        )
    rows = N * n
    A = np.zeros((rows, unknowns))
    target = np.empty(rows)
    g_scale = 0.0
    fixed_scale = 0.0
    for t, y in enumerate(probes.ys):
        g_alpha = 0.5 * np.einsum("ijk,j,k->i", cov.gamma, y, y)
        fix = fixed_terms(y)
        block = slice(t * n, (t + 1) * n)
        for j in range(n):
            A[block, j] = y[j] * y
        if tau_column is not None:
            A[block, n] = tau_column(y)
        target[block] = g_alpha - fix
        g_scale += float(g_alpha @ g_alpha)
        fixed_scale += float(fix @ fix)
    scale = math.sqrt(max(g_scale, fixed_scale) / rows)
    coef, *_ = np.linalg.lstsq(A, target, rcond=None)
    res = A @ coef - target
    rms = math.sqrt(float(np.mean(res * res)))
    if scale == 0.0:
        residual = 0.0 if rms == 0.0 else float("inf")
    else:
        residual = rms / scale
    fitted = {"rho": [float(v) for v in coef[:n]]}
    if tau_column is not None:
        fitted["tau"] = float(coef[n])
    return residual, fitted


def _alpha2_beta(cov, y):
    alpha2 = float(y @ cov.a @ y)
    beta = float(cov.b_lo @ y)
    return alpha2, beta


def _check_spray_kropina(M, cov, probes):
    c = M.phi.linear_coefficient
    b2 = cov.b2

    def fixed(y):
        alpha2, beta = _alpha2_beta(cov, y)
        r00 = float(y @ cov.r @ y)
        return (
            -r00 / (2.0 * b2) * cov.b_up
            - (alpha2 - c * beta * beta) / (2.0 * b2) * cov.s_up
        )

    return _spray_condition_fit(M, cov, probes, None, fixed)


def _check_spray_closed(M, cov, probes):
    m = M.phi.exponent
    k2 = M.phi.k_term

    def tau_col(y):
        alpha2, beta = _alpha2_beta(cov, y)
        return -(m * alpha2 - k2 * beta * beta) * cov.b_up

    def fixed(y):
        return np.zeros(M.n)

    return _spray_condition_fit(M, cov, probes, tau_col, fixed)


def _check_spray_open(M, cov, probes):
    m = M.phi.exponent
    k = M.phi.k_term
    b2 = cov.b2

    def tau_col(y):
        alpha2, beta = _alpha2_beta(cov, y)
        return -(m * alpha2 - k * beta * beta) * cov.b_up

    def fixed(y):
        alpha2, beta = _alpha2_beta(cov, y)
        s0 = float(cov.s_vec @ y)
        return (
            2.0 * k * beta * s0 / ((m - 1.0) * b2) * cov.b_up
            - (m * alpha2 + k * beta * beta) / ((m - 1.0) * b2) * cov.s_up
        )

    return _spray_condition_fit(M, cov, probes, tau_col, fixed)


def check_condition(
    M: AlphaBetaMetric,
    which: str,
    x,
    probes: Optional[ProbeSet] = None,
    tol: float = DEFAULT_TOLERANCES["condition"],
) -> ConditionReport:
    """Check one structural condition at x; spray conditions need probes."""
    cov = covariant_package(M.alpha, M.beta, x)
    if which == "s-wedge":
        residual, fitted = _check_s_wedge(M, cov)
    elif which == "nabla-ansatz":
        residual, fitted = _check_nabla_ansatz(M, cov)
    elif which == "r-ansatz":
        residual, fitted = _check_r_ansatz(M, cov)
    elif which in ("spray-kropina", "spray-closed", "spray-open"):
        if probes is None:
            raise ConfigurationError(f"condition {which!r} needs a probe set")
        handler = {
            "spray-kropina": _check_spray_kropina,
            "spray-closed": _check_spray_closed,
            "spray-open": _check_spray_open,
        }[which]
        residual, fitted = handler(M, cov, probes)
    else:
        raise ConfigurationError(
            f"unknown condition {which!r}; expected one of {CONDITION_TAGS}"
        )
    return ConditionReport(
        condition=which,
        residual=float(residual),
        fitted=fitted,
        verdict=verdict_of(residual, tol),
        tolerance=float(tol),
    )


# -- report --------------------------------------------------------------------


def _fmt(v) -> str:
    return f"{float(v):.15g}"


@dataclass
class ClassificationReport:
    """Residuals, fitted scalars, verdicts and probe metadata for one run."""

    label: str
    command: str
    x: tuple
    residuals: dict
    fitted: dict
    verdicts: dict
    tolerances: dict
    probe_count: int
    probe_seed: int
    probe_margin: float
    verdict: str = "inconclusive"

    def to_flat_dict(self) -> dict:
        """Flat key-value form; every number is a 15-significant-digit string."""
        out = {
            "label": self.label,
            "command": self.command,
            "verdict": self.verdict,
            "probes.count": str(self.probe_count),
            "probes.seed": str(self.probe_seed),
            "probes.margin": _fmt(self.probe_margin),
        }
        for i, v in enumerate(self.x):
            out[f"x.{i}"] = _fmt(v)
        for name in sorted(self.residuals):
            out[f"residual.{name}"] = _fmt(self.residuals[name])
        for name in sorted(self.verdicts):
            out[f"verdict.{name}"] = self.verdicts[name]
        for name in sorted(self.tolerances):
            out[f"tolerance.{name}"] = _fmt(self.tolerances[name])
        for name in sorted(self.fitted):
            val = self.fitted[name]
            if isinstance(val, (list, tuple, np.ndarray)):
                for i, v in enumerate(val):
                    out[f"fitted.{name}.{i}"] = _fmt(v)
            else:
                out[f"fitted.{name}"] = _fmt(val)
        return out

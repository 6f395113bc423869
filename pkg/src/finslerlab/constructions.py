"""Generators for the explicit geometric structures.

Covers the unit-length deformation of (alpha, beta) pairs, conformally flat
Killing pairs built from a polynomial vector field, constant-curvature
space forms with their closed conformal 1-forms, and the local-structure
metrics F = c eta beta~ + beta~^m alpha~^(1-m) over a parallel base pair.

Every construction carries an explicit chart box; preconditions (u != 0,
eta > 0, b > 0, 1 + mu |x|^2 > 0) are validated on the box corners plus
random interior probes at construction time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DomainError
from .jets import jet_point, jet_solve, value_of, exp as jexp
from .riemann import (
    Box,
    MetricField,
    OneFormField,
    constant_form,
    euclidean_metric,
)
from .alphabeta import AlphaBetaMetric, MKropina, SqrtMixed

__all__ = [
    "UField",
    "pde_residual",
    "example_ufield",
    "conformal_pair_from_u",
    "deform",
    "scaled_metric",
    "scaled_form",
    "inverse_deform",
    "planted_tau",
    "EtaProfile",
    "eta_constant",
    "eta_affine_x1",
    "eta_one_plus_norm2",
    "eta_exp_x1",
    "space_form",
    "conformal_form_on_space_form",
    "space_form_unit_length",
    "local_structure_metric",
    "local_structure_projective_factor",
    "local_structure_flag_curvature",
    "generic_nonclosed_form",
]

_VALIDATION_SAMPLES = 48
_VALIDATION_SEED = 9117


def _chart_points(chart: Box, samples=_VALIDATION_SAMPLES):
    rng = np.random.default_rng(_VALIDATION_SEED)
    return np.vstack([chart.corners(), chart.sample(rng, samples)])


def _validate_on_chart(chart, predicate, message, error=ConfigurationError):
    if chart is None:
        return
    for p in _chart_points(chart):
        if not predicate(p):
            raise error(f"{message} at chart point {tuple(float(v) for v in p)}")


# -- conformally flat Killing pairs --------------------------------------------


@dataclass(frozen=True)
class UField:
    """u(x) = -2 (lam + <e, x>) x + |x|^2 e + q x + f with antisymmetric q.

    Solves the coupled system  d_j u^i + d_i u^j = 0 (i != j),
    d_i u^i = d_j u^j (all i, j), which makes the associated conformal
    1-form a Killing form of unit length.
    """

    n: int
    lam: float
    e: tuple
    f: tuple
    q: tuple

    def __post_init__(self):
        object.__setattr__(self, "e", tuple(float(v) for v in self.e))
        object.__setattr__(self, "f", tuple(float(v) for v in self.f))
        q = np.asarray(self.q, dtype=float).reshape(self.n, self.n)
        if np.max(np.abs(q + q.T)) > 0.0:
            raise ConfigurationError("q must be antisymmetric")
        object.__setattr__(self, "q", tuple(tuple(row) for row in q))
        if len(self.e) != self.n or len(self.f) != self.n:
            raise ConfigurationError("e, f must be n-vectors")

    def __call__(self, xs):
        n = self.n
        ip = None
        norm2 = None
        for i in range(n):
            t1 = self.e[i] * xs[i]
            t2 = xs[i] * xs[i]
            ip = t1 if ip is None else ip + t1
            norm2 = t2 if norm2 is None else norm2 + t2
        coef = -2.0 * (self.lam + ip)
        out = np.empty(n, dtype=object)
        for i in range(n):
            acc = coef * xs[i] + norm2 * self.e[i] + self.f[i]
            for k in range(n):
                qik = self.q[i][k]
                if qik != 0.0:
                    acc = acc + qik * xs[k]
            out[i] = acc
        return out

    def jacobian(self, x):
        """Closed-form d u^i / d x^j, the hand oracle for the AD route."""
        x = np.asarray(x, dtype=float)
        e = np.asarray(self.e)
        q = np.asarray(self.q)
        n = self.n
        J = np.empty((n, n))
        lead = -2.0 * (self.lam + float(e @ x))
        for i in range(n):
            for j in range(n):
                J[i, j] = -2.0 * e[j] * x[i] + 2.0 * x[j] * e[i] + q[i, j]
                if i == j:
                    J[i, j] += lead
        return J

    def norm2(self, x):
        u = np.array([value_of(z) for z in self([float(v) for v in x])])
        return float(u @ u)


def pde_residual(u: UField, x) -> float:
    """Worst violation of the Killing system at x, from the AD Jacobian."""
    n = u.n
    jets = u(jet_point(x, np.eye(n)))
    J = np.empty((n, n))
    for i in range(n):
        z = jets[i]
        J[i, :] = z.grad if hasattr(z, "grad") else 0.0
    worst = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                worst = max(worst, abs(J[i, i] - J[0, 0]))
            else:
                worst = max(worst, abs(J[i, j] + J[j, i]))
    return worst


def example_ufield(lam, t, f, n=None) -> UField:
    """The one-parameter family u = -2 (lam + t <f, x>) x + t |x|^2 f + f.

    Requires t f != 0 and lam^2 + t |f|^2 != 0; the first keeps the field
    genuinely quadratic, the second is exactly the obstruction to constant
    sectional curvature of the induced metric.
    """
    f = [float(v) for v in f]
    n = n if n is not None else len(f)
    fnorm2 = sum(v * v for v in f)
    if t == 0.0 or fnorm2 == 0.0:
        raise ConfigurationError(f"t f = 0 violated: t={t}, |f|^2={fnorm2}")
    if lam * lam + t * fnorm2 == 0.0:
        raise ConfigurationError(
            f"lam^2 + t |f|^2 = 0 violated: lam={lam}, t={t}, |f|^2={fnorm2}"
        )
    e = [t * v for v in f]
    q = np.zeros((n, n))
    return UField(n=n, lam=float(lam), e=e, f=f, q=q)


def conformal_pair_from_u(u: UField, chart: Optional[Box] = None):
    """Metric |y|^2/|u|^2 and 1-form <u, y>/|u|^2 as field objects.

    The form has unit length by construction; when u solves the Killing
    system it is a Killing form of the metric.
    """
    n = u.n
    _validate_on_chart(
        chart,
        lambda p: u.norm2(p) > 1e-12,
        "u = 0",
        error=DomainError,
    )

    def inv_norm2(xs):
        acc = None
        uu = u(xs)
        for i in range(n):
            t = uu[i] * uu[i]
            acc = t if acc is None else acc + t
        if value_of(acc) <= 0.0:
            raise DomainError("u = 0")
        return uu, 1.0 / acc

    def afn(xs):
        _, inv = inv_norm2(xs)
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                out[i, j] = inv if i == j else 0.0
        return out

    def bfn(xs):
        uu, inv = inv_norm2(xs)
        return np.array([uu[i] * inv for i in range(n)], dtype=object)

    alpha = MetricField(n, afn, label="conformal-killing", chart=chart)
    beta = OneFormField(n, bfn, label="conformal-killing", chart=chart)
    return alpha, beta


# -- the unit-length deformation -----------------------------------------------


def deform(alpha: MetricField, beta: OneFormField, m: float):
    """Rescale to (b^m alpha, b^(m-1) beta) where b = ||beta||_alpha.

    The deformed form has unit length with respect to the deformed metric,
    and F = beta^m alpha^(1-m) is pointwise invariant.
    """
    if m == 1.0:
        raise ConfigurationError("deformation undefined for m = 1")
    n = alpha.n

    def b2_parts(xs):
        A = np.asarray(alpha.fn(xs), dtype=object)
        blo = np.asarray(beta.fn(xs), dtype=object)
        bup = jet_solve(A, list(blo))
        b2 = None
        for i in range(n):
            t = bup[i] * blo[i]
            b2 = t if b2 is None else b2 + t
        if value_of(b2) <= 0.0:
            raise DomainError("b = 0 under deformation")
        return A, blo, b2

    def afn(xs):
        A, _, b2 = b2_parts(xs)
        fac = b2 ** float(m)
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                out[i, j] = fac * A[i, j]
        return out

    def bfn(xs):
        _, blo, b2 = b2_parts(xs)
        fac = b2 ** ((m - 1.0) / 2.0)
        return np.array([fac * blo[i] for i in range(n)], dtype=object)

    chart = alpha.chart or beta.chart
    if chart is not None:

        def b_positive(p):
            try:
                b2_parts([float(v) for v in p])
            except DomainError:
                return False
            return True

        _validate_on_chart(chart, b_positive, "b = 0", error=DomainError)
    da = MetricField(n, afn, label=f"deformed[{alpha.label}]", chart=chart)
    db = OneFormField(n, bfn, label=f"deformed[{beta.label}]", chart=chart)
    return da, db


# -- scalar profiles ------------------------------------------------------------


@dataclass(frozen=True)
class EtaProfile:
    """Positive scalar profile with analytic first and second derivatives.

    Catalog profiles ship their derivatives in closed form; user-supplied
    profiles must provide all three evaluators themselves.
    """

    label: str
    fn: Callable
    grad_fn: Callable
    hess_fn: Callable
    x1_only: bool = False

    def value(self, x) -> float:
        return float(value_of(self.fn([float(v) for v in x])))

    def grad(self, x) -> np.ndarray:
        return np.asarray(self.grad_fn(np.asarray(x, dtype=float)), dtype=float)

    def hess(self, x) -> np.ndarray:
        return np.asarray(self.hess_fn(np.asarray(x, dtype=float)), dtype=float)


def eta_constant(v: float, n=3) -> EtaProfile:
    if v <= 0.0:
        raise ConfigurationError(f"eta must be positive, got {v}")
    return EtaProfile(
        label=f"const({v:g})",
        fn=lambda xs: float(v),
        grad_fn=lambda x: np.zeros(n),
        hess_fn=lambda x: np.zeros((n, n)),
        x1_only=True,
    )


def eta_affine_x1(a0: float, a1: float, n=3) -> EtaProfile:
    def grad(x):
        g = np.zeros(n)
        g[0] = a1
        return g

    return EtaProfile(
        label=f"affine-x1({a0:g},{a1:g})",
        fn=lambda xs: a0 + a1 * xs[0],
        grad_fn=grad,
        hess_fn=lambda x: np.zeros((n, n)),
        x1_only=True,
    )


def eta_one_plus_norm2(n=3) -> EtaProfile:
    def fn(xs):
        acc = None
        for i in range(n):
            t = xs[i] * xs[i]
            acc = t if acc is None else acc + t
        return 1.0 + acc

    return EtaProfile(
        label="one-plus-norm2",
        fn=fn,
        grad_fn=lambda x: 2.0 * np.asarray(x, dtype=float),
        hess_fn=lambda x: 2.0 * np.eye(n),
        x1_only=False,
    )


def eta_exp_x1(n=3) -> EtaProfile:
    def grad(x):
        g = np.zeros(n)
        g[0] = math.exp(x[0])
        return g

    def hess(x):
        h = np.zeros((n, n))
        h[0, 0] = math.exp(x[0])
        return h

    return EtaProfile(
        label="exp-x1",
        fn=lambda xs: jexp(xs[0]),
        grad_fn=grad,
        hess_fn=hess,
        x1_only=True,
    )


def scaled_metric(base: MetricField, eta: EtaProfile, power: float, label="", chart=None):
    """Metric eta(x)^power * base, jets flowing through the profile."""
    n = base.n

    def fn(xs):
        A = np.asarray(base.fn(xs), dtype=object)
        fac = eta.fn(xs) ** float(power)
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                out[i, j] = fac * A[i, j]
        return out

    return MetricField(
        n, fn, label=label or f"{eta.label}^{power:g}*{base.label}", chart=chart or base.chart
    )


def scaled_form(base: OneFormField, eta: EtaProfile, label="", chart=None):
    """1-form eta(x) * base."""
    n = base.n

    def fn(xs):
        b = np.asarray(base.fn(xs), dtype=object)
        fac = eta.fn(xs)
        return np.array([fac * b[i] for i in range(n)], dtype=object)

    return OneFormField(
        n, fn, label=label or f"{eta.label}*{base.label}", chart=chart or base.chart
    )


def inverse_deform(alpha_t: MetricField, beta_t: OneFormField, eta: EtaProfile, m: float):
    """Undo the unit-length deformation with profile eta:

    alpha = eta^(m/(m-1)) alpha~,  beta = eta beta~.

    When beta~ is parallel of unit length, the produced pair satisfies the
    structural conditions of the Douglas class with planted scalar
    ``planted_tau``; applying ``deform`` recovers (alpha~, beta~).
    """
    if m in (0.0, 1.0):
        raise ConfigurationError(f"exponent m={m} excluded")
    chart = alpha_t.chart or beta_t.chart
    _validate_on_chart(chart, lambda p: eta.value(p) > 0.0, f"eta = {eta.label} <= 0")
    alpha = scaled_metric(alpha_t, eta, 2.0 * m / (m - 1.0), chart=chart)
    beta = scaled_form(beta_t, eta, chart=chart)
    return alpha, beta


def planted_tau(alpha_t: MetricField, beta_t: OneFormField, eta: EtaProfile, m: float):
    """The scalar tau(x) that the inverse deformation plants in the
    covariant-derivative ansatz: tau = <d eta, b~> / (2 (m-1) eta^2),
    the index raised with the base metric."""

    def tau(x):
        g = eta.grad(x)
        ev = eta.value(x)
        at = alpha_t.matrix(x)
        bt = beta_t.covector(x)
        bup = np.linalg.solve(at, bt)
        return float(g @ bup) / (2.0 * (m - 1.0) * ev * ev)

    return tau


# -- space forms -----------------------------------------------------------------


def space_form(mu: float, n=3, chart: Optional[Box] = None) -> MetricField:
    """Constant sectional curvature mu metric on the chart where 1 + mu |x|^2 > 0."""

    def w_of(xs):
        acc = None
        for i in range(n):
            t = xs[i] * xs[i]
            acc = t if acc is None else acc + t
        w = 1.0 + mu * acc
        if value_of(w) <= 0.0:
            raise DomainError(f"1 + mu |x|^2 = {value_of(w)} <= 0")
        return w

    def fn(xs):
        w = w_of(xs)
        inv2 = 1.0 / (w * w)
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                if i == j:
                    out[i, j] = (w - mu * xs[i] * xs[i]) * inv2
                else:
                    out[i, j] = (-mu) * xs[i] * xs[j] * inv2
        return out

    field = MetricField(n, fn, label=f"space-form(mu={mu:g})", chart=chart)
    _validate_on_chart(
        chart,
        lambda p: 1.0 + mu * float(p @ p) > 0.0,
        "1 + mu |x|^2 <= 0",
        error=DomainError,
    )
    return field


def conformal_form_on_space_form(
    mu: float, k: float, e, chart: Optional[Box] = None
) -> OneFormField:
    """The closed conformal 1-form of a space form:

    b_i = (k x^i + (1 + mu |x|^2) e_i - mu <e, x> x^i) / (1 + mu |x|^2)^(3/2).
    """
    e = [float(v) for v in e]
    n = len(e)

    def fn(xs):
        acc = None
        ex = None
        for i in range(n):
            t = xs[i] * xs[i]
            acc = t if acc is None else acc + t
            t2 = e[i] * xs[i]
            ex = t2 if ex is None else ex + t2
        w = 1.0 + mu * acc
        if value_of(w) <= 0.0:
            raise DomainError(f"1 + mu |x|^2 = {value_of(w)} <= 0")
        fac = w ** (-1.5)
        return np.array(
            [(k * xs[i] + w * e[i] - mu * ex * xs[i]) * fac for i in range(n)],
            dtype=object,
        )

    return OneFormField(n, fn, label=f"space-form-conformal(mu={mu:g})", chart=chart)


def space_form_unit_length(mu: float, k: float, e, x) -> float:
    """Squared length of the conformal form, in closed form:

    |e|^2 + (k^2 |x|^2 + 2 k <e, x> - mu <e, x>^2) / (1 + mu |x|^2).

    The unit-length requirement is this value being identically 1; for
    mu != 0 it fails somewhere on every open set.
    """
    e = np.asarray(e, dtype=float)
    x = np.asarray(x, dtype=float)
    ex = float(e @ x)
    return float(e @ e) + (k * k * float(x @ x) + 2.0 * k * ex - mu * ex * ex) / (
        1.0 + mu * float(x @ x)
    )


# -- local structure metrics ------------------------------------------------------


def _flat_parallel_base(n=3, chart=None):
    return euclidean_metric(n, chart=chart), constant_form(
        [1.0] + [0.0] * (n - 1), chart=chart
    )


def local_structure_metric(
    c: float,
    m: float,
    eta: EtaProfile,
    base=None,
    chart: Optional[Box] = None,
    label: str = "",
) -> AlphaBetaMetric:
    """F = c eta beta~ + beta~^m alpha~^(1-m) realized over the undeformed pair.

    Defaults to the flat parallel base (alpha~ = |y|, beta~ = y^1).  For
    c != 0 the profile must depend on x^1 only, which is what keeps the
    scaled form closed.
    """
    if m in (0.0, 1.0, -1.0):
        raise ConfigurationError(f"exponent m={m} excluded for the local structure")
    if c != 0.0 and not eta.x1_only:
        raise ConfigurationError(
            f"c={c} != 0 requires a profile depending on x^1 only, got {eta.label}"
        )
    if base is None:
        base = _flat_parallel_base(chart=chart)
    alpha_t, beta_t = base
    if chart is None:
        chart = alpha_t.chart or beta_t.chart
    _validate_on_chart(chart, lambda p: eta.value(p) > 0.0, f"eta = {eta.label} <= 0")
    alpha, beta = inverse_deform(alpha_t, beta_t, eta, m)
    phi = MKropina(m) if c == 0.0 else SqrtMixed(k1=c, m=m, k2=0.0)
    return AlphaBetaMetric(
        alpha=alpha,
        beta=beta,
        phi=phi,
        label=label or f"local-structure(c={c:g}, m={m:g}, {eta.label})",
    )


def _flat_local_F(c, m, eta, x, y):
    y = np.asarray(y, dtype=float)
    y1 = y[0]
    ny = float(np.linalg.norm(y))
    ev = eta.value(x)
    return c * ev * y1 + y1 ** m * ny ** (1.0 - m)


def local_structure_projective_factor(c, m, eta: EtaProfile, x, y) -> float:
    """Closed-form projective factor c eta_1 (y^1)^2 / (2F) over the flat base."""
    F = _flat_local_F(c, m, eta, x, y)
    eta1 = eta.grad(x)[0]
    y1 = float(y[0])
    return c * eta1 * y1 * y1 / (2.0 * F)


def local_structure_flag_curvature(c, m, eta: EtaProfile, x, y) -> float:
    """Closed-form flag curvature of the flat-base local structure:

    K = c (y^1)^3 / (2 F^3) * (3 c eta_1^2 y^1 / (2 F) - eta_11).
    """
    F = _flat_local_F(c, m, eta, x, y)
    eta1 = eta.grad(x)[0]
    eta11 = eta.hess(x)[0, 0]
    y1 = float(y[0])
    return c * y1 ** 3 / (2.0 * F ** 3) * (3.0 * c * eta1 * eta1 * y1 / (2.0 * F) - eta11)


def generic_nonclosed_form(n=3, chart=None) -> OneFormField:
    """A deliberately structureless 1-form, b = (1, x^3, x^1 x^2).

    Not closed, and its antisymmetrized derivative plane does not contain b,
    so every structural condition fails: the negative control."""
    if n != 3:
        raise ConfigurationError("the negative-control form is three-dimensional")

    def fn(xs):
        return np.array([1.0, xs[2], xs[0] * xs[1]], dtype=object)

    return OneFormField(n, fn, label="generic-nonclosed", chart=chart)

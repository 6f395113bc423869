"""The (alpha, beta)-metric layer.

F(x, y) = alpha(x, y) * phi(beta/alpha) for a closed-form family phi.  The
scalar invariants Q, Theta, Psi, Delta feed the structural spray formula

    G^i = G^i_alpha + alpha Q s^i_0
        + Theta (-2 alpha Q s_0 + r_00) y^i / alpha
        + Psi   (-2 alpha Q s_0 + r_00) b^i,

which ``spray_full`` assembles from the covariant package; ``spray_generic``
computes the same spray purely by automatic differentiation from the
definition G^i = 1/4 g^{il} ([F^2]_{x^k y^l} y^k - [F^2]_{x^l}).  Agreement
of the two routes is the module's central cross-validation property.

Q' is hand-differentiated per family (Q' = phi phi'' / (phi - s phi')^2),
never AD-computed: Delta and Psi are quotient-sensitive near poles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, GeometryError
from .jets import Jet2, TwoArgField, sqrt, two_arg_jets, value_of
from .riemann import (
    CovariantPackage,
    MetricField,
    OneFormField,
    covariant_package,
)

__all__ = [
    "PhiFamily",
    "MKropina",
    "KropinaPlus",
    "SqrtMixed",
    "SqrtPure",
    "PowerSeries",
    "SprayInvariants",
    "phi_jet",
    "spray_invariants",
    "invariants_from_phi_jet",
    "AlphaBetaMetric",
    "metric_value",
    "spray_full",
    "spray_generic",
]


def _is_negative_integer(m: float) -> bool:
    return m < 0 and float(m).is_integer()


def _fpow(z, p):
    """z**p for float or Jet2 with explicit domain guards on the float path."""
    if isinstance(z, Jet2):
        return z ** p
    z = float(z)
    if z < 0.0 and not float(p).is_integer():
        raise DomainError(f"fractional power {p} of negative base {z}")
    if z == 0.0 and p < 0:
        raise DomainError(f"power {p} singular at base 0")
    return z ** p


class PhiFamily:
    """Base class for the closed-form phi(s) catalog.

    Subclasses provide ``__call__`` (valid on floats and Jet2 alike) and
    ``jet`` returning the hand-derived triple (phi, phi', phi'').
    """

    @property
    def exponent(self) -> float:
        raise NotImplementedError

    @property
    def linear_coefficient(self) -> float:
        return 0.0

    @property
    def k_term(self) -> float:
        """The quadratic correction constant inside the sqrt factor (0 if none)."""
        return 0.0

    def __call__(self, s):
        raise NotImplementedError

    def jet(self, s: float):
        raise NotImplementedError

    def describe(self) -> str:
        return type(self).__name__


def _power_sqrt_jet(s: float, m: float, k: float):
    """(p, p', p'') for p(s) = s^m (1 + k s^2)^((1-m)/2), hand-derived."""
    w = 1.0 + k * s * s
    if w <= 0.0:
        raise DomainError(f"phi singular at s={s}: 1 + k s^2 = {w} <= 0")
    p = _fpow(s, m) * w ** ((1.0 - m) / 2.0)
    d1 = _fpow(s, m - 1.0) * (m + k * s * s) * w ** (-(m + 1.0) / 2.0)
    d2 = (
        _fpow(s, m - 2.0)
        * (m - 1.0)
        * (m - k * s * s)
        * w ** (-(m + 3.0) / 2.0)
    )
    return p, d1, d2


@dataclass(frozen=True)
class MKropina(PhiFamily):
    """phi(s) = s^m with m != 0, 1; m = -1 is the classical Kropina case."""

    m: float

    def __post_init__(self):
        if self.m in (0.0, 1.0):
            raise DomainError(f"exponent m={self.m} excluded")

    @property
    def exponent(self):
        return self.m

    def __call__(self, s):
        return _fpow(s, self.m)

    def jet(self, s):
        m = self.m
        if s == 0.0 and (m < 2.0 or not float(m).is_integer()):
            raise DomainError(f"phi singular at s={s}")
        return (
            _fpow(s, m),
            m * _fpow(s, m - 1.0),
            m * (m - 1.0) * _fpow(s, m - 2.0),
        )

    def describe(self):
        return f"s^{self.m:g}"


@dataclass(frozen=True)
class KropinaPlus(PhiFamily):
    """phi(s) = c s + 1/s, the Kropina metric plus a linear part."""

    c: float = 0.0

    @property
    def exponent(self):
        return -1.0

    @property
    def linear_coefficient(self):
        return self.c

    def __call__(self, s):
        if value_of(s) == 0.0:
            raise DomainError("phi singular at s=0")
        return self.c * s + 1.0 / s

    def jet(self, s):
        if s == 0.0:
            raise DomainError("phi singular at s=0")
        return (
            self.c * s + 1.0 / s,
            self.c - 1.0 / (s * s),
            2.0 / (s * s * s),
        )

    def describe(self):
        return f"{self.c:g}*s + 1/s"


@dataclass(frozen=True)
class SqrtMixed(PhiFamily):
    """phi(s) = k1 s + s^m (1 + k2 s^2)^((1-m)/2)."""

    k1: float
    m: float
    k2: float

    def __post_init__(self):
        if self.m in (0.0, 1.0):
            raise DomainError(f"exponent m={self.m} excluded")

    @property
    def exponent(self):
        return self.m

    @property
    def linear_coefficient(self):
        return self.k1

    @property
    def k_term(self):
        return self.k2

    def __call__(self, s):
        w = 1.0 + self.k2 * s * s
        if value_of(w) <= 0.0:
            raise DomainError(f"phi singular: 1 + k2 s^2 <= 0 at s={value_of(s)}")
        return self.k1 * s + _fpow(s, self.m) * w ** ((1.0 - self.m) / 2.0)

    def jet(self, s):
        p, d1, d2 = _power_sqrt_jet(s, self.m, self.k2)
        return self.k1 * s + p, self.k1 + d1, d2

    def describe(self):
        return f"{self.k1:g}*s + s^{self.m:g} (1 + {self.k2:g} s^2)^((1-m)/2)"


@dataclass(frozen=True)
class SqrtPure(PhiFamily):
    """phi(s) = s^m (1 + k s^2)^((1-m)/2)."""

    m: float
    k: float

    def __post_init__(self):
        if self.m in (0.0, 1.0):
            raise DomainError(f"exponent m={self.m} excluded")

    @property
    def exponent(self):
        return self.m

    @property
    def k_term(self):
        return self.k

    def __call__(self, s):
        w = 1.0 + self.k * s * s
        if value_of(w) <= 0.0:
            raise DomainError(f"phi singular: 1 + k s^2 <= 0 at s={value_of(s)}")
        return _fpow(s, self.m) * w ** ((1.0 - self.m) / 2.0)

    def jet(self, s):
        return _power_sqrt_jet(s, self.m, self.k)

    def describe(self):
        return f"s^{self.m:g} (1 + {self.k:g} s^2)^((1-m)/2)"


@dataclass(frozen=True)
class PowerSeries(PhiFamily):
    """phi(s) = c s + s^m (1 + a1 s + a2 s^2 + a3 s^3 + a4 s^4).

    The inner factor is normalized to 1 at s = 0 and truncated at fourth
    order, which is approximate for non-polynomial inner functions.  The
    linear term is dropped for negative integer m, where s^m times the
    series can already absorb it.
    """

    c: float
    m: float
    coeffs: tuple = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.m in (0.0, 1.0):
            raise DomainError(f"exponent m={self.m} excluded")
        object.__setattr__(self, "coeffs", tuple(float(v) for v in self.coeffs))
        if len(self.coeffs) != 4:
            raise DomainError("power series takes exactly four inner coefficients")
        if _is_negative_integer(self.m) and self.c != 0.0:
            raise DomainError(
                f"linear coefficient must vanish for negative integer m={self.m}"
            )

    @property
    def exponent(self):
        return self.m

    @property
    def linear_coefficient(self):
        return self.c

    @property
    def k_term(self):
        # the quadratic inner coefficient plays the sqrt-correction role
        return -2.0 * self.coeffs[1] / (self.m - 1.0)

    def _inner(self, s):
        a1, a2, a3, a4 = self.coeffs
        return 1.0 + s * (a1 + s * (a2 + s * (a3 + s * a4)))

    def __call__(self, s):
        return self.c * s + _fpow(s, self.m) * self._inner(s)

    def jet(self, s):
        m = self.m
        if s == 0.0 and (m < 2.0 or not float(m).is_integer()):
            raise DomainError(f"phi singular at s={s}")
        a1, a2, a3, a4 = self.coeffs
        P = self._inner(s)
        dP = a1 + s * (2.0 * a2 + s * (3.0 * a3 + s * 4.0 * a4))
        ddP = 2.0 * a2 + s * (6.0 * a3 + s * 12.0 * a4)
        sm = _fpow(s, m)
        sm1 = _fpow(s, m - 1.0)
        sm2 = _fpow(s, m - 2.0)
        return (
            self.c * s + sm * P,
            self.c + m * sm1 * P + sm * dP,
            m * (m - 1.0) * sm2 * P + 2.0 * m * sm1 * dP + sm * ddP,
        )

    def describe(self):
        return f"{self.c:g}*s + s^{self.m:g} (1 + ...)"


def phi_jet(phi: PhiFamily, s: float):
    """(phi, phi', phi'') at s, from the family's closed-form derivatives."""
    return phi.jet(float(s))


@dataclass(frozen=True)
class SprayInvariants:
    """Q, Theta, Psi, Delta at a given (s, b^2), with the analytic Q'."""

    Q: float
    theta: float
    psi: float
    delta: float
    q_prime: float


def invariants_from_phi_jet(v, d1, d2, s, b2) -> SprayInvariants:
    """Build the invariants from a (phi, phi', phi'') triple.

    Q = phi' / (phi - s phi'), Q' = phi phi'' / (phi - s phi')^2,
    Delta = 1 + s Q + (b^2 - s^2) Q', Theta = (Q - s Q')/(2 Delta),
    Psi = Q' / (2 Delta).
    """
    denom = v - s * d1
    scale = max(1.0, abs(v), abs(s * d1))
    if abs(denom) <= 1e-12 * scale:
        raise DomainError(f"Randers-degenerate direction: phi - s phi' = 0 at s={s}")
    Q = d1 / denom
    Qp = v * d2 / (denom * denom)
    delta = 1.0 + s * Q + (b2 - s * s) * Qp
    dscale = max(1.0, abs(s * Q), abs((b2 - s * s) * Qp))
    if abs(delta) <= 1e-12 * dscale:
        raise DomainError(f"Delta-singular direction at s={s}")
    theta = (Q - s * Qp) / (2.0 * delta)
    psi = Qp / (2.0 * delta)
    return SprayInvariants(Q=Q, theta=theta, psi=psi, delta=delta, q_prime=Qp)


def spray_invariants(phi: PhiFamily, s: float, b2: float) -> SprayInvariants:
    v, d1, d2 = phi.jet(float(s))
    return invariants_from_phi_jet(v, d1, d2, float(s), float(b2))


@dataclass(frozen=True)
class AlphaBetaMetric:
    """F = alpha phi(beta/alpha) over a shared chart."""

    alpha: MetricField
    beta: OneFormField
    phi: PhiFamily
    label: str = ""

    @property
    def n(self):
        return self.alpha.n

    def F_jets(self, xj, yj):
        """Evaluate F on jet (or float) coordinates."""
        n = self.n
        A = self.alpha.fn(xj)
        blo = self.beta.fn(xj)
        alpha2 = None
        for i in range(n):
            for j in range(n):
                term = A[i, j] * yj[i] * yj[j]
                alpha2 = term if alpha2 is None else alpha2 + term
        beta = None
        for i in range(n):
            term = blo[i] * yj[i]
            beta = term if beta is None else beta + term
        if value_of(alpha2) <= 0.0:
            raise DomainError("alpha^2 <= 0: direction outside the metric cone")
        if value_of(beta) == 0.0:
            raise DomainError(
                f"singular locus beta(y)=0 for phi = {self.phi.describe()}"
            )
        al = sqrt(alpha2)
        s = beta / al
        return al * self.phi(s)

    def F_field(self) -> TwoArgField:
        return TwoArgField(self.n, self.F_jets, name=self.label or "F")

    def value(self, x, y) -> float:
        xs = [float(v) for v in x]
        ys = [float(v) for v in y]
        return float(value_of(self.F_jets(xs, ys)))

    def s_value(self, x, y) -> float:
        a = self.alpha.matrix(x)
        b = self.beta.covector(x)
        y = np.asarray(y, dtype=float)
        return float(b @ y) / math.sqrt(float(y @ a @ y))


def metric_value(M: AlphaBetaMetric, x, y) -> float:
    """F(x, y); positively homogeneous of degree 1 in y."""
    return M.value(x, y)


def spray_full(M: AlphaBetaMetric, x, y, cov: Optional[CovariantPackage] = None):
    """Structural spray assembly from the covariant package.

    Pass a precomputed package when evaluating many directions at one point.
    """
    if cov is None:
        cov = covariant_package(M.alpha, M.beta, x)
    y = np.asarray(y, dtype=float)
    alpha2 = float(y @ cov.a @ y)
    if alpha2 <= 0.0:
        raise DomainError("alpha^2 <= 0 in spray assembly")
    alpha = math.sqrt(alpha2)
    beta = float(cov.b_lo @ y)
    s = beta / alpha
    inv = spray_invariants(M.phi, s, cov.b2)
    g_alpha = 0.5 * np.einsum("ijk,j,k->i", cov.gamma, y, y)
    s_i0 = cov.a_inv @ (cov.s @ y)
    s0 = float(cov.s_vec @ y)
    r00 = float(y @ cov.r @ y)
    common = -2.0 * alpha * inv.Q * s0 + r00
    return (
        g_alpha
        + alpha * inv.Q * s_i0
        + (inv.theta * common / alpha) * y
        + inv.psi * common * cov.b_up
    )


def spray_generic(M: AlphaBetaMetric, x, y):
    """Definitional spray by AD on F^2, independent of the structural route.

    G^i = 1/4 g^{il} ([F^2]_{x^k y^l} y^k - [F^2]_{x^l}) with the fundamental
    tensor g_il = 1/2 [F^2]_{y^i y^l}.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = M.n
    xj, yj = two_arg_jets(x, y)
    try:
        F = M.F_jets(xj, yj)
    except DomainError as err:
        if err.point is None:
            err.point = tuple(x)
        raise
    F2 = F * F
    g = 0.5 * F2.hess[n:, n:]
    rhs = F2.hess[:n, n:].T @ y - F2.grad[:n]
    try:
        sol = np.linalg.solve(g, rhs)
    except np.linalg.LinAlgError:
        raise GeometryError(
            f"fundamental tensor degenerate at x={tuple(x)}, y={tuple(y)}"
        ) from None
    return 0.25 * sol

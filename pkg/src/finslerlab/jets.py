"""Second-order forward-mode automatic differentiation.

A :class:`Jet2` carries a scalar value together with all first and second
derivatives along a fixed tuple of seeded directions (hyper-dual style).
Arithmetic propagates exact product and chain rules, so evaluating a field
on seeded coordinates yields every derivative slot of order <= 2 in a
single pass, and polynomials of degree <= 2 in the seeds differentiate
with no truncation error.  Derivatives of order >= 3 are deliberately out
of scope; higher-order information is always obtained by sampling.

Everything here is immutable after construction and safe to evaluate
concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "Jet2",
    "SmoothField",
    "TwoArgField",
    "jet_point",
    "jet_eval",
    "mixed_xy_derivatives",
    "two_arg_jets",
    "jet_solve",
    "jet_inv",
    "value_of",
    "sqrt",
    "exp",
    "log",
    "sin",
    "cos",
]

_NUMBER = (int, float, np.integer, np.floating)


class Jet2:
    """Value with gradient and symmetric Hessian over seeded directions.

    ``grad[a]`` is the derivative along seed ``a``; ``hess[a, b]`` the second
    derivative along the seed pair ``(a, b)``.  The Hessian is symmetrized on
    construction, which is bit-exact because IEEE addition commutes.
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad, hess):
        self.value = float(value)
        self.grad = np.asarray(grad, dtype=float)
        h = np.asarray(hess, dtype=float)
        self.hess = 0.5 * (h + h.T)

    @classmethod
    def constant(cls, value, nseeds):
        z = np.zeros(nseeds)
        return cls(value, z, np.zeros((nseeds, nseeds)))

    @property
    def nseeds(self):
        return self.grad.shape[0]

    def __repr__(self):
        return f"Jet2({self.value!r}, grad={self.grad!r})"

    # -- coercion ----------------------------------------------------------

    def _lift(self, other):
        if isinstance(other, Jet2):
            return other
        if isinstance(other, _NUMBER):
            return Jet2.constant(float(other), self.nseeds)
        return None

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Jet2(self.value + o.value, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.grad, -self.hess)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Jet2(self.value - o.value, self.grad - o.grad, self.hess - o.hess)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        cross = np.outer(self.grad, o.grad)
        return Jet2(
            self.value * o.value,
            self.value * o.grad + o.value * self.grad,
            self.value * o.hess + o.value * self.hess + cross + cross.T,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if o.value == 0.0:
            raise DomainError("division by zero")
        w0 = self.value / o.value
        wg = (self.grad - w0 * o.grad) / o.value
        cross = np.outer(wg, o.grad)
        wh = (self.hess - w0 * o.hess - cross - cross.T) / o.value
        return Jet2(w0, wg, wh)

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o / self

    # -- composition with a scalar function ----------------------------------

    def compose(self, f0, f1, f2):
        """Chain rule for f(self): needs f, f', f'' at ``self.value``."""
        outer = np.outer(self.grad, self.grad)
        return Jet2(f0, f1 * self.grad, f1 * self.hess + f2 * outer)

    def __pow__(self, p):
        if not isinstance(p, _NUMBER):
            return NotImplemented
        p = float(p)
        if p == 0.0:
            return Jet2.constant(1.0, self.nseeds)
        if p == 1.0:
            return self
        v = self.value
        if v < 0.0 and not p.is_integer():
            raise DomainError(f"fractional power {p} of negative base {v}")
        try:
            f0 = v ** p
            f1 = p * v ** (p - 1.0)
            f2 = p * (p - 1.0) * v ** (p - 2.0)
        except ZeroDivisionError:
            raise DomainError(f"power {p} singular at base 0") from None
        return self.compose(f0, f1, f2)

    def exp(self):
        e = math.exp(self.value)
        return self.compose(e, e, e)

    def log(self):
        v = self.value
        if v <= 0.0:
            raise DomainError(f"log of non-positive value {v}")
        return self.compose(math.log(v), 1.0 / v, -1.0 / (v * v))

    def sin(self):
        s, c = math.sin(self.value), math.cos(self.value)
        return self.compose(s, c, -s)

    def cos(self):
        s, c = math.sin(self.value), math.cos(self.value)
        return self.compose(c, -s, -c)

    def sqrt(self):
        v = self.value
        if v < 0.0:
            raise DomainError(f"even root of negative value {v}")
        if v == 0.0:
            raise DomainError("sqrt not differentiable at 0")
        r = math.sqrt(v)
        return self.compose(r, 0.5 / r, -0.25 / (r * v))


def value_of(z) -> float:
    """Plain float of a Jet2 or a number."""
    return z.value if isinstance(z, Jet2) else float(z)


# -- generic scalar functions dispatching on Jet2 vs float -------------------


def sqrt(z):
    if isinstance(z, Jet2):
        return z.sqrt()
    if z < 0.0:
        raise DomainError(f"even root of negative value {z}")
    return math.sqrt(z)


def exp(z):
    return z.exp() if isinstance(z, Jet2) else math.exp(z)


def log(z):
    if isinstance(z, Jet2):
        return z.log()
    if z <= 0.0:
        raise DomainError(f"log of non-positive value {z}")
    return math.log(z)


def sin(z):
    return z.sin() if isinstance(z, Jet2) else math.sin(z)


def cos(z):
    return z.cos() if isinstance(z, Jet2) else math.cos(z)


# -- fields -------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothField:
    """A pure map from chart coordinates to a scalar (or fixed-length sequence).

    ``fn`` must accept a sequence of coordinates that are either plain floats
    or Jet2 with a shared seed set, and must only combine them through
    arithmetic and the dispatching functions above.  Evaluation is then
    deterministic: same input bits, same output bits.
    """

    n: int
    fn: Callable[[Any], Any]
    name: str = ""


@dataclass(frozen=True)
class TwoArgField:
    """A pure map (x, y) -> scalar over an n-dimensional chart and its fibers."""

    n: int
    fn: Callable[[Any, Any], Any]
    name: str = ""


def jet_point(x, seeds):
    """Coordinates of ``x`` as Jet2 seeded along the rows of ``seeds``."""
    x = np.asarray(x, dtype=float)
    seeds = np.asarray(seeds, dtype=float)
    k = seeds.shape[0]
    zero = np.zeros((k, k))
    return [Jet2(x[i], seeds[:, i], zero) for i in range(x.shape[0])]


def jet_eval(f: SmoothField, x, seeds):
    """Evaluate ``f`` at ``x`` with first/second derivatives along ``seeds``.

    Domain errors raised inside the evaluator are annotated with ``x``.
    """
    seeds = np.asarray(seeds, dtype=float)
    if seeds.shape[0] > 2 * f.n:
        raise ConfigurationError(
            f"{seeds.shape[0]} seeds exceed the 2n = {2 * f.n} limit"
        )
    coords = jet_point(x, seeds)
    try:
        return f.fn(coords)
    except DomainError as err:
        if err.point is None:
            err.point = tuple(float(v) for v in np.asarray(x, dtype=float))
        raise


def two_arg_jets(x, y):
    """Seed x-coordinates on the first n directions and y on the last n."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    eye = np.eye(2 * n)
    zero = np.zeros((2 * n, 2 * n))
    xj = [Jet2(x[i], eye[i], zero) for i in range(n)]
    yj = [Jet2(y[i], eye[n + i], zero) for i in range(n)]
    return xj, yj


def mixed_xy_derivatives(F: TwoArgField, x, y):
    """Value, x-gradient, y-gradient and mixed x/y second derivatives of F.

    Returns ``(F, F_x, F_y, F_xy)`` with ``F_xy[m, l] = d^2 F / dx^m dy^l``,
    all from one evaluation on 2n seeds.  Exact for F polynomial of degree
    <= 2 per variable group.
    """
    xj, yj = two_arg_jets(x, y)
    n = len(xj)
    try:
        r = F.fn(xj, yj)
    except DomainError as err:
        if err.point is None:
            err.point = tuple(float(v) for v in np.asarray(x, dtype=float))
        raise
    return (
        r.value,
        r.grad[:n].copy(),
        r.grad[n:].copy(),
        r.hess[:n, n:].copy(),
    )


# -- small dense linear algebra over jets -------------------------------------


def jet_solve(A, rhs):
    """Solve A z = rhs by Gauss-Jordan elimination over Jet2/float entries.

    Pivots on the magnitude of the entry values; meant for the small (n <= 3)
    systems that metric inversion produces inside field evaluators.
    """
    A = np.asarray(A, dtype=object)
    n = A.shape[0]
    M = [[A[i, j] for j in range(n)] for i in range(n)]
    b = [rhs[i] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(value_of(M[r][col])))
        if value_of(M[piv][col]) == 0.0:
            raise DomainError("singular matrix in jet_solve")
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            b[col], b[piv] = b[piv], b[col]
        d = M[col][col]
        for j in range(col + 1, n):
            M[col][j] = M[col][j] / d
        b[col] = b[col] / d
        M[col][col] = 1.0
        for r in range(n):
            if r == col:
                continue
            f = M[r][col]
            if value_of(f) == 0.0 and not isinstance(f, Jet2):
                continue
            for j in range(col + 1, n):
                M[r][j] = M[r][j] - f * M[col][j]
            b[r] = b[r] - f * b[col]
            M[r][col] = 0.0
    return np.array(b, dtype=object)


def jet_inv(A):
    """Inverse of a small matrix with Jet2/float entries, column by column."""
    A = np.asarray(A, dtype=object)
    n = A.shape[0]
    cols = []
    for j in range(n):
        e = [1.0 if i == j else 0.0 for i in range(n)]
        cols.append(jet_solve(A, e))
    out = np.empty((n, n), dtype=object)
    for j, c in enumerate(cols):
        for i in range(n):
            out[i, j] = c[i]
    return out

"""Riemannian substrate: metric fields, Christoffel symbols, covariant data.

The metric a_ij(x) and 1-form b_i(x) are differentiable fields evaluated
through the jet engine; everything downstream (sprays, classification)
consumes the point data assembled here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .errors import ConfigurationError, DomainError, GeometryError
from .jets import Jet2, TwoArgField, jet_point, value_of, sqrt

__all__ = [
    "Box",
    "MetricField",
    "OneFormField",
    "CovariantPackage",
    "christoffel",
    "spray_alpha",
    "covariant_package",
    "euclidean_metric",
    "conformal_metric",
    "constant_form",
    "finsler_field",
]


@dataclass(frozen=True)
class Box:
    """Axis-aligned chart box, the concrete neighborhood of a construction."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != len(self.hi):
            raise ConfigurationError("box lo/hi dimension mismatch")
        if any(l >= h for l, h in zip(self.lo, self.hi)):
            raise ConfigurationError(f"empty box {self.lo}..{self.hi}")

    @property
    def n(self):
        return len(self.lo)

    def center(self):
        return 0.5 * (np.asarray(self.lo) + np.asarray(self.hi))

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo) and np.all(x <= self.hi))

    def corners(self):
        n = self.n
        out = np.empty((2 ** n, n))
        for m in range(2 ** n):
            for i in range(n):
                out[m, i] = self.hi[i] if (m >> i) & 1 else self.lo[i]
        return out

    def sample(self, rng, count=1):
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        pts = lo + (hi - lo) * rng.random((count, self.n))
        return pts


def _values(arr):
    a = np.asarray(arr, dtype=object)
    out = np.empty(a.shape, dtype=float)
    for idx in np.ndindex(a.shape):
        out[idx] = value_of(a[idx])
    return out


@dataclass(frozen=True)
class MetricField:
    """Riemannian metric a_ij(x) given by a component evaluator.

    ``fn`` maps chart coordinates (floats or Jet2) to an (n, n) array of
    components and must produce a symmetric positive definite matrix at
    every probed point.
    """

    n: int
    fn: Callable[[Any], Any]
    label: str = ""
    chart: Optional[Box] = None

    def matrix(self, x) -> np.ndarray:
        return _values(self.fn([float(v) for v in x]))

    def matrix_jets(self, x, seeds):
        return np.asarray(self.fn(jet_point(x, seeds)), dtype=object)

    def inverse(self, x) -> np.ndarray:
        return np.linalg.inv(self.spd_matrix(x))

    def spd_matrix(self, x) -> np.ndarray:
        a = self.matrix(x)
        try:
            np.linalg.cholesky(a)
        except np.linalg.LinAlgError:
            raise GeometryError(
                f"metric {self.label or 'a'} not positive definite at "
                f"{tuple(float(v) for v in x)}"
            ) from None
        return a


@dataclass(frozen=True)
class OneFormField:
    """1-form b_i(x) given by a component evaluator (same calling contract)."""

    n: int
    fn: Callable[[Any], Any]
    label: str = ""
    chart: Optional[Box] = None

    def covector(self, x) -> np.ndarray:
        return _values(self.fn([float(v) for v in x]))

    def components_jets(self, x, seeds):
        return np.asarray(self.fn(jet_point(x, seeds)), dtype=object)


@dataclass(frozen=True)
class CovariantPackage:
    """Covariant data of (a, b) at one point.

    nabla[i, j] = b_{i|j}; r and s are its symmetric/antisymmetric parts,
    with r + s = nabla exact by construction (s is defined as nabla - r).
    The contractions r_vec, s_vec, s_up and the squared length b2 follow the
    usual index conventions r_j = b^i r_ij, s_j = b^i s_ij, s^i = a^{ik} s_k.
    Point-level metric data (a, a_inv, gamma, b_lo, b_up) rides along so
    spray assembly does not recompute it.
    """

    x: tuple
    nabla: np.ndarray
    r: np.ndarray
    s: np.ndarray
    r_vec: np.ndarray
    s_vec: np.ndarray
    s_up: np.ndarray
    b2: float
    a: np.ndarray
    a_inv: np.ndarray
    gamma: np.ndarray
    b_lo: np.ndarray
    b_up: np.ndarray


def christoffel(a: MetricField, x) -> np.ndarray:
    """Levi-Civita symbols gamma^i_{jk} from AD-supplied metric derivatives.

    gamma^i_{jk} = 1/2 a^{il} (d_k a_{lj} + d_j a_{lk} - d_l a_{jk});
    equals the y-Hessian of the alpha-spray, which tests check separately.
    """
    n = a.n
    jets = a.matrix_jets(x, np.eye(n))
    vals = np.empty((n, n))
    da = np.empty((n, n, n))
    for i in range(n):
        for j in range(n):
            z = jets[i, j]
            if isinstance(z, Jet2):
                vals[i, j] = z.value
                da[i, j, :] = z.grad
            else:
                vals[i, j] = float(z)
                da[i, j, :] = 0.0
    try:
        np.linalg.cholesky(vals)
    except np.linalg.LinAlgError:
        raise GeometryError(
            f"metric {a.label or 'a'} not positive definite at "
            f"{tuple(float(v) for v in x)}"
        ) from None
    ainv = np.linalg.inv(vals)
    # t[l, j, k] = d_k a_{lj} + d_j a_{lk} - d_l a_{jk}
    t = da + da.transpose(0, 2, 1) - da.transpose(2, 0, 1)
    return 0.5 * np.einsum("il,ljk->ijk", ainv, t)


def spray_alpha(a: MetricField, x, y) -> np.ndarray:
    """Spray coefficients of the Riemannian metric: G^i = 1/2 gamma^i_{jk} y^j y^k."""
    y = np.asarray(y, dtype=float)
    gamma = christoffel(a, x)
    return 0.5 * np.einsum("ijk,j,k->i", gamma, y, y)


def covariant_package(a: MetricField, b: OneFormField, x) -> CovariantPackage:
    """Assemble b_{i|j} = d_j b_i - b_k gamma^k_{ij} and its contractions."""
    n = a.n
    gamma = christoffel(a, x)
    avals = a.matrix(x)
    ainv = np.linalg.inv(avals)
    bjets = b.components_jets(x, np.eye(n))
    blo = np.empty(n)
    db = np.empty((n, n))
    for i in range(n):
        z = bjets[i]
        if isinstance(z, Jet2):
            blo[i] = z.value
            db[i, :] = z.grad
        else:
            blo[i] = float(z)
            db[i, :] = 0.0
    nabla = db - np.einsum("k,kij->ij", blo, gamma)
    r = 0.5 * (nabla + nabla.T)
    s = nabla - r
    bup = ainv @ blo
    r_vec = bup @ r
    s_vec = bup @ s
    s_up = ainv @ s_vec
    b2 = float(bup @ blo)
    return CovariantPackage(
        x=tuple(float(v) for v in x),
        nabla=nabla,
        r=r,
        s=s,
        r_vec=r_vec,
        s_vec=s_vec,
        s_up=s_up,
        b2=b2,
        a=avals,
        a_inv=ainv,
        gamma=gamma,
        b_lo=blo,
        b_up=bup,
    )


# -- builtin fields ------------------------------------------------------------


def euclidean_metric(n, label="euclidean", chart=None) -> MetricField:
    def fn(xs):
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                out[i, j] = 1.0 if i == j else 0.0
        return out

    return MetricField(n, fn, label=label, chart=chart)


def conformal_metric(n, direction, label="", chart=None) -> MetricField:
    """a_ij = exp(2 <d, x>) delta_ij."""
    d = tuple(float(v) for v in direction)
    from .jets import exp as jexp

    def fn(xs):
        sigma = xs[0] * d[0]
        for i in range(1, n):
            sigma = sigma + xs[i] * d[i]
        f = jexp(2.0 * sigma)
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                out[i, j] = f if i == j else 0.0
        return out

    return MetricField(n, fn, label=label or f"conformal{d}", chart=chart)


def constant_form(coeffs, label="", chart=None) -> OneFormField:
    c = tuple(float(v) for v in coeffs)
    n = len(c)

    def fn(xs):
        return np.array(list(c), dtype=object)

    return OneFormField(n, fn, label=label or f"const{c}", chart=chart)


def finsler_field(a: MetricField) -> TwoArgField:
    """The Riemannian norm sqrt(a_ij(x) y^i y^j) as a Finsler-style field."""
    n = a.n

    def fn(xj, yj):
        A = a.fn(xj)
        acc = None
        for i in range(n):
            for j in range(n):
                term = A[i, j] * yj[i] * yj[j]
                acc = term if acc is None else acc + term
        return sqrt(acc)

    return TwoArgField(n, fn, name=a.label or "alpha")

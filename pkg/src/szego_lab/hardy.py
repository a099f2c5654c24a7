"""Truncated Hardy-space series and the norms used throughout the package.

A :class:`HardySeries` of degree N stores the coefficients u_0..u_N of

    u(theta) = sum_{k=0}^{N} u_k exp(i k theta),

negative frequencies being identically zero. Norm sums use ``math.fsum`` so
that conservation drifts stay meaningful near 1e-12.
"""
from dataclasses import dataclass
import math

import numpy as np

from szego_lab.errors import GevreyRangeError, NumericalFailure, ValidationError

# log of the largest finite double
LOG_MAX = math.log(np.finfo(float).max)


def _as_coeffs(values):
    arr = np.array(values, dtype=np.complex128, copy=True).reshape(-1)
    if arr.size == 0:
        raise ValidationError("a series needs at least one coefficient", "coeffs")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("coefficients must be finite", "coeffs")
    arr.flags.writeable = False
    return arr


class HardySeries:
    """Coefficients u_0..u_N of a trigonometric polynomial with no negative modes.

    Trailing zeros are kept: the declared degree is part of the value.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs):
        self._coeffs = _as_coeffs(coeffs)

    @classmethod
    def zeros(cls, degree):
        return cls(np.zeros(degree + 1, dtype=np.complex128))

    @classmethod
    def monomial(cls, k, c=1.0, degree=None):
        """c * exp(i k theta), zero-padded to ``degree`` (default k)."""
        degree = k if degree is None else degree
        if k < 0 or degree < k:
            raise ValidationError(f"mode {k} outside 0..{degree}", "k")
        out = np.zeros(degree + 1, dtype=np.complex128)
        out[k] = c
        return cls(out)

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def degree(self):
        return self._coeffs.shape[0] - 1

    def padded(self, degree):
        """Same function viewed at a larger degree."""
        if degree < self.degree:
            raise ValidationError(f"cannot pad degree {self.degree} down to {degree}", "degree")
        out = np.zeros(degree + 1, dtype=np.complex128)
        out[: self.degree + 1] = self._coeffs
        return HardySeries(out)

    def scaled(self, c):
        return HardySeries(c * self._coeffs)

    def __len__(self):
        return self._coeffs.shape[0]

    def __eq__(self, other):
        if not isinstance(other, HardySeries):
            return NotImplemented
        return np.array_equal(self._coeffs, other._coeffs)

    def __hash__(self):
        return hash(self._coeffs.tobytes())

    def __repr__(self):
        return f"HardySeries({self._coeffs.tolist()!r})"

    def to_json(self):
        """``{"coeffs": [[re, im], ...]}``; floats use repr and round-trip exactly."""
        return {"coeffs": [[float(z.real), float(z.imag)] for z in self._coeffs]}

    @classmethod
    def from_json(cls, obj):
        try:
            pairs = obj["coeffs"]
            vals = [complex(float(re), float(im)) for re, im in pairs]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed series: {exc}", "coeffs") from exc
        return cls(vals)


@dataclass(frozen=True)
class GevreyOrder:
    """Weight exp(sigma * k**gamma); gamma=1 is the analytic class."""

    sigma: float
    gamma: float = 1.0

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValidationError("sigma must be finite and >= 0", "sigma")
        if not 0 < self.gamma <= 1:
            raise ValidationError("gamma must lie in (0, 1]", "gamma")


class LaurentSlice:
    """Two-sided coefficients v_{-M}..v_M, stored with v_k at index k + M."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs):
        arr = _as_coeffs(coeffs)
        if arr.shape[0] % 2 != 1:
            raise ValidationError("a Laurent slice needs 2M+1 coefficients", "coeffs")
        self._coeffs = arr

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def halfwidth(self):
        return (self._coeffs.shape[0] - 1) // 2

    def __getitem__(self, k):
        m = self.halfwidth
        if not -m <= k <= m:
            return 0j
        return complex(self._coeffs[k + m])

    def __repr__(self):
        return f"LaurentSlice(M={self.halfwidth}, {self._coeffs.tolist()!r})"


def _abs2(u):
    c = u.coeffs
    return c.real * c.real + c.imag * c.imag


def l2_norm(u):
    return math.sqrt(math.fsum(_abs2(u)))


def momentum(u):
    """sum_k k |u_k|^2 (not square-rooted)."""
    return math.fsum(np.arange(len(u)) * _abs2(u))


def hs_norm(u, s):
    """(sum_k (k^{2s} + 1) |u_k|^2)^{1/2}, with 0^0 = 1 at s = 0."""
    if s < 0:
        raise ValidationError("s must be >= 0", "s")
    k = np.arange(len(u), dtype=float)
    if s == 0:
        weights = np.full(k.shape, 2.0)
    else:
        weights = k ** (2.0 * s) + 1.0
    return math.sqrt(math.fsum(weights * _abs2(u)))


def wiener_norm(u):
    return math.fsum(np.abs(u.coeffs))


def _checked_exp(exponents):
    bad = np.nonzero(exponents > LOG_MAX)[0]
    if bad.size:
        k = int(bad[0])
        raise GevreyRangeError(k, float(exponents[k]))
    return np.exp(exponents)


def gevrey_weights(degree, order):
    """exp(sigma k^gamma) for k = 0..degree; raises on overflow."""
    k = np.arange(degree + 1, dtype=float)
    return _checked_exp(order.sigma * k ** order.gamma)


def gevrey_wiener_norm(u, order):
    """sum_k exp(sigma k^gamma) |u_k|."""
    if order.sigma == 0:
        return wiener_norm(u)
    return math.fsum(gevrey_weights(u.degree, order) * np.abs(u.coeffs))


def classical_gevrey_norm(u, s, sigma):
    """||A^s e^{sigma A} u||_{L^2} with A = sqrt(1 - Laplacian)."""
    if s < 0 or sigma < 0:
        raise ValidationError("s and sigma must be >= 0", "s" if s < 0 else "sigma")
    jk = 1.0 + np.arange(len(u), dtype=float) ** 2
    weights = jk**s * _checked_exp(2.0 * sigma * np.sqrt(jk))
    return math.sqrt(math.fsum(weights * _abs2(u)))


def multiply(u, v):
    """Exact Cauchy product, degree N_u + N_v."""
    return HardySeries(np.convolve(u.coeffs, v.coeffs))


def abs_square(u):
    """|u|^2 as a Laurent slice of halfwidth N."""
    c = u.coeffs
    prod = np.convolve(c, np.conj(c[::-1]))
    if not np.all(np.isfinite(prod)):
        raise NumericalFailure("|u|^2 overflows")
    return LaurentSlice(prod)


def laurent_times(w, u):
    """w * u as a Laurent slice (halfwidth M + N), no truncation."""
    m, n = w.halfwidth, u.degree
    prod = np.convolve(w.coeffs, u.coeffs)  # modes -M .. M+N
    out = np.zeros(2 * (m + n) + 1, dtype=np.complex128)
    out[n : n + prod.shape[0]] = prod
    return LaurentSlice(out)


def szego_project(w, degree):
    """Keep modes 0..degree of ``w`` (Szego projection followed by truncation)."""
    m = w.halfwidth
    if degree > m:
        raise ValidationError(f"degree {degree} exceeds halfwidth {m}", "degree")
    return HardySeries(w.coeffs[m : m + degree + 1])

"""Bessel and Hankel functions of order 0 and 1 for complex arguments.

Two evaluation regimes are used:

* ``|z| <= SWITCHOVER_RADIUS``: ascending power series for ``J_n`` and
  ``Y_n`` (principal logarithm), Hankel functions as ``J_n +/- i Y_n``.
* ``|z| > SWITCHOVER_RADIUS``: the large-argument Hankel expansion with
  coefficients ``a_k(n)``.  The ``H^(1)`` expansion is applied in the closed
  upper half-plane, the ``H^(2)`` expansion likewise, and the lower
  half-plane is reached through ``H^(1)(conj z) = conj(H^(2)(z))``.  For
  ``Re z < 0`` the values come from ``-z`` via the analytic continuation
  formulas, since the expansions lose accuracy near ``arg z = +/- pi``.

Inside the switchover radius a Hankel function that is exponentially small
(``H^(1)`` well inside the upper half-plane, ``H^(2)`` in the lower) cannot be
formed as ``J +/- i Y`` without cancellation; it is computed from its
integral representation ``H^(1)_n(z) = e^{-i n pi/2}/(pi i) int e^{i z cosh u} cosh(nu) du``
with the trapezoid rule, which converges geometrically for this integrand.

Arguments on the negative real axis select a side of the branch cut through
the sign of the imaginary zero: ``complex(-x, +0.0)`` is the upper side,
``complex(-x, -0.0)`` the lower side.  This matches how ``numpy.log`` treats
signed zeros.

All functions accept scalars or arrays and are pure.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import factorial

import numpy as np

EULER_GAMMA = 0.57721566490153286061
SWITCHOVER_RADIUS = 14.0
SERIES_REL_TOL = 1e-17
SERIES_MAX_TERMS = 60
ASYMPTOTIC_MAX_ORDER = 30


class Method(enum.Enum):
    SERIES = "series"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class EvalMethod:
    """Which regime produced a value, and how many terms were summed."""

    tag: Method
    order: int


def _as_complex(z) -> tuple[np.ndarray, bool]:
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("argument must be finite (got NaN or infinity)")
    return np.atleast_1d(arr), arr.ndim == 0


def _check_order(n: int) -> None:
    if n not in (0, 1):
        raise ValueError(f"only orders 0 and 1 are supported, got {n}")


def _check_kind(kind: int) -> None:
    if kind not in (1, 2):
        raise ValueError(f"Hankel kind must be 1 or 2, got {kind}")


def _check_nonzero(z: np.ndarray) -> None:
    if np.any(z == 0):
        raise ValueError("z = 0 is a logarithmic branch point")


def _unwrap(out: np.ndarray, scalar: bool):
    return complex(out[0]) if scalar else out


# --------------------------------------------------------------------------
# Power series
# --------------------------------------------------------------------------

def _series_j(n: int, z: np.ndarray) -> tuple[np.ndarray, int]:
    q = -0.25 * z * z
    term = np.ones_like(z) / factorial(n)
    total = term.copy()
    k = 0
    for k in range(1, SERIES_MAX_TERMS):
        term = term * q / (k * (n + k))
        total = total + term
        if np.all(np.abs(term) <= SERIES_REL_TOL * np.abs(total)):
            break
    return (0.5 * z) ** n * total, k + 1


def _series_y(n: int, z: np.ndarray) -> tuple[np.ndarray, int]:
    jn, _ = _series_j(n, z)
    half = 0.5 * z
    q = -0.25 * z * z
    # digamma(k+1) and digamma(n+k+1) by the recurrence psi(k+1) = psi(k) + 1/k
    psi_k = -EULER_GAMMA
    psi_nk = -EULER_GAMMA + sum(1.0 / j for j in range(1, n + 1))
    term = np.ones_like(z) / factorial(n)
    total = (psi_k + psi_nk) * term
    k = 0
    for k in range(1, SERIES_MAX_TERMS):
        psi_k += 1.0 / k
        psi_nk += 1.0 / (n + k)
        term = term * q / (k * (n + k))
        contrib = (psi_k + psi_nk) * term
        total = total + contrib
        if np.all(np.abs(contrib) <= SERIES_REL_TOL * np.abs(total)):
            break
    y = (2.0 / np.pi) * np.log(half) * jn - half ** n * total / np.pi
    if n == 1:
        # finite sum k = 0 .. n-1 reduces to the single term (n-1)!/0! = 1
        y = y - 1.0 / (np.pi * half)
    return y, k + 1


# --------------------------------------------------------------------------
# Large-argument expansion
# --------------------------------------------------------------------------

def asymptotic_coefficient(k: int, n: int) -> float:
    """Real part of ``a_k(n)`` without the ``i^-k`` factor.

    The full coefficient is ``asymptotic_coefficient(k, n) / i**k``.
    """
    num = 1.0
    for j in range(1, k + 1):
        num *= 4 * n * n - (2 * j - 1) ** 2
    return num / (8.0 ** k * factorial(k))


def _asym_sum(n: int, z: np.ndarray, sign: int) -> tuple[np.ndarray, int]:
    """Sum of ``(sign*i)^k a_k(n) / z^k`` truncated at the smallest term.

    ``sign=+1`` is the ``H^(1)`` series, ``sign=-1`` the ``H^(2)`` series.
    """
    step = sign * 1j / z
    total = np.ones_like(z)
    # working set of indices still gaining terms; shrinks as elements finish
    idx = np.arange(z.size)
    term = np.ones_like(z)
    last = np.ones(z.shape)
    used = 0
    for k in range(1, ASYMPTOTIC_MAX_ORDER + 1):
        term = term * step[idx] * ((4 * n * n - (2 * k - 1) ** 2) / (8.0 * k))
        mag = np.abs(term)
        grow = mag < last
        idx, term, mag = idx[grow], term[grow], mag[grow]
        if idx.size == 0:
            break
        total[idx] += term
        used = k
        keep = mag > SERIES_REL_TOL * np.abs(total[idx])
        idx, term, last = idx[keep], term[keep], mag[keep]
        if idx.size == 0:
            break
    return total, used


def _asym_upper(kind: int, n: int, z: np.ndarray) -> np.ndarray:
    """Asymptotic H^(kind)_n for Im z >= 0 (no conjugation)."""
    sign = 1 if kind == 1 else -1
    series, _ = _asym_sum(n, z, sign)
    phase = z - 0.25 * np.pi - 0.5 * n * np.pi
    return np.sqrt(2.0 / (np.pi * z)) * np.exp(sign * 1j * phase) * series


def _asym_right(kind: int, n: int, z: np.ndarray) -> np.ndarray:
    """Asymptotic H^(kind)_n for Re z >= 0; lower half via conjugation."""
    lower = np.signbit(z.imag)
    out = np.empty_like(z)
    up = ~lower
    if np.any(up):
        out[up] = _asym_upper(kind, n, z[up])
    if np.any(lower):
        other = 2 if kind == 1 else 1
        out[lower] = np.conj(_asym_upper(other, n, np.conj(z[lower])))
    return out


def _continue_left(kind: int, n: int, z: np.ndarray, right) -> np.ndarray:
    """Evaluate at Re z < 0 from ``w = -z`` with the m = +/-1 continuation.

    ``right(kind, n, w)`` evaluates in the right half-plane.  The upper side
    uses ``z = w e^{i pi}`` (m = 1), the lower side ``z = w e^{-i pi}`` (m = -1).
    """
    w = -z
    h1 = right(1, n, w)
    h2 = right(2, n, w)
    upper = ~np.signbit(z.imag)
    sgn = -1.0 if n % 2 else 1.0
    if kind == 1:
        # m=1: (-1)^(n-1) H2 ; m=-1: (-1)^(n+1) (-2 H1 - H2)
        return np.where(upper, -sgn * h2, -sgn * (-2.0 * h1 - h2))
    # m=1: (-1)^n (H1 + 2 H2) ; m=-1: (-1)^n (-H1)
    return np.where(upper, sgn * (h1 + 2.0 * h2), -sgn * h1)


def _asym_hankel(kind: int, n: int, z: np.ndarray) -> np.ndarray:
    left = np.signbit(z.real) & (z.real != 0)
    out = np.empty_like(z)
    if np.any(~left):
        out[~left] = _asym_right(kind, n, z[~left])
    if np.any(left):
        out[left] = _continue_left(kind, n, z[left], _asym_right)
    return out


# --------------------------------------------------------------------------
# Integral representation for the recessive solution
# --------------------------------------------------------------------------

# Below the switchover radius the series for H^(1) loses accuracy like
# eps * e^{|z| + Im z} once Im z > 0, because J and Y grow while H^(1)
# decays.  Inside the wedge RECESSIVE_WEDGE <= arg z <= pi - RECESSIVE_WEDGE
# (and away from the origin) the recessive function is taken from its
# integral representation instead; H^(2) is handled by conjugation.
RECESSIVE_WEDGE = 0.1
RECESSIVE_MIN_RADIUS = 2.0


def _integral_h1(n: int, z: np.ndarray) -> np.ndarray:
    """H^(1)_n(z) for Im z > 0 from the cosh-integral representation.

    The integrand is even and analytic in the strip |Im u| < min(arg z,
    pi - arg z), so the trapezoid rule on the whole line converges
    geometrically; the step is chosen from the strip width.
    """
    theta = np.angle(z)
    strip = float(np.min(np.minimum(theta, np.pi - theta)))
    step = min(0.05, 2.0 * np.pi * strip / 38.0)
    u_max = np.arccosh(max(1.0, 45.0 / float(np.min(z.imag))))
    half = int(np.ceil(u_max / step))
    u = step * np.arange(-half, half + 1)
    vals = np.exp(1j * np.outer(z, np.cosh(u))) @ np.cosh(n * u)
    return np.exp(-0.5j * n * np.pi) / (np.pi * 1j) * step * vals


def _is_recessive(kind: int, z: np.ndarray) -> np.ndarray:
    im = z.imag if kind == 1 else -z.imag
    return (np.abs(z) > RECESSIVE_MIN_RADIUS) & (im > np.abs(z) * np.sin(RECESSIVE_WEDGE))


def _small_hankel(kind: int, n: int, z: np.ndarray) -> np.ndarray:
    """Small-|z| path: series, or the integral for the recessive function."""
    recessive = _is_recessive(kind, z)
    out = np.empty_like(z)
    if np.any(~recessive):
        out[~recessive] = _series_hankel(kind, n, z[~recessive])
    if np.any(recessive):
        zr = z[recessive]
        out[recessive] = _integral_h1(n, zr) if kind == 1 else np.conj(_integral_h1(n, np.conj(zr)))
    return out


def _series_hankel(kind: int, n: int, z: np.ndarray) -> np.ndarray:
    j, _ = _series_j(n, z)
    y, _ = _series_y(n, z)
    return j + 1j * y if kind == 1 else j - 1j * y


# --------------------------------------------------------------------------
# Public API
# --------------------------------------------------------------------------

def bessel_j(n: int, z):
    """Bessel function of the first kind ``J_n(z)``, ``n`` in {0, 1}."""
    _check_order(n)
    arr, scalar = _as_complex(z)
    out = np.empty_like(arr)
    small = np.abs(arr) <= SWITCHOVER_RADIUS
    if np.any(small):
        out[small] = _series_j(n, arr[small])[0]
    if np.any(~small):
        big = arr[~small]
        out[~small] = 0.5 * (_asym_hankel(1, n, big) + _asym_hankel(2, n, big))
    return _unwrap(out, scalar)


def bessel_y(n: int, z):
    """Bessel function of the second kind ``Y_n(z)`` on the principal branch."""
    _check_order(n)
    arr, scalar = _as_complex(z)
    _check_nonzero(arr)
    out = np.empty_like(arr)
    small = np.abs(arr) <= SWITCHOVER_RADIUS
    if np.any(small):
        out[small] = _series_y(n, arr[small])[0]
    if np.any(~small):
        big = arr[~small]
        out[~small] = (_asym_hankel(1, n, big) - _asym_hankel(2, n, big)) / 2j
    return _unwrap(out, scalar)


def hankel(kind: int, n: int, z, method: Method | None = None):
    """Hankel function ``H^(kind)_n(z)``.

    ``method`` forces a regime regardless of ``|z|``; it exists for
    cross-over testing and should normally be left as ``None``.
    """
    _check_kind(kind)
    _check_order(n)
    arr, scalar = _as_complex(z)
    _check_nonzero(arr)
    if method is Method.SERIES:
        return _unwrap(_small_hankel(kind, n, arr), scalar)
    if method is Method.ASYMPTOTIC:
        return _unwrap(_asym_hankel(kind, n, arr), scalar)
    out = np.empty_like(arr)
    small = np.abs(arr) <= SWITCHOVER_RADIUS
    if np.any(small):
        out[small] = _small_hankel(kind, n, arr[small])
    if np.any(~small):
        out[~small] = _asym_hankel(kind, n, arr[~small])
    return _unwrap(out, scalar)


def eval_method(n: int, z: complex) -> EvalMethod:
    """Report which regime and how many terms a scalar evaluation uses."""
    _check_order(n)
    arr, _ = _as_complex(z)
    if abs(arr[0]) <= SWITCHOVER_RADIUS:
        return EvalMethod(Method.SERIES, _series_j(n, arr)[1])
    return EvalMethod(Method.ASYMPTOTIC, _asym_sum(n, arr, 1)[1])


def hankel_ratio(s):
    """``H_0^(1)(i s) / H_1^(1)(i s)`` continued across the imaginary s-axis.

    The ratio is holomorphic in the s-plane cut along the negative real
    axis.  For ``Re s < 0, Im s > 0`` the principal-branch Hankel functions
    would jump at ``s = i omega``, so the value is continued with
    ``H_n^(1)(w e^{i pi}) = (-1)^(n-1) H_n^(2)(w)``, ``w = -i s``.
    Points on the cut are selected with a signed imaginary zero:
    ``complex(-x, +0.0)`` is the upper side, ``complex(-x, -0.0)`` the lower.

    In the asymptotic regime the ratio of the two expansions is formed
    directly, so the exponential factors never appear.
    """
    arr, scalar = _as_complex(s)
    _check_nonzero(arr)
    # z = i s, written component-wise to keep signed zeros
    z = np.empty_like(arr)
    z.real = -arr.imag
    z.imag = arr.real
    continued = np.signbit(z.real) & np.signbit(z.imag)
    w = np.where(continued, -z, z)
    small = np.abs(w) <= SWITCHOVER_RADIUS
    out = np.empty_like(w)

    idx = small & ~continued
    if np.any(idx):
        out[idx] = _small_hankel(1, 0, w[idx]) / _small_hankel(1, 1, w[idx])
    idx = small & continued
    if np.any(idx):
        out[idx] = -_small_hankel(2, 0, w[idx]) / _small_hankel(2, 1, w[idx])

    idx = ~small
    if np.any(idx):
        wb = w[idx]
        cont = continued[idx]
        lower = np.signbit(wb.imag)
        res = np.empty_like(wb)
        # H^(1) ratio is i*S0/S1 in the upper half-plane, H^(2) ratio -i*T0/T1;
        # the lower half-plane goes through conjugation of the opposite kind.
        sel = ~cont & ~lower
        if np.any(sel):
            zu = wb[sel]
            res[sel] = 1j * _asym_sum(0, zu, 1)[0] / _asym_sum(1, zu, 1)[0]
        sel = ~cont & lower
        if np.any(sel):
            zc = np.conj(wb[sel])
            res[sel] = np.conj(-1j * _asym_sum(0, zc, -1)[0] / _asym_sum(1, zc, -1)[0])
        # continued points: w = -z lies in the first quadrant, ratio = -H2_0/H2_1
        sel = cont
        if np.any(sel):
            zu = wb[sel]
            res[sel] = 1j * _asym_sum(0, zu, -1)[0] / _asym_sum(1, zu, -1)[0]
        out[idx] = res
    return _unwrap(out, scalar)

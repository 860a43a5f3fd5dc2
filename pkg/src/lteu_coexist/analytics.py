"""Closed-form small-cell statistics under ZFBF with quantized CSI.

The SINR of a served user has CDF

    F(x) = 1 - exp(-K N0 x / P_T) / (1 + sigma x)^(K-1)

and the sum throughput ``K E[log2(1 + SINR)]`` reduces to the auxiliary
integral ``psi`` which in turn expands into exponential integrals.

``psi`` and ``i2`` are evaluated from their finite expansions. Those sums
alternate in sign and can cancel badly (large ``x*y`` or ``y`` close to 1);
when the estimated loss of accuracy is too large the same expansion is
re-evaluated with mpmath at a working precision sized to the cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate

from .config import SmallCellConfig

EULER_GAMMA = 0.57721566490153286061
LOG2E = 1.0 / math.log(2.0)

_EPS = np.finfo(float).eps
# relative error budget before switching to extended precision
_CANCEL_BUDGET = 1e-12


# -- exponential integral --------------------------------------------------

def _e1_series(x: float) -> float:
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    k = 1
    while True:
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < 1e-17 * max(abs(total), 1e-300):
            break
        k += 1
        if k > 500:
            break
    return -EULER_GAMMA - math.log(x) - total


def _scaled_e1_cf(x: float) -> float:
    """e^x E1(x) via the modified Lentz continued fraction (x > 1)."""
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError(f"E1 continued fraction did not converge at x={x}")


def exp_integral_e1(x: float) -> float:
    """First-order exponential integral ``E1(x) = int_x^inf e^-t / t dt``, x > 0."""
    x = float(x)
    if not x > 0:
        raise ValueError("E1 requires x > 0")
    if x <= 1.0:
        return _e1_series(x)
    if x > 745.0:
        return 0.0
    return math.exp(-x) * _scaled_e1_cf(x)


def scaled_e1(x: float) -> float:
    """``e^x E1(x)`` without overflow for large x."""
    x = float(x)
    if not x > 0:
        raise ValueError("E1 requires x > 0")
    if x <= 1.0:
        return math.exp(x) * _e1_series(x)
    return _scaled_e1_cf(x)


def _mp_scaled_e1(u):
    return mpmath.exp(u) * mpmath.e1(u)


# -- I2 and psi --------------------------------------------------------------

def _i2_terms(x, y, z: int, expe1):
    """Terms of the finite expansion of ``int_0^inf e^{-xt} / (t+y)^z dt``."""
    if z == 1:
        return [expe1(x * y)]
    fz = math.factorial(z - 1)
    terms = [math.factorial(k - 1) * (-x) ** (z - k - 1) / (fz * y ** k) for k in range(1, z)]
    terms.append((-x) ** (z - 1) / fz * expe1(x * y))
    return terms


def _check_i2_domain(x, y, z):
    if int(z) != z or z < 1:
        raise ValueError("z must be a positive integer")
    if not y > 0:
        raise ValueError("y must be positive")
    if not x * y > 0:
        raise ValueError("x*y must be positive")


def i2(x: float, y: float, z: int) -> float:
    """``int_0^inf exp(-x t) / (t + y)^z dt`` from its exponential-integral expansion."""
    _check_i2_domain(x, y, z)
    z = int(z)
    terms = _i2_terms(float(x), float(y), z, scaled_e1)
    value = math.fsum(terms)
    cond = sum(abs(t) for t in terms) / abs(value) if value != 0 else math.inf
    if cond * _EPS <= _CANCEL_BUDGET:
        return value
    return float(_mp_eval(lambda: mpmath.fsum(_i2_terms(mpmath.mpf(x), mpmath.mpf(y), z, _mp_scaled_e1)), cond))


def _psi_parts(x, y, z: int, expe1):
    """Signed terms of the partial-fraction expansion of psi and their absolute mass."""
    parts = []
    mass = 0.0
    one_minus_y = 1 - y
    for i in range(1, z + 1):
        inner = _i2_terms(x, y, z - i + 1, expe1)
        coef = (-1) ** (i - 1) * one_minus_y ** (-i)
        parts.append(coef * sum(inner))
        mass += abs(coef) * sum(abs(t) for t in inner)
    tail_coef = (y - 1) ** (-z)
    tail = expe1(x)
    parts.append(tail_coef * tail)
    mass += abs(tail_coef * tail)
    return parts, mass


def psi(x: float, y: float, z: int) -> float:
    """``int_0^inf exp(-x t) / ((t + 1)(t + y)^z) dt`` for x > 0, y > 0, z >= 1."""
    if not x > 0:
        raise ValueError("psi requires x > 0")
    if not y > 0:
        raise ValueError("psi requires y > 0")
    if int(z) != z or z < 1:
        raise ValueError("z must be a positive integer")
    x, y, z = float(x), float(y), int(z)
    if y == 1.0:
        # the integrand becomes e^{-xt}/(t+1)^{z+1}
        return i2(x, 1.0, z + 1)
    if abs(y - 1.0) < 1e-6:
        return psi_quadrature(x, y, z)
    parts, mass = _psi_parts(x, y, z, scaled_e1)
    value = math.fsum(parts)
    cond = mass / abs(value) if value != 0 else math.inf
    if cond * _EPS <= _CANCEL_BUDGET:
        return value

    def mp_value():
        mx, my = mpmath.mpf(x), mpmath.mpf(y)
        p, _ = _psi_parts(mx, my, z, _mp_scaled_e1)
        return mpmath.fsum(p)

    return float(_mp_eval(mp_value, cond))


def _mp_eval(fn, cond):
    digits = 25 + (int(math.log10(cond)) + 1 if math.isfinite(cond) else 60)
    with mpmath.workdps(digits):
        return fn()


def psi_quadrature(x: float, y: float, z: int) -> float:
    """Direct adaptive quadrature of the defining integral of psi."""
    f = lambda t: math.exp(-x * t) / ((t + 1.0) * (t + y) ** z)
    v1, _ = integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
    v2, _ = integrate.quad(f, 1.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return v1 + v2


# -- SINR distribution and throughput --------------------------------------

@dataclass(frozen=True)
class SinrModel:
    k_sues: int
    sigma: float
    tx_power: float
    noise_power: float

    def __post_init__(self):
        if self.k_sues < 1:
            raise ValueError("k_sues must be >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if not self.tx_power > 0 or not self.noise_power > 0:
            raise ValueError("powers must be positive")

    @property
    def noise_rate(self) -> float:
        """``K N0 / P_T``, the exponential decay rate of the CCDF."""
        return self.k_sues * self.noise_power / self.tx_power

    @classmethod
    def from_config(cls, config: SmallCellConfig, k_sues: int, sigma_scale: float = 1.0) -> "SinrModel":
        return cls(k_sues, sigma_scale * config.b, config.tx_power, config.noise_power)


def sinr_cdf(x, model: SinrModel):
    """CDF of the per-user SINR; vectorized over ``x``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("SINR must be non-negative")
    ccdf = np.exp(-model.noise_rate * x - (model.k_sues - 1) * np.log1p(model.sigma * x))
    out = 1.0 - ccdf
    return float(out) if out.ndim == 0 else out


def spectral_efficiency(model: SinrModel) -> float:
    """Sum spectral efficiency ``K E[log2(1+SINR)]`` in bit/s/Hz (closed form)."""
    k, a, s = model.k_sues, model.noise_rate, model.sigma
    if k == 1 or s == 0.0:
        # exponential SINR: E[ln(1+X)] = e^a E1(a)
        return k * LOG2E * scaled_e1(a)
    return k * LOG2E * psi(a, 1.0 / s, k - 1) / s ** (k - 1)


def small_cell_throughput(model: SinrModel, bandwidth_hz: float) -> float:
    """Small-cell sum throughput in bits/s."""
    return bandwidth_hz * spectral_efficiency(model)


def spectral_efficiency_quadrature(model: SinrModel) -> float:
    """Independent check: ``K/ln2 int_0^inf (1-F(x)) / (1+x) dx`` by adaptive quadrature.

    Integrated in ``u = ln(1+x)`` so that the slowly decaying tail maps onto
    a short interval; split where the noise term starts to bite.
    """
    k, a, s = model.k_sues, model.noise_rate, model.sigma

    def g(u):
        if u > 700.0:
            return 0.0
        x = math.expm1(u)
        return math.exp(-a * x - (k - 1) * math.log1p(s * x))

    breaks = sorted({math.log1p(1.0 / a)} | ({math.log1p(1.0 / s)} if s > 0 else set()))
    edges = [0.0] + [b for b in breaks if b > 0]
    total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        v, _ = integrate.quad(g, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=500)
        total += v
    v, _ = integrate.quad(g, edges[-1], np.inf, epsabs=1e-13, epsrel=1e-12, limit=500)
    total += v
    return k * LOG2E * total


def small_cell_throughput_quadrature(model: SinrModel, bandwidth_hz: float) -> float:
    return bandwidth_hz * spectral_efficiency_quadrature(model)


def optimal_sue_count(n_dof: int, config: SmallCellConfig, sigma_scale: float = 1.0) -> tuple[int, float]:
    """Exhaustive search of the served-user count over ``2..n_dof``.

    Returns ``(k_star, throughput_bps)``; ties go to the smaller K.
    """
    if n_dof < 2:
        raise ValueError("need at least 2 spatial DoF to serve 2 users")
    best_k, best = 0, -math.inf
    for k in range(2, n_dof + 1):
        r = small_cell_throughput(SinrModel.from_config(config, k, sigma_scale), config.bandwidth_hz)
        if r > best:
            best_k, best = k, r
    return best_k, best

"""1-D harmonic oscillator: eigenfunctions, Wigner functions, coalescence kernels.

Eigenfunctions phi_n(x) use the inverse oscillator length nu = sqrt(m omega /
hbar).  The mixed (off-diagonal) Wigner functions

    W_{n' n}(x, q) = Int dx'/(2 pi hbar) e^{i x' q / hbar}
                     phi_{n'}(x + x'/2) phi_n(x - x'/2)

have the closed form, for n >= n',

    W_{n' n} = (-1)^{n'} / (pi hbar) sqrt(n'!/n!) w^{n-n'}
               L_{n'}^{(n-n')}(u) e^{-u/2},
    u = 2 (q^2/(hbar nu)^2 + nu^2 x^2),   w = sqrt(2) (nu x - i q/(hbar nu)),

with the n' > n triangle filled by Hermitian conjugation.  The generating
function wigner_1d_gen packages all of them at once and is what the transform
definition above actually produces; its Taylor coefficient of
alpha^{n'} beta^n times sqrt(n! n'!) is W_{n' n}.

Overlapping a mixed Wigner function with two displaced Gaussian wave packets
of common width delta gives the coalescence quasi-probabilities
P_{n' n}(r, p) of the relative coordinate.  They depend on the scale ratio
zeta = 2 delta nu and are extracted from a quadratic-exponent generating
function by exact truncated power-series arithmetic in (alpha, beta); numerical
differentiation is never used.  Note the opposite off-diagonal phase
convention of the quasi-probabilities relative to W_{n' n}: the quasi-
probability generating function is conventionally written with alpha and beta
exchanged, and the closed forms below follow that convention.  Diagonal
entries and all bilinear (Hermitian) combinations are unaffected.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .specfun import assoc_laguerre, hermite

__all__ = [
    "OscParams",
    "Phase1D",
    "phi_n",
    "wigner_1d",
    "wigner_1d_gen",
    "quasi_prob",
    "quasi_prob_table",
    "quasi_prob_zeta1",
]


@dataclass(frozen=True)
class OscParams:
    """Oscillator inverse length nu, wave-packet width delta, and hbar.

    The dimensionless scale ratio zeta = 2 delta nu is always derived, never
    stored, so it cannot drift out of sync.
    """

    nu: float
    delta: float = 0.5
    hbar: float = 1.0

    def __post_init__(self):
        if self.nu <= 0 or self.delta <= 0 or self.hbar <= 0:
            raise ValueError(f"nu, delta, hbar must all be positive, got {self}")

    @property
    def zeta(self):
        return 2.0 * self.delta * self.nu

    @classmethod
    def from_zeta(cls, nu, zeta, hbar=1.0):
        if zeta <= 0:
            raise ValueError(f"zeta must be positive, got {zeta}")
        return cls(nu=nu, delta=zeta / (2.0 * nu), hbar=hbar)


@dataclass(frozen=True)
class Phase1D:
    """A 1-D phase-space point (x, q)."""

    x: float
    q: float

    def u(self, params):
        """Dimensionless squared radius 2 (q^2/(hbar nu)^2 + nu^2 x^2)."""
        eta = self.q / (params.hbar * params.nu)
        return 2.0 * (eta * eta + (params.nu * self.x) ** 2)

    def zeta_angle(self, params):
        """Phase-space polar angle, tan = q / (hbar nu^2 x).

        Not to be confused with the scale ratio zeta = 2 delta nu.
        """
        return math.atan2(self.q, params.hbar * params.nu**2 * self.x)


def phi_n(n, x, params):
    """Normalized oscillator eigenfunction phi_n(x); accepts array x."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    nu = params.nu
    norm = math.sqrt(nu / (2.0**n * math.factorial(n) * math.sqrt(math.pi)))
    u = nu * x
    return norm * hermite(n, u) * np.exp(-0.5 * u * u)


def _wigner_poly(n_prime, n, xi, eta):
    """Polynomial part of W_{n'n} for n >= n' (everything except e^{-u/2}/pi hbar)."""
    u = 2.0 * (xi * xi + eta * eta)
    w = math.sqrt(2.0) * (xi - 1j * eta)
    pref = (-1.0) ** n_prime * math.sqrt(math.factorial(n_prime) / math.factorial(n))
    return pref * w ** (n - n_prime) * assoc_laguerre(n_prime, n - n_prime, u)


def wigner_1d(n_prime, n, ph, params):
    """Mixed Wigner function W_{n' n}(x, q); real for n = n'.

    Closed Laguerre form for n >= n'; the other triangle follows from
    W_{n' n} = conj(W_{n n'}).
    """
    if n_prime < 0 or n < 0:
        raise ValueError("state labels must be nonnegative")
    if n_prime > n:
        return wigner_1d(n, n_prime, ph, params).conjugate()
    nu, hbar = params.nu, params.hbar
    xi = nu * ph.x
    eta = ph.q / (hbar * nu)
    u = 2.0 * (xi * xi + eta * eta)
    return _wigner_poly(n_prime, n, xi, eta) * math.exp(-0.5 * u) / (math.pi * hbar)


def wigner_1d_gen(alpha, beta, ph, params):
    """Generating function of the mixed Wigner functions.

    G(alpha, beta; x, q) = exp(-u/2 + sqrt(2)(xi + i eta) alpha
                               + sqrt(2)(xi - i eta) beta - alpha beta) / (pi hbar)
    with xi = nu x, eta = q/(hbar nu).  W_{n' n} is sqrt(n! n'!) times the
    coefficient of alpha^{n'} beta^n, consistent with the transform
    definition and with wigner_1d.
    """
    nu, hbar = params.nu, params.hbar
    xi = nu * ph.x
    eta = ph.q / (hbar * nu)
    u = 2.0 * (xi * xi + eta * eta)
    expo = (
        -0.5 * u
        + math.sqrt(2.0) * (xi + 1j * eta) * alpha
        + math.sqrt(2.0) * (xi - 1j * eta) * beta
        - alpha * beta
    )
    return cmath.exp(expo) / (math.pi * hbar)


# ---------------------------------------------------------------------------
# Truncated bivariate power series in (alpha, beta).  Coefficients may be
# complex scalars or numpy arrays (the latter vectorizes grid evaluation).

def _poly_mul(pa, pb, order):
    out = {}
    for (i, j), ca in pa.items():
        for (k, l), cb in pb.items():
            d = (i + k, j + l)
            if d[0] + d[1] > order:
                continue
            prod = ca * cb
            if d in out:
                out[d] = out[d] + prod
            else:
                out[d] = prod
    return out


def _poly_exp(p, order):
    """exp of a series with zero constant term, truncated at total `order`."""
    if (0, 0) in p and np.any(p[(0, 0)] != 0):
        raise ValueError("series exponential requires a zero constant term")
    result = {(0, 0): 1.0 + 0j}
    term = {(0, 0): 1.0 + 0j}
    for k in range(1, order + 1):
        term = _poly_mul(term, p, order)
        if not term:
            break
        scale = 1.0 / k
        term = {d: c * scale for d, c in term.items()}
        for d, c in term.items():
            result[d] = result.get(d, 0.0 + 0j) + c
    return result


def _quasi_gen_series(r_i, p_i, params, order):
    """Constant factor and (alpha, beta) series of the quasi-probability
    generating function, truncated at total degree `order`.

    The exponent is the quadratic form obtained by folding Gaussian wave
    packets of width delta into the Wigner generating function:

        -alpha beta + [ (rho/z + z (alpha+beta)/sqrt(2))^2
                        + (z^2 pi~ - i (alpha-beta)/sqrt(2))^2 ] / (1+z^2)
        - rho^2/z^2 - z^2 pi~^2,

    rho = nu r, pi~ = p/(nu hbar), z = zeta.  Its constant part is
    -(rho^2 + z^2 pi~^2)/(1+z^2), the squared phase-space distance weighted by
    the scale ratio; the prefactor is 2 z/(1+z^2).
    """
    nu, hbar = params.nu, params.hbar
    z = params.zeta
    rho = np.asarray(r_i, dtype=float) * nu
    pit = np.asarray(p_i, dtype=float) / (nu * hbar)
    s2 = 1.0 / math.sqrt(2.0)
    p1 = {(0, 0): rho / z + 0j, (1, 0): z * s2 + 0j, (0, 1): z * s2 + 0j}
    p2 = {(0, 0): z * z * pit + 0j, (1, 0): -1j * s2, (0, 1): 1j * s2}
    quad = _poly_mul(p1, p1, order)
    for d, c in _poly_mul(p2, p2, order).items():
        quad[d] = quad.get(d, 0.0 + 0j) + c
    scale = 1.0 / (1.0 + z * z)
    expo = {d: c * scale for d, c in quad.items()}
    expo[(1, 1)] = expo.get((1, 1), 0.0 + 0j) - 1.0
    expo[(0, 0)] = expo.get((0, 0), 0.0 + 0j) - rho * rho / (z * z) - z * z * pit * pit
    const = expo.pop((0, 0))
    pref = 2.0 * z / (1.0 + z * z)
    return pref * np.exp(const), _poly_exp(expo, order)


def quasi_prob_table(r_i, p_i, params, nmax):
    """All quasi-probabilities P_{n' n} with n', n <= nmax at once.

    Returns a complex array T with T[n', n] = P_{n' n}(r_i, p_i); scalar
    inputs give a (nmax+1, nmax+1) table, array inputs append the broadcast
    shape.  Used by the 3-D coalescence assembly, which needs whole shells.
    """
    if nmax < 0:
        raise ValueError(f"nmax must be nonnegative, got {nmax}")
    base, series = _quasi_gen_series(r_i, p_i, params, 2 * nmax)
    shape = np.shape(base)
    table = np.zeros((nmax + 1, nmax + 1) + shape, dtype=complex)
    for (i, j), c in series.items():
        if i <= nmax and j <= nmax:
            table[i, j] = c
    for i in range(nmax + 1):
        for j in range(nmax + 1):
            table[i, j] *= math.sqrt(math.factorial(i) * math.factorial(j)) * base
    return table


def quasi_prob(n_prime, n, r_i, p_i, params):
    """Coalescence quasi-probability P_{n' n}(r_i, p_i) at any zeta > 0.

    sqrt(n! n'!) times the alpha^{n'} beta^n Taylor coefficient of the
    generating function, extracted by exact truncated series exponentiation.
    Diagonal entries are real coalescence probabilities; P_{n' n} =
    conj(P_{n n'}).
    """
    if n_prime < 0 or n < 0:
        raise ValueError("state labels must be nonnegative")
    base, series = _quasi_gen_series(r_i, p_i, params, n_prime + n)
    c = series.get((n_prime, n), 0.0 + 0j)
    out = c * math.sqrt(math.factorial(n) * math.factorial(n_prime)) * base
    if np.ndim(out) == 0:
        return complex(out)
    return out


def quasi_prob_zeta1(n_prime, n, r_i, p_i, params):
    """Closed form of P_{n' n} in the matched-scale case zeta = 1.

    P_{n' n} = e^{-v} / sqrt(n! n'!) * ((nu r + i p/(nu hbar))/sqrt(2))^n
               * ((nu r - i p/(nu hbar))/sqrt(2))^{n'},
    v = nu^2 r^2 / 2 + p^2 / (2 hbar^2 nu^2).
    """
    if n_prime < 0 or n < 0:
        raise ValueError("state labels must be nonnegative")
    if abs(params.zeta - 1.0) > 1e-12:
        raise ValueError(f"closed form requires zeta = 1, got zeta = {params.zeta}")
    nu, hbar = params.nu, params.hbar
    rho = nu * r_i
    pit = p_i / (nu * hbar)
    v = 0.5 * (rho * rho + pit * pit)
    zp = (rho + 1j * pit) / math.sqrt(2.0)
    zm = (rho - 1j * pit) / math.sqrt(2.0)
    return (
        math.exp(-v)
        / math.sqrt(math.factorial(n) * math.factorial(n_prime))
        * zp**n
        * zm**n_prime
    )

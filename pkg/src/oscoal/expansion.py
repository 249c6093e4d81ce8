"""Exact expansion of angular-momentum eigenstates over factorized eigenstates.

The isotropic 3-D oscillator has two natural eigenbases: simultaneous
eigenstates of (H, L^2, L_3) labelled (k, l, m), and products of 1-D
eigenfunctions labelled (n1, n2, n3).  Within one energy shell
N = 2k + l = n1 + n2 + n3 the two are related by a unitary coefficient matrix
C_{klm, n1 n2 n3}.  This module computes those coefficients in closed form and
entirely in exact arithmetic: every coefficient is (+/-1) * sqrt(nonnegative
rational) * (Gaussian rational), so unitarity and orthogonality can be checked
without any floating point at all.

A coefficient vanishes unless both selection rules hold:

* energy matching:  2k + l = n1 + n2 + n3,
* parity along the quantization axis:  l + m - n3 is even.

The surviving sum runs over (j1, j2, j3) with j1 + j2 + j3 = k, 2 j_i <= n_i,
2 j1 >= n1 - l and 2 (j1 + j2) >= n1 + n2 - l; its inner sum over rho is a
finite binomial convolution, equal (where defined) to a terminating Gauss
hypergeometric value at argument -1.

An independent Gauss-Hermite quadrature oracle evaluates the defining overlap
integral directly; the test suite keeps the two routes in agreement.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .specfun import (
    GaussianRational,
    assoc_laguerre,
    double_factorial,
    hermite,
    spherical_harmonic,
)

__all__ = [
    "Ame",
    "FeTriple",
    "ExactCoeff",
    "coeff",
    "coeff_k0",
    "coeff_oracle",
    "d_coeff",
    "d_coeff_reduced",
    "degenerate_subspace",
    "bilinear_table",
    "norm_squared_exact",
    "overlap_s_part",
]


@dataclass(frozen=True)
class Ame:
    """Angular-momentum eigenstate label (k, l, m); energy N = 2k + l."""

    k: int
    l: int
    m: int

    def __post_init__(self):
        if self.k < 0 or self.l < 0:
            raise ValueError(f"k and l must be nonnegative, got k={self.k}, l={self.l}")
        if abs(self.m) > self.l:
            raise ValueError(f"|m| must not exceed l, got l={self.l}, m={self.m}")

    @property
    def energy_quantum(self):
        return 2 * self.k + self.l


@dataclass(frozen=True)
class FeTriple:
    """Factorized-eigenstate label (n1, n2, n3); energy N = n1 + n2 + n3."""

    n1: int
    n2: int
    n3: int

    def __post_init__(self):
        if min(self.n1, self.n2, self.n3) < 0:
            raise ValueError(f"occupation numbers must be nonnegative, got {self}")

    @property
    def energy_quantum(self):
        return self.n1 + self.n2 + self.n3

    def __iter__(self):
        return iter((self.n1, self.n2, self.n3))


@dataclass(frozen=True)
class ExactCoeff:
    """Expansion coefficient sign * sqrt(radicand) * s_sum, held exactly.

    `radicand` is a nonnegative rational, `s_sum` a Gaussian rational, so
    |value|^2 = radicand * |s_sum|^2 is rational.  Comparisons between two
    coefficients therefore reduce to comparing sign-carrying squares of the
    real and imaginary parts, which `signed_squares` exposes.
    """

    sign: int
    radicand: Fraction
    s_sum: GaussianRational

    @property
    def is_zero(self):
        return self.radicand == 0 or not self.s_sum

    @property
    def value(self):
        root = math.sqrt(self.radicand)
        return complex(self.sign * root * float(self.s_sum.re),
                       self.sign * root * float(self.s_sum.im))

    def abs2(self):
        """|value|^2 as an exact Fraction."""
        return self.radicand * self.s_sum.abs2()

    def signed_squares(self):
        """(sgn(re) re^2, sgn(im) im^2) as exact Fractions.

        A real number is determined by its sign and its square, so this pair
        is a canonical exact form independent of the internal factorization.
        """
        re2 = self.radicand * self.s_sum.re * self.s_sum.re
        im2 = self.radicand * self.s_sum.im * self.s_sum.im
        sre = self.sign * (1 if self.s_sum.re > 0 else -1 if self.s_sum.re < 0 else 0)
        sim = self.sign * (1 if self.s_sum.im > 0 else -1 if self.s_sum.im < 0 else 0)
        return sre * re2, sim * im2

    def exact_str(self):
        if self.is_zero:
            return "0"
        sign = "+1" if self.sign > 0 else "-1"
        p, q = self.radicand.numerator, self.radicand.denominator
        return f"{sign}*sqrt({p}/{q})*({self.s_sum.re} + {self.s_sum.im} i)"


_ZERO_COEFF = ExactCoeff(1, Fraction(0), GaussianRational(0))


def degenerate_subspace(N):
    """All factorized triples with n1 + n2 + n3 = N, in lexicographic order."""
    if N < 0:
        raise ValueError(f"N must be nonnegative, got {N}")
    return [
        FeTriple(n1, n2, N - n1 - n2)
        for n1 in range(N + 1)
        for n2 in range(N - n1 + 1)
    ]


def _binomial_alternating_sum(a, b, kk):
    """sum_rho (-1)^rho C(a, rho) C(b, kk - rho); zero for kk < 0.

    This is the coefficient of x^kk in (1-x)^a (1+x)^b and equals
    C(b, kk) * 2F1(-kk, -a; b - kk + 1; -1) wherever the latter is
    pole-free; the direct sum also covers the 0 * infinity limit cases.
    """
    if kk < 0:
        return 0
    return sum(
        (-1) ** rho * math.comb(a, rho) * math.comb(b, kk - rho)
        for rho in range(0, min(a, kk) + 1)
    )


def _s_sum(k, l, m, n1, n2, n3):
    """The residual Gaussian-rational sum of the coefficient formula."""
    kap = (l + m - n3) // 2
    total = GaussianRational(0)
    for j1 in range(n1 // 2 + 1):
        if 2 * j1 < n1 - l:
            continue
        for j2 in range(n2 // 2 + 1):
            j3 = k - j1 - j2
            if j3 < 0 or 2 * j3 > n3:
                continue
            if 2 * (j1 + j2) < n1 + n2 - l:
                continue
            inner = _binomial_alternating_sum(n1 - 2 * j1, n2 - 2 * j2, kap + j3)
            if inner == 0:
                continue
            den = (
                math.factorial(j1)
                * math.factorial(j2)
                * math.factorial(j3)
                * math.factorial(n1 - 2 * j1)
                * math.factorial(n2 - 2 * j2)
                * math.factorial(n3 - 2 * j3)
            )
            frac = Fraction(2 ** (n3 - 2 * j3) * inner, den)
            total = total + GaussianRational.i_power(n2 - 2 * j2) * frac
    return total


@lru_cache(maxsize=None)
def _coeff_cached(k, l, m, n1, n2, n3):
    if 2 * k + l != n1 + n2 + n3 or (l + m - n3) % 2 != 0:
        return _ZERO_COEFF
    s = _s_sum(k, l, m, n1, n2, n3)
    if not s:
        return _ZERO_COEFF
    N = n1 + n2 + n3
    radicand = (
        Fraction(2) ** (k - l - N)
        * (2 * l + 1)
        * math.factorial(n1)
        * math.factorial(n2)
        * math.factorial(n3)
        * math.factorial(k)
        * math.factorial(l - m)
        * math.factorial(l + m)
        / double_factorial(2 * k + 2 * l + 1)
    )
    return ExactCoeff((-1) ** k, radicand, s)


def coeff(state, triple):
    """Exact coefficient of `triple` in the expansion of `state`.

    Selection-rule violations return the exact zero coefficient rather than
    raising.  Results are memoized; the cache is only ever appended to, so
    concurrent readers are safe.
    """
    return _coeff_cached(state.k, state.l, state.m, triple.n1, triple.n2, triple.n3)


def coeff_k0(l, m, triple):
    """Closed form of the k = 0 coefficient (pure orbital excitation).

    Agrees exactly with coeff(Ame(0, l, m), triple) on its whole domain; the
    leading double factorial is (2l - 1)!!.
    """
    if abs(m) > l:
        raise ValueError(f"|m| must not exceed l, got l={l}, m={m}")
    n1, n2, n3 = triple.n1, triple.n2, triple.n3
    if n1 + n2 + n3 != l or (l + m - n3) % 2 != 0:
        return _ZERO_COEFF
    kap = (l + m - n3) // 2
    inner = _binomial_alternating_sum(n1, n2, kap)
    if inner == 0:
        return _ZERO_COEFF
    s = GaussianRational.i_power(n2) * Fraction(2**n3 * inner)
    radicand = Fraction(
        math.factorial(l + m) * math.factorial(l - m),
        2 ** (2 * l)
        * math.factorial(n1)
        * math.factorial(n2)
        * math.factorial(n3)
        * double_factorial(2 * l - 1),
    )
    return ExactCoeff(1, radicand, s)


@lru_cache(maxsize=8)
def _gh_grid(n):
    t, w = np.polynomial.hermite.hermgauss(n)
    t1, t2, t3 = (g.ravel() for g in np.meshgrid(t, t, t, indexing="ij"))
    w3 = (w[:, None, None] * w[None, :, None] * w[None, None, :]).ravel()
    return t1, t2, t3, w3


def coeff_oracle(state, triple, tol=1e-10):
    """Quadrature oracle: the defining 3-D overlap integral.

    Evaluates Int d^3r  Phi*_{n1 n2 n3} Psi_{klm} by tensor-product
    Gauss-Hermite quadrature; the integrand is a polynomial times
    exp(-r^2) in scaled coordinates, so the rule is exact up to roundoff.
    Guarded to shells N = 2k + l <= 8 to bound cost; `tol` documents the
    accuracy callers may assert against.
    """
    N = state.energy_quantum
    if N > 8:
        raise ValueError(f"oracle limited to 2k + l <= 8, got N={N}")
    k, l, m = state.k, state.l, state.m
    n1, n2, n3 = triple.n1, triple.n2, triple.n3
    nodes = (N + l) // 2 + 9
    t1, t2, t3, w3 = _gh_grid(nodes)

    # Factorized state with its Gaussian stripped (unit oscillator length).
    phi_poly = np.ones_like(t1)
    for n, t in ((n1, t1), (n2, t2), (n3, t3)):
        phi_poly = phi_poly * hermite(n, t) * math.sqrt(
            1.0 / (2.0**n * math.factorial(n) * math.sqrt(math.pi))
        )

    # Angular-momentum state, also Gaussian-stripped; (r Y_l^m) is a
    # polynomial in cartesian coordinates, handled through angles away
    # from the origin (the origin only matters for l = 0).
    r2 = t1 * t1 + t2 * t2 + t3 * t3
    r = np.sqrt(r2)
    pref = math.sqrt(
        2.0 ** (k + l + 2)
        * math.factorial(k)
        / (math.sqrt(math.pi) * float(double_factorial(2 * k + 2 * l + 1)))
    )
    lag = assoc_laguerre(k, l + Fraction(1, 2), r2)
    with np.errstate(invalid="ignore"):
        theta = np.arccos(np.clip(np.divide(t3, r, out=np.zeros_like(r), where=r > 0), -1, 1))
    phi_ang = np.arctan2(t2, t1)
    ylm = spherical_harmonic(l, m, theta, phi_ang)
    psi_poly = pref * r**l * lag * ylm
    if l > 0:
        psi_poly = np.where(r > 0, psi_poly, 0.0)

    return complex(np.sum(w3 * phi_poly * psi_poly))


@lru_cache(maxsize=None)
def _coeff_matrix(k, l):
    """Complex coefficient matrix C[m-index, triple-index] for one (k, l)."""
    triples = degenerate_subspace(2 * k + l)
    mat = np.array(
        [
            [coeff(Ame(k, l, m), t).value for t in triples]
            for m in range(-l, l + 1)
        ],
        dtype=complex,
    )
    return tuple(triples), mat


@lru_cache(maxsize=None)
def bilinear_table(k, l, m_averaged=True):
    """(triples, T) with T[i, j] = sum_m conj(C_{m, t_i}) C_{m, t_j}.

    With m_averaged=True the sum carries the 1/(2l+1) factor used by the
    m-averaged Wigner distributions; without it, the plain m-sum used by the
    coalescence probabilities.
    """
    triples, mat = _coeff_matrix(k, l)
    t = np.conj(mat).T @ mat
    if m_averaged:
        t = t / (2 * l + 1)
    t.setflags(write=False)
    return triples, t


def d_coeff(k, l, triple, triple_prime):
    """m-averaged bilinear coefficient pairing two triples of shell 2k + l.

    D = (1/(2l+1)) sum_m conj(C_{klm, triple'}) C_{klm, triple}; vanishes
    unless both triples carry energy 2k + l.
    """
    N = 2 * k + l
    if triple.energy_quantum != N or triple_prime.energy_quantum != N:
        return 0j
    triples, table = bilinear_table(k, l, True)
    i = triples.index(triple_prime)
    j = triples.index(triple)
    return complex(table[i, j])


def d_coeff_reduced(k, l, triple, triple_prime):
    """Exact m-averaged pairing with the radical factored off.

    Returns the Gaussian rational g with
    D(k, l; t, t') = g * sqrt(n1! n2! n3! n1'! n2'! n3'!); the square root
    cancels against the factorial prefactors of the 1-D Wigner closed forms,
    which is what makes fully rational 3-D derivations possible.
    """
    N = 2 * k + l
    if triple.energy_quantum != N or triple_prime.energy_quantum != N:
        return GaussianRational(0)
    base = (
        Fraction(2) ** (k - l - N)
        * (2 * l + 1)
        * math.factorial(k)
        / double_factorial(2 * k + 2 * l + 1)
    )
    total = GaussianRational(0)
    for m in range(-l, l + 1):
        # parity selection rule: both coefficients vanish unless l + m - n3 is even
        if (l + m - triple.n3) % 2 != 0 or (l + m - triple_prime.n3) % 2 != 0:
            continue
        s = _s_sum(k, l, m, triple.n1, triple.n2, triple.n3)
        sp = _s_sum(k, l, m, triple_prime.n1, triple_prime.n2, triple_prime.n3)
        if not s or not sp:
            continue
        r_m = base * math.factorial(l - m) * math.factorial(l + m)
        total = total + sp.conjugate() * s * r_m
    return total * Fraction(1, 2 * l + 1)


def norm_squared_exact(state):
    """sum_t |C_{state, t}|^2 as an exact Fraction (unitarity check)."""
    total = Fraction(0)
    for t in degenerate_subspace(state.energy_quantum):
        total += coeff(state, t).abs2()
    return total


def overlap_s_part(state_a, state_b):
    """Exact radical-free part of <state_a | state_b> within one shell.

    The full overlap is sign_a sign_b sqrt(R_a R_b) times this Gaussian
    rational, with R positive, so it vanishes exactly iff this does.
    """
    if state_a.energy_quantum != state_b.energy_quantum:
        raise ValueError("states must share one energy shell")
    total = GaussianRational(0)
    for t in degenerate_subspace(state_a.energy_quantum):
        ca = coeff(state_a, t)
        cb = coeff(state_b, t)
        if ca.is_zero or cb.is_zero:
            continue
        q = math.factorial(t.n1) * math.factorial(t.n2) * math.factorial(t.n3)
        total = total + ca.s_sum.conjugate() * cb.s_sum * Fraction(q)
    return total

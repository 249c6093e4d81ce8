"""Coalescence of two Gaussian wave packets into oscillator eigenstates.

Two isotropic wave packets with centroids (r1, p1), (r2, p2) and common width
delta capture into a bound state of the relative-coordinate oscillator with a
probability that depends only on the relative separation r = r1 - r2 and
relative momentum p = (p1 - p2)/2.  The m-summed probability into the (k, l)
level factorizes over the cartesian axes,

    P_kl = sum_m sum_{t, t'} conj(C_{klm, t'}) C_{klm, t}
           P_{t1' t1}(r1, p1) P_{t2' t2}(r2, p2) P_{t3' t3}(r3, p3),

with the 1-D quasi-probabilities of `ho1d`.  At matched scales (zeta = 1) the
six levels with 2k + l <= 3 reduce to closed forms in the two invariants

    v = nu^2 r^2 / 2 + p^2 / (2 hbar^2 nu^2),
    t = |r x p|^2 / hbar^2,

and the levels of one energy shell N sum to the Poisson weight e^{-v} v^N/N!,
with the t dependence cancelling inside each shell.  The final bound-state
momentum is distributed around P_i = p1 + p2 with the Gaussian overlap factor
J; in the semi-classical limit J becomes a delta function.

`p_kl_oracle` recomputes P_kl by Gauss-Hermite quadrature of the wave-packet
overlap integrals against the closed-form 1-D Wigner functions, a route
independent of the series-extraction quasi-probabilities.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .expansion import bilinear_table, degenerate_subspace
from .ho1d import quasi_prob_table, _wigner_poly

__all__ = [
    "WavePacket",
    "PhasePoint",
    "v_and_t",
    "j_overlap",
    "p_kl",
    "p_klm",
    "p_kl_batch",
    "p_kl_closed",
    "p_kl_oracle",
    "p_klm_differential",
    "poisson_sum",
    "shell_states",
]


@dataclass(frozen=True)
class WavePacket:
    """Isotropic Gaussian wave packet: centroids and spatial width."""

    centroid_r: tuple
    centroid_p: tuple
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "centroid_r", tuple(float(v) for v in self.centroid_r))
        object.__setattr__(self, "centroid_p", tuple(float(v) for v in self.centroid_p))
        if len(self.centroid_r) != 3 or len(self.centroid_p) != 3:
            raise ValueError("centroids must have three components")
        if self.delta <= 0:
            raise ValueError(f"width delta must be positive, got {self.delta}")


@dataclass(frozen=True)
class PhasePoint:
    """Relative phase-space coordinates r = r1 - r2, p = (p1 - p2)/2."""

    r_vec: tuple
    p_vec: tuple

    def __post_init__(self):
        object.__setattr__(self, "r_vec", tuple(float(v) for v in self.r_vec))
        object.__setattr__(self, "p_vec", tuple(float(v) for v in self.p_vec))
        if len(self.r_vec) != 3 or len(self.p_vec) != 3:
            raise ValueError("r_vec and p_vec must have three components")

    @classmethod
    def from_packets(cls, packet1, packet2):
        r = tuple(a - b for a, b in zip(packet1.centroid_r, packet2.centroid_r))
        p = tuple(0.5 * (a - b) for a, b in zip(packet1.centroid_p, packet2.centroid_p))
        return cls(r, p)

    @classmethod
    def from_invariants(cls, r, p, theta):
        """Canonical point with |r| = r, |p| = p and opening angle theta."""
        return cls((r, 0.0, 0.0), (p * math.cos(theta), p * math.sin(theta), 0.0))

    def invariants(self, params):
        return v_and_t(self.r_vec, self.p_vec, params)


def v_and_t(rel_r, rel_p, params):
    """Dimensionless invariants (v, t) of a relative phase-space point.

    v = nu^2 r^2/2 + p^2/(2 hbar^2 nu^2) is the squared phase-space distance
    at matched scales; t = |r x p|^2 / hbar^2 is the squared classical
    relative angular momentum.  The cross product avoids the cancellation of
    p^2 r^2 - (p.r)^2 for nearly parallel vectors, so t >= 0 always.
    """
    r = np.asarray(rel_r, dtype=float)
    p = np.asarray(rel_p, dtype=float)
    nu, hbar = params.nu, params.hbar
    v = 0.5 * (nu**2 * float(r @ r) + float(p @ p) / (hbar * nu) ** 2)
    cross = np.cross(r, p)
    t = float(cross @ cross) / hbar**2
    return v, t


def j_overlap(p_i, p_f, delta, hbar=1.0):
    """Gaussian overlap of the centroid momentum P_i with final momentum P_f.

    J = delta^3/(pi^(3/2) hbar^3) exp(-delta^2 (P_f - P_i)^2 / hbar^2),
    normalized to one over d^3 P_f.
    """
    dp = np.asarray(p_f, dtype=float) - np.asarray(p_i, dtype=float)
    return (
        delta**3
        / (math.pi**1.5 * hbar**3)
        * math.exp(-(delta**2) * float(dp @ dp) / hbar**2)
    )


def shell_states(N):
    """All (k, l) levels of energy shell N."""
    return [(k, N - 2 * k) for k in range(N // 2 + 1)]


def _axis_tables(rel, params, nmax):
    return [
        quasi_prob_table(rel.r_vec[i], rel.p_vec[i], params, nmax) for i in range(3)
    ]


def _assemble(table, triples, axis_tables):
    total = 0j
    t1, t2, t3 = axis_tables
    for i, tp in enumerate(triples):
        for j, t in enumerate(triples):
            d = table[i, j]
            if d == 0:
                continue
            total += d * t1[tp.n1, t.n1] * t2[tp.n2, t.n2] * t3[tp.n3, t.n3]
    return total


def p_klm(k, l, m, rel, params):
    """m-resolved coalescence probability into the state (k, l, m)."""
    from .expansion import Ame, coeff

    N = 2 * k + l
    triples = degenerate_subspace(N)
    cvec = np.array([coeff(Ame(k, l, m), t).value for t in triples])
    table = np.outer(np.conj(cvec), cvec)
    return _assemble(table, triples, _axis_tables(rel, params, N)).real


def p_kl(k, l, rel, params):
    """Coalescence probability into the (k, l) level, summed over m.

    Valid at any scale ratio zeta > 0; real up to roundoff and bounded by the
    shell unitarity sum.
    """
    return _p_kl_complex(k, l, rel, params).real


def _p_kl_complex(k, l, rel, params):
    N = 2 * k + l
    triples, table = bilinear_table(k, l, m_averaged=False)
    return _assemble(table, triples, _axis_tables(rel, params, N))


_CLOSED_P = {
    (0, 0): lambda v, t: 1.0,
    (0, 1): lambda v, t: v,
    (0, 2): lambda v, t: 0.5 * (2.0 / 3.0 * v * v + t / 3.0),
    (1, 0): lambda v, t: 0.5 * (v * v / 3.0 - t / 3.0),
    (0, 3): lambda v, t: (0.4 * v**3 + 0.6 * v * t) / 6.0,
    (1, 1): lambda v, t: (0.6 * v**3 - 0.6 * v * t) / 6.0,
}


def p_kl_closed(k, l, v, t):
    """Closed-form probabilities at zeta = 1 for the shells N = 2k + l <= 3.

    P_00 = e^-v,            P_01 = e^-v v,
    P_02 = e^-v (2v^2 + t)/6,     P_10 = e^-v (v^2 - t)/6,
    P_03 = e^-v (2v^3 + 3vt)/30,  P_11 = e^-v (3v^3 - 3vt)/30.
    Requires 0 <= t <= v^2 (Cauchy-Schwarz for the dimensionless invariants).
    """
    if (k, l) not in _CLOSED_P:
        raise ValueError(f"no closed form for (k, l) = ({k}, {l}); shells N <= 3 only")
    if v < 0 or t < -1e-12:
        raise ValueError(f"invariants must be nonnegative, got v={v}, t={t}")
    if t > v * v * (1 + 1e-9) + 1e-12:
        raise ValueError(f"t <= v^2 violated: v={v}, t={t}")
    return math.exp(-v) * _CLOSED_P[(k, l)](v, t)


def poisson_sum(N, rel, params):
    """Shell-summed probability sum_{2k+l=N} P_kl at zeta = 1.

    Equals the Poisson weight e^{-v} v^N / N!, independent of the angular
    invariant t; the test suite asserts the identity.
    """
    if abs(params.zeta - 1.0) > 1e-12:
        raise ValueError(f"shell Poisson sum requires zeta = 1, got {params.zeta}")
    return sum(p_kl(k, l, rel, params) for k, l in shell_states(N))


def p_kl_batch(levels, rel_r, rel_p, params):
    """Vectorized P_kl for many relative points at once.

    `levels` is an iterable of (k, l); rel_r and rel_p have shape (n, 3).
    Returns {(k, l): ndarray of n probabilities}.  Same factorized assembly
    as p_kl, with the per-axis quasi-probability tables evaluated on arrays.
    """
    rel_r = np.asarray(rel_r, dtype=float)
    rel_p = np.asarray(rel_p, dtype=float)
    levels = list(levels)
    nmax = max(2 * k + l for k, l in levels)
    tabs = [
        quasi_prob_table(rel_r[:, i], rel_p[:, i], params, nmax) for i in range(3)
    ]
    out = {}
    for k, l in levels:
        triples, table = bilinear_table(k, l, m_averaged=False)
        total = np.zeros(rel_r.shape[0], dtype=complex)
        for i, tp in enumerate(triples):
            for j, t in enumerate(triples):
                d = table[i, j]
                if d == 0:
                    continue
                total += d * tabs[0][tp.n1, t.n1] * tabs[1][tp.n2, t.n2] * tabs[2][tp.n3, t.n3]
        out[(k, l)] = total.real
    return out


def p_klm_differential(k, l, m, p_f, packets, params):
    """Differential probability density in the final bound-state momentum.

    d P / d^3 P_f for capture into (k, l, m) with final momentum near p_f;
    the total over p_f and m recovers p_kl.  `packets` is the pair of
    incoming wave packets.
    """
    packet1, packet2 = packets
    rel = PhasePoint.from_packets(packet1, packet2)
    p_i = tuple(a + b for a, b in zip(packet1.centroid_p, packet2.centroid_p))
    return j_overlap(p_i, p_f, params.delta, params.hbar) * p_klm(k, l, m, rel, params)


# ---------------------------------------------------------------------------
# Independent quadrature oracle.

@lru_cache(maxsize=8)
def _gh_nodes(n):
    return np.polynomial.hermite.hermgauss(n)


def _quasi_prob_quad(n_prime, n, r_i, p_i, params, nodes=None):
    """1-D quasi-probability by quadrature of the Wigner-overlap integral.

    P_{n' n} = 2 e^{-r^2/(4 d^2) - 4 d^2 p^2/h^2} Int dx dq W_{n' n}(x, q)
               e^{-x^2/(4 d^2) + x r/(2 d^2)} e^{-4 d^2 q^2/h^2 + 8 d^2 q p/h^2};
    the Gaussians are completed to squares and the polynomial remainder is
    integrated exactly by Gauss-Hermite.  Independent of the series route.

    Carries the phase convention of the transform-defined W_{n' n}, which is
    the conjugate of the quasi_prob convention for n' != n (see the ho1d
    module notes); diagonal entries and bilinear assemblies agree directly.
    """
    nu, hbar, d = params.nu, params.hbar, params.delta
    if nodes is None:
        nodes = n_prime + n + 8
    t, w = _gh_nodes(nodes)
    ax = nu**2 + 1.0 / (4 * d * d)
    bx = r_i / (2 * d * d)
    ak = 1.0 / (hbar * nu) ** 2 + 4 * d * d / hbar**2
    bk = 8 * d * d * p_i / hbar**2
    xs = t / math.sqrt(ax) + bx / (2 * ax)
    ks = t / math.sqrt(ak) + bk / (2 * ak)
    xi = nu * xs
    eta = ks / (hbar * nu)
    lo, hi = min(n_prime, n), max(n_prime, n)
    base = np.array([[_wigner_poly(lo, hi, a, b) for b in eta] for a in xi])
    if n_prime > n:
        base = np.conj(base)
    total = np.sum(np.outer(w, w) * base) / (math.pi * hbar)
    total *= (
        2.0
        * math.exp(
            -r_i**2 / (4 * d * d)
            - 4 * d * d * p_i**2 / hbar**2
            + bx * bx / (4 * ax)
            + bk * bk / (4 * ak)
        )
        / math.sqrt(ax * ak)
    )
    return complex(total)


def p_kl_oracle(k, l, rel, params):
    """P_kl by per-axis quadrature of the six-fold overlap integral.

    The factorized expansion splits the 6-D integral into three 2-D
    integrals per term; each 2-D factor is evaluated with `_quasi_prob_quad`
    (closed-form Wigner functions under exact Gauss-Hermite quadrature)
    instead of the generating-function series used by `p_kl`.
    """
    N = 2 * k + l
    triples, table = bilinear_table(k, l, m_averaged=False)
    axis = []
    for i in range(3):
        mat = np.empty((N + 1, N + 1), dtype=complex)
        for a in range(N + 1):
            for b in range(N + 1):
                mat[a, b] = _quasi_prob_quad(a, b, rel.r_vec[i], rel.p_vec[i], params)
        axis.append(mat)
    return _assemble(table, triples, axis).real

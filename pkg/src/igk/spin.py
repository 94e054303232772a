"""The spin model: binomial families, the two-sphere, and su(2) spectra.

The Kählerification of the binomial family B(n, .) is the round two-sphere:
a tangent-bundle point (theta, theta_dot) maps to

    s = ( tanh(theta/2),
          cos(theta_dot/2) / cosh(theta/2),
          sin(theta_dot/2) / cosh(theta/2) ),

and the sphere pushes forward to count densities pi_sphere(n, s)(k) =
binom(n, k) ((1+x)/2)^k ((1-x)/2)^(n-k), which match B(n, .) itself along
the lift.  Affine sphere functions f = u0 + (u, v, w).s decompose as
f = alpha + beta * (n/2 + n/2 axis . s), have the equally spaced spectrum
lambda_k = alpha + beta k with binomial transition probabilities in
c = axis . s, and are represented by Hermitian tridiagonal (n+1)x(n+1)
matrices Q(f) acting on the spin states

    Psi(a, b)_k = sqrt(binom(n, k)) cos(a/2)^k sin(a/2)^(n-k) e^{i b k}

(colatitude a from the +x axis, azimuth b in the (y, z) plane).  The sphere
carries n times the area form as symplectic structure, oriented so that the
representation is a Lie-algebra morphism: {f, g} = -(1/n) (f_vec x g_vec).s
and Q({f, g}) = -(i/2) [Q(f), Q(g)].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb
from scipy.stats import binom as binom_dist

from .errors import DomainError
from .projective import ProjectivePoint, xi_value

__all__ = [
    "SphereFunction",
    "SphereDecomposition",
    "sphere_from_tangent",
    "pi_sphere",
    "spin_law",
    "decompose_sphere_function",
    "spin_spectrum",
    "spin_probabilities",
    "psi_embedding",
    "sphere_point_angles",
    "q_matrix",
    "sphere_bracket",
    "sphere_bracket_fd",
    "commutator_residual",
    "expectation_identity_residual",
    "su2_basis",
    "su2_closure_residual",
    "casimir_matrix",
    "hat_scaling_residual",
    "stern_gerlach_transition",
]


@dataclass(frozen=True)
class SphereFunction:
    """An affine function u0 + u x + v y + w z on the unit sphere."""

    u0: float
    vec: tuple

    def __post_init__(self):
        vec = tuple(float(c) for c in self.vec)
        if len(vec) != 3:
            raise DomainError("sphere functions need a 3-vector of coefficients")
        object.__setattr__(self, "u0", float(self.u0))
        object.__setattr__(self, "vec", vec)

    def value(self, s):
        s = np.asarray(s, dtype=float)
        return self.u0 + np.asarray(self.vec) @ s


@dataclass(frozen=True)
class SphereDecomposition:
    """f = alpha + beta * counting observable along an axis (beta >= 0)."""

    alpha: float
    beta: float
    axis: tuple


def _check_sphere(s, tol=1e-8):
    s = np.asarray(s, dtype=float)
    if s.shape != (3,):
        raise DomainError("a sphere point is a 3-vector")
    if abs(s @ s - 1.0) > tol:
        raise DomainError(f"point is off the unit sphere (|s|^2 = {s @ s:.12f})")
    return s


def sphere_from_tangent(theta, theta_dot):
    """Map a tangent-bundle point of B(n, .) onto the unit sphere.

    Independent of n; 4-pi-periodic in the fiber variable.
    """
    th = float(theta)
    td = float(theta_dot)
    ch = math.cosh(0.5 * th)
    return np.asarray(
        [math.tanh(0.5 * th), math.cos(0.5 * td) / ch, math.sin(0.5 * td) / ch]
    )


def pi_sphere(n, s):
    """Push a sphere point to count probabilities, exactly at the poles.

    pi(s)(k) = binom(n, k) ((1+x)/2)^k ((1-x)/2)^(n-k); evaluation goes
    through a log-space binomial pmf, stable for large n.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be a positive integer")
    s = _check_sphere(s)
    prob = min(max((1.0 + s[0]) / 2.0, 0.0), 1.0)
    k = np.arange(n + 1)
    return binom_dist.pmf(k, n, prob)


def spin_law(n, colatitude):
    """The spin distribution binom(n,k) cos^{2k}(t/2) sin^{2(n-k)}(t/2).

    ``colatitude`` is the angle t from the +x axis of the measured direction;
    evaluated as explicit products so that the poles come out exact.
    """
    n = int(n)
    k = np.arange(n + 1)
    c = math.cos(0.5 * float(colatitude))
    sn = math.sin(0.5 * float(colatitude))
    return comb(n, k) * c ** (2 * k) * sn ** (2 * (n - k))


def decompose_sphere_function(n, f):
    """Split an affine sphere function into offset, gap and axis.

    Returns alpha = u0 - |(u,v,w)|, beta = 2 |(u,v,w)| / n and the unit
    axis (u,v,w)/|(u,v,w)| so that f = alpha + beta (n/2)(1 + axis . s);
    a constant function gets beta = 0 and the conventional axis (0, 0, 1).
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be a positive integer")
    vec = np.asarray(f.vec, dtype=float)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        return SphereDecomposition(alpha=f.u0, beta=0.0, axis=(0.0, 0.0, 1.0))
    return SphereDecomposition(
        alpha=f.u0 - norm, beta=2.0 * norm / n, axis=tuple(vec / norm)
    )


def spin_spectrum(n, f):
    """Equally spaced eigenvalues lambda_k = alpha + beta k, ascending."""
    dec = decompose_sphere_function(n, f)
    return dec.alpha + dec.beta * np.arange(int(n) + 1)


def spin_probabilities(n, f, s):
    """Transition probabilities of the spectrum of f at a sphere point.

    P(lambda_k) is binomial in c = axis . s:
    binom(n,k) ((1+c)/2)^k ((1-c)/2)^(n-k).
    """
    n = int(n)
    s = _check_sphere(s)
    dec = decompose_sphere_function(n, f)
    c = min(max(float(np.asarray(dec.axis) @ s), -1.0), 1.0)
    k = np.arange(n + 1)
    return binom_dist.pmf(k, n, (1.0 + c) / 2.0)


def sphere_point_angles(s):
    """Colatitude from +x and azimuth in the (y, z) plane of a sphere point."""
    s = _check_sphere(s)
    colat = math.acos(min(max(s[0], -1.0), 1.0))
    azim = math.atan2(s[2], s[1])
    return colat, azim


def psi_embedding(n, colatitude, azimuth):
    """The spin state Psi_k = sqrt(binom(n,k)) cos(a/2)^k sin(a/2)^(n-k) e^{ibk}.

    |Psi_k|^2 reproduces pi_sphere at the corresponding sphere point; the
    poles (a = 0 or pi) land on the coordinate rays exactly.
    """
    n = int(n)
    a = float(colatitude)
    b = float(azimuth)
    k = np.arange(n + 1)
    amp = np.sqrt(comb(n, k)) * math.cos(0.5 * a) ** k * math.sin(0.5 * a) ** (n - k)
    return ProjectivePoint(amp * np.exp(1j * b * k))


def q_matrix(n, f):
    """Hermitian tridiagonal representation of an affine sphere function.

    Diagonal Q_kk = u0 + (2 u / n)(k - n/2); off-diagonal
    Q_{l, l+1} = (1/n) sqrt((n - l)(l + 1)) (v - i w).
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be a positive integer")
    u0 = float(f.u0)
    u, v, w = (float(c) for c in f.vec)
    k = np.arange(n + 1)
    Q = np.zeros((n + 1, n + 1), dtype=complex)
    Q[k, k] = u0 + (2.0 * u / n) * (k - n / 2.0)
    l = np.arange(n)
    off = np.sqrt((n - l) * (l + 1.0)) * (v - 1j * w) / n
    Q[l, l + 1] = off
    Q[l + 1, l] = np.conj(off)
    return Q


def sphere_bracket(n, f, g):
    """Closed-form bracket {f, g} = -(1/n) (f_vec x g_vec) . s on the sphere.

    The bracket of two affine functions is again affine (with no constant
    term); the orientation matches the representation: see
    ``commutator_residual``.
    """
    n = int(n)
    fv = np.asarray(f.vec, dtype=float)
    gv = np.asarray(g.vec, dtype=float)
    return SphereFunction(0.0, tuple(-np.cross(fv, gv) / n))


def sphere_bracket_fd(n, f, g, s, step=1e-6):
    """The bracket by central differences in the colatitude/azimuth chart.

    The symplectic form is -n sin(a) da ^ db (n times the area form, in the
    orientation fixed by the representation), so
    {f, g} = (f_a g_b - f_b g_a) / (-n sin(a)).  Not defined at the poles.
    """
    n = int(n)
    colat, azim = sphere_point_angles(s)
    if min(abs(colat), abs(math.pi - colat)) < 1e-6:
        raise DomainError("the angle chart degenerates at the poles")

    def value(fun, a, b):
        point = np.asarray(
            [math.cos(a), math.sin(a) * math.cos(b), math.sin(a) * math.sin(b)]
        )
        return fun.value(point)

    fa = (value(f, colat + step, azim) - value(f, colat - step, azim)) / (2 * step)
    fb = (value(f, colat, azim + step) - value(f, colat, azim - step)) / (2 * step)
    ga = (value(g, colat + step, azim) - value(g, colat - step, azim)) / (2 * step)
    gb = (value(g, colat, azim + step) - value(g, colat, azim - step)) / (2 * step)
    return (fa * gb - fb * ga) / (-n * math.sin(colat))


def commutator_residual(n, f, g, perturb=0.0):
    """Defect of Q({f, g}) = -(i/2) [Q(f], Q(g)] in the sup norm.

    ``perturb`` adds a deliberate offset to one matrix entry, for harness
    tests that need a failing check.
    """
    n = int(n)
    Qf = q_matrix(n, f)
    Qg = q_matrix(n, g)
    Qfg = q_matrix(n, sphere_bracket(n, f, g))
    if perturb:
        Qf = Qf.copy()
        Qf[0, 0] += perturb
    comm = Qf @ Qg - Qg @ Qf
    return float(np.max(np.abs(Qfg + 0.5j * comm)))


def expectation_identity_residual(n, f, s):
    """|f(s) - <Psi, Q(f) Psi>| at the spin state over a sphere point."""
    s = _check_sphere(s)
    colat, azim = sphere_point_angles(s)
    psi = psi_embedding(n, colat, azim).homogeneous
    Q = q_matrix(int(n), f)
    return abs(float(f.value(s)) - float(np.vdot(psi, Q @ psi).real))


def su2_basis(n):
    """The representation matrices L_a = (i/2) Q(x_a) of the coordinate functions."""
    xf = SphereFunction(0.0, (1.0, 0.0, 0.0))
    yf = SphereFunction(0.0, (0.0, 1.0, 0.0))
    zf = SphereFunction(0.0, (0.0, 0.0, 1.0))
    return tuple(0.5j * q_matrix(int(n), f) for f in (xf, yf, zf))


def su2_closure_residual(n):
    """Defect of [L_a, L_b] = (1/n) L_c over the cyclic coordinate triples."""
    L = su2_basis(n)
    resid = 0.0
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        resid = max(
            resid,
            float(np.max(np.abs(L[a] @ L[b] - L[b] @ L[a] - L[c] / int(n)))),
        )
    return resid


def casimir_matrix(n):
    """The Casimir sum L_x^2 + L_y^2 + L_z^2 (a scalar matrix)."""
    L = su2_basis(n)
    return L[0] @ L[0] + L[1] @ L[1] + L[2] @ L[2]


def hat_scaling_residual(n, f, g, point, step=1e-5):
    """Defect of the 1/4 scaling between the sphere and projective brackets.

    The lift of an affine sphere function to projective space is
    f_hat = xi_{-2i Q(f)}; the identity {f_hat, g_hat} = 4 ({f, g})-hat is
    checked with the Fubini-Study bracket evaluated by finite differences
    at the given projective point.
    """
    from .projective import fd_poisson_bracket

    n = int(n)
    A = -2.0j * q_matrix(n, f)
    B = -2.0j * q_matrix(n, g)
    Qfg = q_matrix(n, sphere_bracket(n, f, g))
    lhs = fd_poisson_bracket(
        lambda zz: xi_value(A, zz, check=False),
        lambda zz: xi_value(B, zz, check=False),
        point,
        step,
    )
    rhs = 4.0 * xi_value(-2.0j * Qfg, point)
    return abs(lhs - rhs)


def stern_gerlach_transition(n, device_one, m_one, device_two):
    """Sequential measurement: eigenstate m_one of one device into another.

    Devices are affine sphere functions; eigenstates are ordered by
    ascending eigenvalue (index 0..n).  Returns the probability vector over
    the outcomes of the second device,
    P(m_two) = |<v_{m_two}(Q(f2)), v_{m_one}(Q(f1))>|^2.
    """
    n = int(n)
    m_one = int(m_one)
    if not 0 <= m_one <= n:
        raise DomainError(f"eigenstate index must lie in 0..{n}")
    _, vecs_one = np.linalg.eigh(q_matrix(n, device_one))
    _, vecs_two = np.linalg.eigh(q_matrix(n, device_two))
    state = vecs_one[:, m_one]
    amps = vecs_two.conj().T @ state
    return np.abs(amps) ** 2

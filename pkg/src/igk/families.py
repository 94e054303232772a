"""Exponential families on finite sets and on the real line.

Densities have the form

    p(x; theta) = exp( C(x) + <theta, F(x)> - psi(theta) )

with carrier ``C``, statistics ``F = (F_1, ..., F_n)`` and log-partition
``psi``, taken against counting measure (finite support) or Lebesgue measure
(real line).  The natural chart is ``theta``; the expectation chart is
``eta = grad psi(theta)``, inverted by a damped Newton iteration whose
Jacobian is the Fisher matrix.

Moments on the real line are computed by Gauss-Hermite quadrature in a
standardized variable ``x = center + sqrt(2) * scale * t``.  Builtin families
supply the Gaussian envelope in closed form; user families get three
fixed-point refinements of (mean, std).  Every quadrature passes an
order-doubling convergence gate before its values are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.special import expit, gammaln

from .errors import DomainError, NumericalError
from .numerics import fd_gradient, fd_hessian, gauss_hermite

__all__ = [
    "FiniteSpace",
    "RealLine",
    "Box",
    "NaturalPoint",
    "ExpectationPoint",
    "ExponentialFamilySpec",
    "family",
    "categorical_family",
    "binomial_family",
    "normal_family",
    "normal_fixed_sigma_family",
    "BUILTIN_FAMILIES",
]

_QUAD_GATE = 1e-9
_NEWTON_TOL = 1e-12
_NEWTON_STALL_TOL = 1e-9  # families whose mean map is finite-differenced
_NEWTON_MAX_ITER = 100


@dataclass(frozen=True)
class FiniteSpace:
    """A finite measured space: distinct real points with counting measure."""

    points: tuple
    labels: tuple = ()

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        if len(pts) < 2:
            raise DomainError("a finite measured space needs at least two points")
        if len(set(pts)) != len(pts):
            raise DomainError("points of a finite measured space must be distinct")
        object.__setattr__(self, "points", pts)
        labels = tuple(self.labels)
        if not labels:
            labels = tuple(f"x{i + 1}" for i in range(len(pts)))
        elif len(labels) != len(pts):
            raise DomainError("labels must match points one to one")
        object.__setattr__(self, "labels", labels)

    @property
    def size(self):
        return len(self.points)

    def values(self):
        return np.asarray(self.points, dtype=float)

    def index_of(self, x):
        """Index of the point with value ``x`` (exact up to rounding)."""
        vals = self.values()
        hits = np.nonzero(np.isclose(vals, float(x), rtol=0.0, atol=1e-12))[0]
        if hits.size != 1:
            raise DomainError(f"{x!r} is not a point of the space")
        return int(hits[0])


@dataclass(frozen=True)
class RealLine:
    """The real line with Lebesgue measure and a Gauss-Hermite order."""

    quad_order: int = 64

    def __post_init__(self):
        if int(self.quad_order) < 1:
            raise DomainError("quadrature order must be at least 1")
        object.__setattr__(self, "quad_order", int(self.quad_order))


MeasuredSpace = Union[FiniteSpace, RealLine]


@dataclass(frozen=True)
class Box:
    """An open coordinate box, bounds possibly infinite."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(a) for a in self.lo)
        hi = tuple(float(b) for b in self.hi)
        if len(lo) != len(hi):
            raise DomainError("box bounds must have equal length")
        if any(a >= b for a, b in zip(lo, hi)):
            raise DomainError("box must have nonempty interior")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @staticmethod
    def unbounded(n):
        return Box((-math.inf,) * n, (math.inf,) * n)

    @property
    def dim(self):
        return len(self.lo)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x > self.lo) and np.all(x < self.hi))


@dataclass(frozen=True)
class NaturalPoint:
    """A point given in the natural chart."""

    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))


@dataclass(frozen=True)
class ExpectationPoint:
    """A point given in the expectation chart."""

    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))


@dataclass(frozen=True)
class ExponentialFamilySpec:
    """An exponential family: carrier, statistics, log-partition, domain.

    ``carrier`` and the entries of ``statistics`` are vectorized callables of
    the sample point; ``log_partition`` maps a natural-parameter vector to a
    float.  Optional closed forms (``mean_map``, ``fisher_closed``,
    ``mean_inverse``, ``envelope``) are used when present; otherwise finite
    differences (and, on the real line, adaptive standardization) take over.
    ``sample_box`` is a bounded region of natural parameters used by tests
    and verification sweeps.
    """

    name: str
    space: MeasuredSpace
    carrier: Callable
    statistics: tuple
    log_partition: Callable
    domain: Box
    mean_map: Optional[Callable] = None
    fisher_closed: Optional[Callable] = None
    mean_inverse: Optional[Callable] = None
    envelope: Optional[Callable] = None
    sample_box: Optional[Box] = None

    def __post_init__(self):
        if len(self.statistics) < 1:
            raise DomainError("an exponential family needs at least one statistic")
        if self.domain.dim != self.dim:
            raise DomainError("domain dimension must match the number of statistics")

    # ----- basic structure -------------------------------------------------

    @property
    def dim(self):
        return len(self.statistics)

    @property
    def is_finite(self):
        return isinstance(self.space, FiniteSpace)

    def _check_theta(self, theta):
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        if th.shape != (self.dim,):
            raise DomainError(
                f"{self.name}: expected {self.dim} natural parameters, got shape {th.shape}"
            )
        if not np.all(np.isfinite(th)):
            raise DomainError(f"{self.name}: natural parameters must be finite")
        if not self.domain.contains(th):
            raise DomainError(f"{self.name}: {th.tolist()} outside the natural domain")
        return th

    def natural_coords(self, point):
        """Natural coordinates of a point given in either chart."""
        if isinstance(point, NaturalPoint):
            return self._check_theta(point.coords)
        if isinstance(point, ExpectationPoint):
            return self.expectation_to_natural(point.coords)
        return self._check_theta(point)

    def statistic_matrix(self, x):
        """Stack of statistic values, shape (dim, len(x))."""
        x = np.asarray(x, dtype=float)
        rows = []
        for f in self.statistics:
            v = np.asarray(f(x), dtype=float)
            rows.append(np.broadcast_to(v, x.shape).astype(float))
        return np.stack(rows)

    # ----- densities -------------------------------------------------------

    def log_density(self, theta, x):
        th = self._check_theta(theta)
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        carrier = np.broadcast_to(np.asarray(self.carrier(xs), dtype=float), xs.shape)
        F = self.statistic_matrix(xs)
        out = carrier + th @ F - float(self.log_partition(th))
        return out if np.ndim(x) else float(out[0])

    def density(self, theta, x):
        return np.exp(self.log_density(theta, x))

    def probabilities(self, theta):
        """Density table over the support of a finite space."""
        if not self.is_finite:
            raise DomainError(f"{self.name}: probabilities need a finite space")
        return self.density(theta, self.space.values())

    # ----- quadrature / expectation machinery ------------------------------

    def _envelope(self, theta):
        """Gaussian envelope (center, scale) for real-line quadrature."""
        if self.envelope is not None:
            c, s = self.envelope(theta)
            return float(c), float(s)
        return self._adaptive_envelope(theta)

    def _raw_weights(self, theta, center, scale, order):
        t, w = gauss_hermite(order)
        x = center + math.sqrt(2.0) * scale * t
        logw = math.log(math.sqrt(2.0) * scale) + np.log(w) + t * t \
            + self.log_density(theta, x)
        return x, logw

    def _adaptive_envelope(self, theta, order=None):
        order = order or self.space.quad_order
        center, scale = 0.0, 1.0
        for _ in range(3):
            x, logw = self._raw_weights(theta, center, scale, order)
            shift = np.max(logw)
            if not np.isfinite(shift):
                raise NumericalError(
                    f"{self.name}: density not evaluable on the quadrature grid"
                )
            w = np.exp(logw - shift)
            z = w.sum()
            m = (w @ x) / z
            v = (w @ (x - m) ** 2) / z
            if not (np.isfinite(m) and v > 0.0):
                raise NumericalError(f"{self.name}: quadrature standardization failed")
            center, scale = float(m), float(math.sqrt(v))
        return center, scale

    def weighted_support(self, theta):
        """Support points and density-absorbed expectation weights.

        For finite spaces this is (points, probabilities).  On the real line
        the weights fold the density into the Gauss-Hermite rule so that
        ``E[g] = weights @ g(points)``; the rule must pass an order-doubling
        convergence gate (relative change of the normalization and of the
        statistic means below 1e-9), else ``NumericalError`` is raised.
        """
        th = self._check_theta(theta)
        if self.is_finite:
            x = self.space.values()
            return x, self.density(th, x)
        center, scale = self._envelope(th)
        order = self.space.quad_order
        x1, lw1 = self._raw_weights(th, center, scale, order)
        x2, lw2 = self._raw_weights(th, center, scale, 2 * order)
        w1 = np.exp(lw1)
        w2 = np.exp(lw2)
        if not (np.all(np.isfinite(w1)) and np.all(np.isfinite(w2))):
            raise NumericalError(f"{self.name}: quadrature weights overflowed")
        z1, z2 = w1.sum(), w2.sum()
        eta1 = self.statistic_matrix(x1) @ w1
        eta2 = self.statistic_matrix(x2) @ w2
        num = max(abs(z1 - z2), float(np.max(np.abs(eta1 - eta2))))
        den = max(1.0, abs(z2), float(np.max(np.abs(eta2))))
        if num / den > _QUAD_GATE:
            raise NumericalError(
                f"{self.name}: quadrature did not converge under order doubling",
                residual=num / den,
            )
        return x2, w2

    def moment_tensors(self, theta):
        """Statistic mean, covariance, and third central moment tensor.

        Returns ``(eta, h, T)`` with ``h[i, j] = E[(F_i - eta_i)(F_j - eta_j)]``
        and ``T[i, j, k]`` the corresponding third central moment; for an
        exponential family these are the first three derivative tensors of the
        log-partition.
        """
        x, w = self.weighted_support(theta)
        F = self.statistic_matrix(x)
        eta = F @ w
        Fc = F - eta[:, None]
        h = (Fc * w) @ Fc.T
        T = np.einsum("im,jm,km,m->ijk", Fc, Fc, Fc, w)
        return eta, h, T

    # ----- charts ----------------------------------------------------------

    def natural_to_expectation(self, theta):
        """Mean map eta(theta); closed form when available, else central FD."""
        th = self._check_theta(theta)
        if self.mean_map is not None:
            return np.asarray(self.mean_map(th), dtype=float)
        return fd_gradient(lambda t: float(self.log_partition(t)), th, scale=1e-5)

    def log_partition_hessian(self, theta):
        """Hessian of psi; closed form when available, else second differences."""
        th = self._check_theta(theta)
        if self.fisher_closed is not None:
            return np.asarray(self.fisher_closed(th), dtype=float)
        return fd_hessian(lambda t: float(self.log_partition(t)), th, scale=1e-4)

    def expectation_to_natural(self, eta, initial=None):
        """Invert the mean map by damped Newton iteration.

        The Jacobian is the Fisher matrix; a step is halved until the residual
        decreases (or the step leaves the natural domain).  Raises
        ``NumericalError`` with the final residual when the target is
        unreachable, which is also how leaving the image of the mean map
        shows up.
        """
        target = np.atleast_1d(np.asarray(eta, dtype=float))
        if target.shape != (self.dim,):
            raise DomainError(
                f"{self.name}: expected {self.dim} expectation parameters"
            )
        if initial is not None:
            th = self._check_theta(initial)
        elif self.mean_inverse is not None:
            th = self._check_theta(self.mean_inverse(target))
        else:
            th = np.zeros(self.dim)
            if not self.domain.contains(th):
                th = np.asarray(
                    [(max(a, -1.0) + min(b, 1.0)) / 2.0
                     for a, b in zip(self.domain.lo, self.domain.hi)]
                )
        r = self.natural_to_expectation(th) - target
        rnorm = float(np.max(np.abs(r)))
        for _ in range(_NEWTON_MAX_ITER):
            if rnorm < _NEWTON_TOL:
                return th
            J = self.log_partition_hessian(th)
            try:
                step = np.linalg.solve(J, r)
            except np.linalg.LinAlgError as exc:
                raise NumericalError(
                    f"{self.name}: singular Fisher matrix during Newton",
                    residual=rnorm,
                ) from exc
            lam = 1.0
            accepted = False
            while lam >= 1e-12:
                cand = th - lam * step
                if self.domain.contains(cand):
                    rc = self.natural_to_expectation(cand) - target
                    rcnorm = float(np.max(np.abs(rc)))
                    if rcnorm < rnorm:
                        th, r, rnorm = cand, rc, rcnorm
                        accepted = True
                        break
                lam *= 0.5
            if not accepted:
                # A finite-differenced mean map bottoms out at its noise
                # floor; accept the stall when it is already deep enough.
                if rnorm <= _NEWTON_STALL_TOL:
                    return th
                raise NumericalError(
                    f"{self.name}: damped Newton stalled; "
                    "the target may lie outside the image of the mean map",
                    residual=rnorm,
                )
        if rnorm < _NEWTON_TOL:
            return th
        raise NumericalError(
            f"{self.name}: Newton did not converge in {_NEWTON_MAX_ITER} iterations",
            residual=rnorm,
        )

    # ----- summary statistics ----------------------------------------------

    def mean_and_variance(self, theta, observable):
        """Mean and variance of an observable under p(.; theta).

        ``observable`` is a vectorized callable, or a value table over the
        points of a finite space.
        """
        x, w = self.weighted_support(theta)
        if callable(observable):
            vals = np.broadcast_to(
                np.asarray(observable(x), dtype=float), x.shape
            ).astype(float)
        else:
            vals = np.asarray(observable, dtype=float)
            if not self.is_finite or vals.shape != x.shape:
                raise DomainError(
                    f"{self.name}: a value table needs a finite space of matching size"
                )
        m = float(vals @ w)
        v = float(((vals - m) ** 2) @ w)
        return m, v

    def statistic_independence_margin(self, theta=None):
        """Smallest eigenvalue of the Gram matrix of {1, F_1..F_n}.

        A positive margin certifies affine independence of the statistics
        (no degenerate directions in the natural parameter).
        """
        if theta is None:
            theta = np.zeros(self.dim)
            if not self.domain.contains(theta):
                theta = np.asarray(
                    [(max(a, -1.0) + min(b, 1.0)) / 2.0
                     for a, b in zip(self.domain.lo, self.domain.hi)]
                )
        x, w = self.weighted_support(theta)
        rows = np.vstack([np.ones_like(x), self.statistic_matrix(x)])
        gram = (rows * w) @ rows.T
        return float(np.linalg.eigvalsh(gram)[0])


# ----- builtin families -----------------------------------------------------


def _indicator(value):
    def f(x, v=float(value)):
        return np.where(np.isclose(x, v, rtol=0.0, atol=1e-12), 1.0, 0.0)

    return f


def categorical_family(n):
    """The full categorical family on n points (dimension n - 1).

    Points are 1..n with labels x1..xn; statistic i is the indicator of point
    i, the last point serving as reference.  psi(theta) = ln(1 + sum e^theta).
    """
    n = int(n)
    if n < 2:
        raise DomainError("categorical:n needs n >= 2")
    space = FiniteSpace(tuple(range(1, n + 1)))
    stats = tuple(_indicator(i) for i in range(1, n))

    def psi(theta):
        m = max(0.0, float(np.max(theta)))
        return m + math.log(math.exp(-m) + np.exp(np.asarray(theta) - m).sum())

    def mean_map(theta):
        m = max(0.0, float(np.max(theta)))
        e = np.exp(np.asarray(theta) - m)
        return e / (math.exp(-m) + e.sum())

    def fisher(theta):
        eta = mean_map(theta)
        return np.diag(eta) - np.outer(eta, eta)

    def inverse(eta):
        eta = np.asarray(eta, dtype=float)
        rest = 1.0 - eta.sum()
        if np.any(eta <= 0.0) or rest <= 0.0:
            raise DomainError(
                "categorical expectation parameters must be positive with sum < 1"
            )
        return np.log(eta) - math.log(rest)

    return ExponentialFamilySpec(
        name=f"categorical:{n}",
        space=space,
        carrier=lambda x: np.zeros_like(x),
        statistics=stats,
        log_partition=psi,
        domain=Box.unbounded(n - 1),
        mean_map=mean_map,
        fisher_closed=fisher,
        mean_inverse=inverse,
        sample_box=Box((-2.0,) * (n - 1), (2.0,) * (n - 1)),
    )


def binomial_family(n):
    """The binomial family B(n, .) with the success count as statistic."""
    n = int(n)
    if n < 1:
        raise DomainError("binomial:n needs n >= 1")
    space = FiniteSpace(tuple(range(n + 1)))

    def carrier(x):
        return gammaln(n + 1.0) - gammaln(x + 1.0) - gammaln(n - x + 1.0)

    def psi(theta):
        return float(n * np.logaddexp(0.0, theta[0]))

    def mean_map(theta):
        return np.asarray([n * expit(theta[0])])

    def fisher(theta):
        s = expit(theta[0])
        return np.asarray([[n * s * (1.0 - s)]])

    def inverse(eta):
        e = float(np.asarray(eta).reshape(-1)[0])
        if not 0.0 < e < n:
            raise DomainError("binomial expectation parameter must lie in (0, n)")
        return np.asarray([math.log(e) - math.log(n - e)])

    return ExponentialFamilySpec(
        name=f"binomial:{n}",
        space=space,
        carrier=carrier,
        statistics=(lambda x: x,),
        log_partition=psi,
        domain=Box.unbounded(1),
        mean_map=mean_map,
        fisher_closed=fisher,
        mean_inverse=inverse,
        sample_box=Box((-2.0,), (2.0,)),
    )


def normal_family():
    """Gaussians on the real line with statistics (x, x^2).

    theta1 = mu / sigma^2, theta2 = -1 / (2 sigma^2) with theta2 < 0, and
    psi = -theta1^2/(4 theta2) + (1/2) ln(-pi/theta2).
    """

    def psi(theta):
        t1, t2 = float(theta[0]), float(theta[1])
        return -t1 * t1 / (4.0 * t2) + 0.5 * math.log(-math.pi / t2)

    def mean_map(theta):
        t1, t2 = float(theta[0]), float(theta[1])
        mu = -t1 / (2.0 * t2)
        return np.asarray([mu, mu * mu - 1.0 / (2.0 * t2)])

    def fisher(theta):
        t1, t2 = float(theta[0]), float(theta[1])
        return np.asarray(
            [
                [-1.0 / (2.0 * t2), t1 / (2.0 * t2 * t2)],
                [t1 / (2.0 * t2 * t2), 1.0 / (2.0 * t2 * t2) - t1 * t1 / (2.0 * t2 ** 3)],
            ]
        )

    def inverse(eta):
        e1, e2 = float(eta[0]), float(eta[1])
        var = e2 - e1 * e1
        if var <= 0.0:
            raise DomainError("normal expectation parameters need E[x^2] > E[x]^2")
        return np.asarray([e1 / var, -1.0 / (2.0 * var)])

    def envelope(theta):
        t1, t2 = float(theta[0]), float(theta[1])
        return -t1 / (2.0 * t2), math.sqrt(-1.0 / (2.0 * t2))

    return ExponentialFamilySpec(
        name="normal",
        space=RealLine(),
        carrier=lambda x: np.zeros_like(x),
        statistics=(lambda x: x, lambda x: x * x),
        log_partition=psi,
        domain=Box((-math.inf, -math.inf), (math.inf, 0.0)),
        mean_map=mean_map,
        fisher_closed=fisher,
        mean_inverse=inverse,
        envelope=envelope,
        sample_box=Box((-2.0, -3.0), (2.0, -0.3)),
    )


def normal_fixed_sigma_family():
    """Unit-variance Gaussians N(theta, 1); psi = theta^2/2 + ln sqrt(2 pi)."""

    def psi(theta):
        t = float(theta[0])
        return 0.5 * t * t + 0.5 * math.log(2.0 * math.pi)

    return ExponentialFamilySpec(
        name="normal_fixed_sigma",
        space=RealLine(),
        carrier=lambda x: -0.5 * x * x,
        statistics=(lambda x: x,),
        log_partition=psi,
        domain=Box.unbounded(1),
        mean_map=lambda theta: np.asarray([float(theta[0])]),
        fisher_closed=lambda theta: np.asarray([[1.0]]),
        mean_inverse=lambda eta: np.asarray([float(np.asarray(eta).reshape(-1)[0])]),
        envelope=lambda theta: (float(theta[0]), 1.0),
        sample_box=Box((-2.0,), (2.0,)),
    )


def family(name):
    """Look up a builtin family by name, e.g. 'categorical:3' or 'normal'."""
    base, _, arg = str(name).partition(":")
    try:
        if base == "categorical":
            return categorical_family(int(arg))
        if base == "binomial":
            return binomial_family(int(arg))
        if base == "normal" and not arg:
            return normal_family()
        if base == "normal_fixed_sigma" and not arg:
            return normal_fixed_sigma_family()
    except (TypeError, ValueError) as exc:
        raise DomainError(f"malformed family name {name!r}") from exc
    raise DomainError(f"unknown family {name!r}")


BUILTIN_FAMILIES = ("categorical:3", "binomial:3", "normal", "normal_fixed_sigma")

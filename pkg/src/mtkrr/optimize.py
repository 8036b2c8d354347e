"""One-dimensional minimization of fixed-design ridge risks.

Every oracle computed in this package reduces to minimizing, over a single
regularization parameter ``lam >= 0``, a function of the form

    g(lam) = n lam^2 sum_i s_i / (g_i + n lam)^2            (bias)
           + (v / n) sum_i (g_i / (g_i + n lam))^2          (variance)

where ``g_i`` are the (nonnegative) kernel eigenvalues, ``s_i`` the squared
signal coefficients along the corresponding eigendirections, and ``v`` the
effective noise variance.  The multi-task mean part, the multi-task variance
part, each single-task risk, and the polynomial-decay template risk are all
instances of this family; they differ only in ``s`` and ``v``.

The minimizer follows a bracketing strategy: a log-spaced grid locates every
candidate basin, each basin is refined by a safeguarded Newton iteration on
g' (falling back to log-space bisection whenever a Newton step would leave
the bracket or the curvature is unusable), and the boundary candidates
lam = 0 and lam = +inf are evaluated through their exact limits.  g is not
convex in general, which is why all basins are refined rather than just the
best grid point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_GRID_POINTS = 64
DEFAULT_GRAD_TOL = 1e-5
DEFAULT_MAX_ITER = 100


@dataclass(frozen=True)
class RidgeRiskProfile:
    """Coefficients (g_i, s_i, v, n) of a one-parameter ridge risk curve."""

    n: int
    gamma: np.ndarray
    signal: np.ndarray
    noise: float

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=float)
        signal = np.asarray(self.signal, dtype=float)
        if gamma.ndim != 1 or signal.shape != gamma.shape:
            raise ValueError("gamma and signal must be 1-D arrays of equal length")
        if self.n <= 0:
            raise ValueError("n must be positive")
        if np.any(gamma < 0) or np.any(signal < 0) or self.noise < 0:
            raise ValueError("eigenvalues, signal energies and noise must be nonnegative")
        gamma = gamma.copy()
        signal = signal.copy()
        gamma.flags.writeable = False
        signal.flags.writeable = False
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "signal", signal)

    def parts(self, lam: float) -> tuple[float, float]:
        """Return (bias, variance) at ``lam``; lam may be 0 or +inf.

        At lam = 0 the smoother acts as the orthogonal projector onto the
        range of the kernel: directions with g_i = 0 keep their full signal
        energy as bias and contribute no variance.
        """
        n = self.n
        if math.isinf(lam):
            return float(self.signal.sum() / n), 0.0
        if lam < 0:
            raise ValueError("lam must be nonnegative")
        if lam == 0.0:
            null = self.gamma == 0.0
            bias = float(self.signal[null].sum() / n)
            var = self.noise / n * float(np.count_nonzero(~null))
            return bias, var
        d = self.gamma + n * lam
        bias = n * lam * lam * float(np.sum(self.signal / d**2))
        var = self.noise / n * float(np.sum((self.gamma / d) ** 2))
        return bias, var

    def value(self, lam: float) -> float:
        bias, var = self.parts(lam)
        return bias + var

    def value_grid(self, lams: np.ndarray) -> np.ndarray:
        """Vectorized risk evaluation over an array of strictly positive lam."""
        lams = np.asarray(lams, dtype=float)
        d = self.gamma[None, :] + self.n * lams[:, None]
        bias = self.n * lams**2 * np.sum(self.signal[None, :] / d**2, axis=1)
        var = self.noise / self.n * np.sum((self.gamma[None, :] / d) ** 2, axis=1)
        return bias + var

    def grad(self, lam: float) -> float:
        d = self.gamma + self.n * lam
        return 2.0 * self.n * float(
            np.sum(self.gamma * (self.signal * lam - self.noise / self.n * self.gamma) / d**3)
        )

    def hess(self, lam: float) -> float:
        n = self.n
        d = self.gamma + n * lam
        bias_term = 2.0 * n * float(np.sum(self.signal * self.gamma * (self.gamma - 2 * n * lam) / d**4))
        var_term = 6.0 * n * n * self.noise / n * float(np.sum(self.gamma**2 / d**4))
        return bias_term + var_term


@dataclass(frozen=True)
class ProfileMinimum:
    """Result of a one-dimensional oracle search.

    ``lam`` may be 0.0 or math.inf when a boundary dominates every interior
    stationary point (for example a pure-noise profile is minimized in the
    full-shrinkage limit).
    """

    lam: float
    value: float
    grad: float
    iterations: int
    source: str  # "newton", "grid", "zero" or "limit"


def _refine_newton(
    profile: RidgeRiskProfile,
    lo: float,
    hi: float,
    x0: float,
    grad_tol: float,
    max_iter: int,
) -> tuple[float, int]:
    """Safeguarded Newton for a stationary point of the risk inside [lo, hi].

    The bracket is tightened using the derivative sign (valid within a single
    basin); a Newton step is accepted only if it stays strictly inside the
    current bracket, otherwise the log-space midpoint is used.
    """
    a, b = lo, hi
    x = x0
    for it in range(1, max_iter + 1):
        g = profile.grad(x)
        if abs(g) < grad_tol:
            return x, it
        if g > 0:
            b = x
        else:
            a = x
        h = profile.hess(x)
        step = x - g / h if h > 0 else math.nan
        if not (a < step < b):
            step = math.sqrt(a * b)
        if abs(step - x) <= 1e-15 * max(x, step):
            return step, it
        x = step
    return x, max_iter


def minimize_profile(
    profile: RidgeRiskProfile,
    lo: float = 1e-12,
    hi: float = 1e3,
    n_grid: int = DEFAULT_GRID_POINTS,
    grad_tol: float = DEFAULT_GRAD_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ProfileMinimum:
    """Minimize the ridge risk over lam in [0, +inf].

    A log grid over [lo, hi] locates candidate basins; each basin is refined
    with the safeguarded Newton iteration (stopping when |g'| < grad_tol or
    after max_iter steps).  The exact boundary values at lam = 0 and
    lam = +inf always compete as candidates, so degenerate profiles (zero
    signal, zero relevant noise) resolve to the correct limits instead of a
    spurious interior point.
    """
    if not (0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    grid = np.geomspace(lo, hi, n_grid)
    vals = profile.value_grid(grid)
    if not np.all(np.isfinite(vals)):
        bad = grid[~np.isfinite(vals)][0]
        raise FloatingPointError(f"risk evaluation is not finite at lam={bad!r}")

    candidates: list[ProfileMinimum] = [
        ProfileMinimum(0.0, profile.value(0.0), math.nan, 0, "zero"),
        ProfileMinimum(math.inf, profile.value(math.inf), math.nan, 0, "limit"),
    ]
    i_best = int(np.argmin(vals))
    candidates.append(ProfileMinimum(float(grid[i_best]), float(vals[i_best]), profile.grad(float(grid[i_best])), 0, "grid"))

    # every grid-local minimum marks a basin worth refining
    left = np.concatenate(([np.inf], vals[:-1]))
    right = np.concatenate((vals[1:], [np.inf]))
    for i in np.nonzero((vals <= left) & (vals <= right))[0]:
        a = grid[i - 1] if i > 0 else lo / 2.0
        b = grid[i + 1] if i < len(grid) - 1 else hi * 2.0
        x, iters = _refine_newton(profile, float(a), float(b), float(grid[i]), grad_tol, max_iter)
        candidates.append(ProfileMinimum(x, profile.value(x), profile.grad(x), iters, "newton"))

    return min(candidates, key=lambda c: c.value)

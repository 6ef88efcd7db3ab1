"""Dense complex linear algebra plus the three numerical kernels used
throughout: Hermitian eigendecomposition, a small dense LP solver, and a
derivative-free local minimizer.

Matrices are plain complex numpy arrays. Everything here is a pure
function of its arguments, so the module is safe to call from worker
threads without locking.

Default tolerances are set once here and inherited by the callers:
``EIG_TOL`` for eigensolves, ``LP_TOL`` for linear programs, ``MIN_TOL``
for the simplex minimizer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.optimize

EIG_TOL = 1e-12
LP_TOL = 1e-9
MIN_TOL = 1e-10


class NotHermitianError(ValueError):
    """Input matrix is not Hermitian within the requested tolerance."""


class NoConvergenceError(RuntimeError):
    """Eigensolver failed to converge."""


class InfeasibleError(RuntimeError):
    """LP has no feasible point."""


class UnboundedError(RuntimeError):
    """LP objective is unbounded above on the feasible region."""


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(a).T


def frob(a: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(a))


@dataclass(frozen=True)
class HermEig:
    """Spectral decomposition H = V diag(w) V† with w ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def herm_eig(h: np.ndarray, tol: float = EIG_TOL) -> HermEig:
    """Full spectral decomposition of a Hermitian matrix.

    Eigenvalues come back ascending and the decomposition is
    deterministic for identical input. Raises NotHermitianError when
    ``norm(H - H†)`` exceeds ``tol`` and NoConvergenceError if the
    underlying iteration fails.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if frob(h - dagger(h)) > tol:
        raise NotHermitianError(
            f"matrix deviates from Hermitian by {frob(h - dagger(h)):.3e} > {tol:.1e}"
        )
    try:
        w, v = np.linalg.eigh((h + dagger(h)) / 2.0)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh on <=200 dims
        raise NoConvergenceError(str(exc)) from exc
    return HermEig(eigenvalues=w, eigenvectors=v)


def project_psd(h: np.ndarray, tol: float = EIG_TOL) -> np.ndarray:
    """Frobenius-nearest positive semidefinite matrix to H.

    Clips negative eigenvalues to zero and reassembles. Idempotent to
    rounding: applying it twice moves the result by < 1e-10.
    """
    e = herm_eig(h, tol=tol)
    w = np.maximum(e.eigenvalues, 0.0)
    p = (e.eigenvectors * w) @ dagger(e.eigenvectors)
    return (p + dagger(p)) / 2.0


@dataclass(frozen=True)
class LPProblem:
    """Maximize c·x subject to A x ≤ b, with x_i ≥ 0 where flagged.

    ``nonneg[i]`` False leaves variable i free. The description is
    exact: no constraint exists beyond A, b and the sign flags.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    nonneg: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        nn = np.atleast_1d(np.asarray(self.nonneg, dtype=bool))
        if A.shape != (b.size, c.size) or nn.size != c.size:
            raise ValueError(
                f"inconsistent LP dimensions: c {c.size}, A {A.shape}, "
                f"b {b.size}, nonneg {nn.size}"
            )
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "nonneg", nn)


def solve_lp(p: LPProblem, tol: float = LP_TOL) -> tuple[float, np.ndarray]:
    """Solve the LP to within ``tol``, returning (value, maximizer).

    Raises InfeasibleError or UnboundedError when the problem has no
    optimum; any other solver failure surfaces as RuntimeError.
    """
    bounds = [(0.0, None) if f else (None, None) for f in p.nonneg]
    res = scipy.optimize.linprog(
        -p.c,
        A_ub=p.A,
        b_ub=p.b,
        bounds=bounds,
        method="highs",
        options={"primal_feasibility_tolerance": min(tol, 1e-9),
                 "dual_feasibility_tolerance": min(tol, 1e-9)},
    )
    if res.status == 2:
        raise InfeasibleError(res.message)
    if res.status == 3:
        raise UnboundedError(res.message)
    if not res.success:  # pragma: no cover - defensive
        raise RuntimeError(f"LP solver failure: {res.message}")
    return float(-res.fun), np.asarray(res.x, dtype=float)


@dataclass(frozen=True)
class MinimizeResult:
    """Best point found by ``minimize``.

    ``converged`` is False when the evaluation budget ran out before the
    simplex shrank below tolerance; the best-so-far point is still
    returned.
    """

    x: np.ndarray
    fun: float
    nevals: int
    converged: bool


def minimize(
    f: Callable[[np.ndarray], float],
    x0: Sequence[float],
    tolerance: float = MIN_TOL,
    max_evals: int = 20000,
    simplex_scale: float = 0.1,
) -> MinimizeResult:
    """Nelder-Mead descent from x0 with standard coefficients.

    The initial simplex is x0 plus ``simplex_scale`` along each
    coordinate axis, so the run is a deterministic function of the
    arguments. The caller is responsible for mapping constraint
    violations to large finite penalties inside ``f``.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    simplex = np.vstack([x0] + [x0 + simplex_scale * np.eye(n)[i] for i in range(n)])
    res = scipy.optimize.minimize(
        f,
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "xatol": tolerance,
            "fatol": tolerance,
            "maxfev": max_evals,
            "adaptive": False,
        },
    )
    x, fx = np.asarray(res.x, dtype=float), float(res.fun)
    f0 = float(f(x0))
    if f0 < fx:  # guard the contract fbest <= f(x0); NM keeps the incumbent anyway
        x, fx = x0, f0
    return MinimizeResult(x=x, fun=fx, nevals=int(res.nfev), converged=bool(res.success))

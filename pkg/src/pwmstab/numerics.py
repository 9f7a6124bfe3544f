"""Small dense-matrix numerics used throughout the package.

Converter models are low order (N <= 8), so everything here targets small
dense matrices and leans on LAPACK-backed routines where they already meet
the accuracy contracts:

* ``mat_exp`` wraps scaling-and-squaring with a Pade kernel
  (``scipy.linalg.expm``), accurate to ~1e-13 relative for the norms that
  occur in one switching period.
* ``mat_exp_integral`` evaluates ``int_0^t e^{A s} ds`` through the
  augmented block exponential, so it stays exact when ``A`` is singular
  (lossless converter idealizations).
* ``eigenvalues`` uses closed forms for N <= 2 and the dense QR algorithm
  (``numpy.linalg.eigvals``) for N >= 3.
* ``solve_linear``/``solve_complex`` are LU solves with an explicit pivot
  threshold so near-singular systems raise instead of returning garbage;
  upstream code relies on that signal (e.g. "lambda is an eigenvalue of
  the open-loop map").
* ``find_root`` is a bracketing Brent solve; it never leaves the bracket.

All functions are pure; they can be called concurrently from sweep workers.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import DimensionError, DomainError, NoRootError, SingularMatrixError

#: Relative pivot threshold below which a linear system is declared singular.
SINGULAR_PIVOT_RTOL = 1e-14


def as_square_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return ``a`` as a square 2-D float/complex array."""
    arr = np.asarray(a)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def mat_exp(a, t: float) -> np.ndarray:
    """Matrix exponential ``e^{A t}``.

    ``t`` may be zero or negative (reversed-time factors such as
    ``e^{-A T}`` are legitimate inputs).
    """
    arr = as_square_matrix(a, "A").astype(float, copy=False)
    if not math.isfinite(t):
        raise DomainError(f"t must be finite, got {t}")
    if t == 0.0:
        return np.eye(arr.shape[0])
    return scipy.linalg.expm(arr * t)


def mat_exp_integral(a, t: float) -> np.ndarray:
    """Integral ``int_0^t e^{A s} ds`` via the augmented block exponential.

    Exponentiates ``[[A, I], [0, 0]] * t`` and reads the upper-right block,
    which remains correct when ``A`` is singular (unlike the closed form
    ``A^{-1}(e^{A t} - I)``).
    """
    arr = as_square_matrix(a, "A").astype(float, copy=False)
    if not math.isfinite(t) or t < 0.0:
        raise DomainError(f"t must be finite and >= 0, got {t}")
    n = arr.shape[0]
    if t == 0.0:
        return np.zeros((n, n))
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = arr
    block[:n, n:] = np.eye(n)
    return scipy.linalg.expm(block * t)[:n, n:]


def _eig2(m: np.ndarray) -> np.ndarray:
    # Closed form for the 2x2 case; complex sqrt handles both eigenvalue types.
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = complex(tr * tr / 4.0 - det)
    root = np.sqrt(disc)
    return np.array([tr / 2.0 + root, tr / 2.0 - root], dtype=complex)


def eigenvalues(m) -> np.ndarray:
    """All eigenvalues of a small dense matrix, with multiplicity.

    Closed form for N <= 2, dense QR iteration for N >= 3.  The result is
    sorted by (real, imag) so callers get a deterministic order.
    """
    arr = as_square_matrix(m, "M").astype(complex, copy=False)
    n = arr.shape[0]
    if n == 0:
        return np.array([], dtype=complex)
    if n == 1:
        vals = arr[0, :1].copy()
    elif n == 2:
        vals = _eig2(arr)
    else:
        vals = np.linalg.eigvals(arr)
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]


def solve_linear(m, b) -> np.ndarray:
    """Solve ``M x = b`` by LU with partial pivoting.

    Raises :class:`SingularMatrixError` when any pivot magnitude falls
    below ``SINGULAR_PIVOT_RTOL * ||M||_inf``; that threshold is the
    package-wide definition of "numerically singular".
    """
    arr = as_square_matrix(m, "M")
    vec = np.asarray(b)
    if vec.shape[0] != arr.shape[0]:
        raise DimensionError(
            f"b has length {vec.shape[0]}, expected {arr.shape[0]}"
        )
    if not np.all(np.isfinite(vec)):
        raise DomainError("b has non-finite entries")
    scale = np.linalg.norm(arr, np.inf)
    if scale == 0.0:
        raise SingularMatrixError("matrix is identically zero")
    with warnings.catch_warnings():
        # Singularity is detected by the pivot check below; scipy's own
        # warning about exact singularity is redundant noise here.
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(arr, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= SINGULAR_PIVOT_RTOL * scale:
        raise SingularMatrixError(
            f"pivot {pivots.min():.3e} below threshold "
            f"{SINGULAR_PIVOT_RTOL * scale:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), vec, check_finite=False)


def solve_complex(m, b) -> np.ndarray:
    """Complex linear solve; see :func:`solve_linear` for the contract."""
    arr = np.asarray(m, dtype=complex)
    vec = np.asarray(b, dtype=complex)
    return solve_linear(arr, vec)


def find_root(f, lo: float, hi: float, tol: float) -> float:
    """Root of ``f`` inside the bracket ``[lo, hi]`` (Brent's method).

    Requires a sign change over the bracket; raises :class:`NoRootError`
    otherwise.  The returned point is within ``tol`` of a sign change of
    ``f`` and never leaves ``[lo, hi]``.
    """
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError(f"invalid bracket [{lo}, {hi}]")
    if tol <= 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise NoRootError(
            f"f({lo:.6g}) = {flo:.6g} and f({hi:.6g}) = {fhi:.6g} "
            "have the same sign"
        )
    return float(
        scipy.optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)
    )

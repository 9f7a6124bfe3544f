"""Periodic steady-state solver for the switched-linear converter.

The T-periodic orbit is pinned down by three conditions: propagating the
state through stage S1 for ``d`` seconds, through stage S2 for ``T - d``,
returning to the starting state, and the compensator output meeting the
ramp at the switching instant.  For a candidate ``d`` the first two are a
linear boundary-value problem solved in closed form with matrix
exponentials; the third is a scalar root-finding problem in ``d``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import DegenerateOrbitError, DomainError, NoSwitchingError, SingularMatrixError
from .model import InputVector, ModulationEdge, RampSignal, SwitchedLinearModel, ramp_value


@dataclass(frozen=True)
class SteadyState:
    """Solved periodic orbit data.

    ``d`` is the switching instant within the cycle; ``duty`` is the ON
    fraction (``d/T`` for TEM, ``1 - d/T`` for LEM).  ``candidates`` is
    how many switching-condition sign changes the solver saw; values
    above 1 mean the first crossing was chosen by the latch convention.
    """

    d: float
    duty: float
    x0_start: np.ndarray
    x0_switch: np.ndarray
    y_switch: float
    candidates: int = 1


@dataclass(frozen=True)
class OrbitDerivatives:
    """One-sided orbit time-derivatives at the switching instant."""

    xdot_minus: np.ndarray
    xdot_plus: np.ndarray


def x0_of_d(
    model: SwitchedLinearModel,
    ramp: RampSignal,
    u: InputVector,
    d: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Boundary states of the periodic orbit for an imposed switching time.

    Solves ``(I - e^{A2 (T-d)} e^{A1 d}) x0 = e^{A2 (T-d)} J1 B1 u + J2 B2 u``
    where ``J_i`` are the stage exponential integrals, then maps forward to
    the switch state.  Raises :class:`DegenerateOrbitError` when the
    open-loop cycle map has a multiplier at +1 (no isolated orbit).
    """
    T = ramp.T
    if not 0.0 <= d <= T:
        raise DomainError(f"d must lie in [0, {T}], got {d}")
    uv = u.as_array()
    m1 = numerics.mat_exp(model.A1, d)
    m2 = numerics.mat_exp(model.A2, T - d)
    j1b1u = numerics.mat_exp_integral(model.A1, d) @ (model.B1 @ uv)
    j2b2u = numerics.mat_exp_integral(model.A2, T - d) @ (model.B2 @ uv)
    lhs = np.eye(model.n) - m2 @ m1
    rhs = m2 @ j1b1u + j2b2u
    try:
        x0_start = numerics.solve_linear(lhs, rhs)
    except SingularMatrixError as exc:
        raise DegenerateOrbitError(
            f"open-loop cycle map has a multiplier at +1 for d={d:.6g}"
        ) from exc
    x0_switch = m1 @ x0_start + j1b1u
    return x0_start, x0_switch


def switching_residual(
    model: SwitchedLinearModel,
    ramp: RampSignal,
    u: InputVector,
    d: float,
) -> float:
    """Compensator-output-minus-ramp mismatch at an imposed switching time."""
    _, x0_switch = x0_of_d(model, ramp, u, d)
    y = float(model.C @ x0_switch + model.D @ u.as_array())
    return y - ramp_value(ramp, d)


def _duty(edge: ModulationEdge, d: float, T: float) -> float:
    return d / T if edge is ModulationEdge.TEM else 1.0 - d / T


def solve_periodic_orbit(
    model: SwitchedLinearModel,
    ramp: RampSignal,
    u: InputVector,
    grid_points: int = 256,
    d_tol: float | None = None,
) -> SteadyState:
    """Find the periodic orbit: scan the switching residual, refine roots.

    The residual is sampled on a uniform interior grid over ``(0, T)``;
    every sign change is refined by the bracketing root finder, and the
    smallest root wins (first crossing in the cycle, matching comparator
    latch behavior).  ``candidates`` on the result reports how many sign
    changes were seen.

    Raises
    ------
    NoSwitchingError
        No sign change anywhere: the converter never switches in steady
        state (duty saturated at 0 or 1).
    DegenerateOrbitError
        Every candidate sat at a degenerate orbit (open-loop multiplier
        at +1).
    """
    T = ramp.T
    if grid_points < 2:
        raise DomainError(f"grid_points must be >= 2, got {grid_points}")
    if d_tol is None:
        d_tol = 1e-12 * T
    grid = np.linspace(0.0, T, grid_points + 2)[1:-1]

    values = np.empty(grid.shape)
    for i, d in enumerate(grid):
        try:
            values[i] = switching_residual(model, ramp, u, d)
        except DegenerateOrbitError:
            values[i] = np.nan

    brackets: list[tuple[float, float]] = []
    exact: list[float] = []
    for i in range(len(grid) - 1):
        a, b = values[i], values[i + 1]
        if np.isnan(a) or np.isnan(b):
            continue
        if a == 0.0:
            exact.append(grid[i])
        elif a * b < 0.0:
            brackets.append((grid[i], grid[i + 1]))
    if len(grid) and values[-1] == 0.0:
        exact.append(grid[-1])

    n_candidates = len(brackets) + len(exact)
    if n_candidates == 0:
        raise NoSwitchingError(
            "switching condition has no solution in (0, T): "
            "the converter never switches in steady state"
        )

    roots = list(exact)
    failures = 0
    for lo, hi in brackets:
        try:
            roots.append(
                numerics.find_root(
                    lambda d: switching_residual(model, ramp, u, d), lo, hi, d_tol
                )
            )
        except DegenerateOrbitError:
            failures += 1
    if not roots:
        raise DegenerateOrbitError(
            f"all {failures} switching candidates hit degenerate orbits"
        )

    d_star = min(roots)
    x0_start, x0_switch = x0_of_d(model, ramp, u, d_star)
    y_switch = float(model.C @ x0_switch + model.D @ u.as_array())
    return SteadyState(
        d=d_star,
        duty=_duty(model.edge, d_star, T),
        x0_start=x0_start,
        x0_switch=x0_switch,
        y_switch=y_switch,
        candidates=n_candidates,
    )


def orbit_derivatives(
    model: SwitchedLinearModel, u: InputVector, ss: SteadyState
) -> OrbitDerivatives:
    """Orbit time-derivatives just before and after the switch."""
    uv = u.as_array()
    return OrbitDerivatives(
        xdot_minus=model.A1 @ ss.x0_switch + model.B1 @ uv,
        xdot_plus=model.A2 @ ss.x0_switch + model.B2 @ uv,
    )

"""Explicit finite-difference solver for the 1D wave equation.

Solves u_tt = c^2 u_xx on (0, L) with homogeneous Dirichlet ends and a
Gaussian pulse at rest as initial data, using second-order centered
differences in space and time (three-level leapfrog). The scheme is
linear, time-reversible, and stable for Courant numbers c*dt/dx <= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CflViolation, ValidationError

DEFAULT_LENGTH = 4.0 * math.pi
DEFAULT_FINAL_TIME = 52.0
DEFAULT_INTERVALS = 256


@dataclass(frozen=True)
class WaveParams:
    """Gaussian pulse a0*exp(-(x-x0)^2/(2 sigma^2)) plus the wave speed c."""

    a0: float
    x0: float
    sigma: float
    c: float = 1.0

    def validate(self, length: float) -> None:
        if not (self.a0 > 0):
            raise ValidationError(f"pulse amplitude must be positive, got {self.a0}")
        if not (self.sigma > 0):
            raise ValidationError(f"pulse width must be positive, got {self.sigma}")
        if not (0 < self.x0 < length):
            raise ValidationError(
                f"pulse center {self.x0} outside the open domain (0, {length})"
            )

    def as_vector(self) -> np.ndarray:
        return np.array([self.a0, self.x0, self.sigma], dtype=float)


@dataclass(frozen=True)
class GridSpec:
    """Uniform space-time grid: N spatial intervals on (0, L), n_steps time steps on (0, T)."""

    n_steps: int
    L: float = DEFAULT_LENGTH
    T: float = DEFAULT_FINAL_TIME
    N: int = DEFAULT_INTERVALS

    def __post_init__(self) -> None:
        if self.N < 2 or self.n_steps < 1 or self.L <= 0 or self.T <= 0:
            raise ValidationError(
                f"invalid grid: N={self.N}, n_steps={self.n_steps}, L={self.L}, T={self.T}"
            )

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    @property
    def x(self) -> np.ndarray:
        """Node coordinates, including both boundary nodes."""
        return np.linspace(0.0, self.L, self.N + 1)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n_steps + 1)


@dataclass(frozen=True)
class Trajectory:
    """One stable solve: states[j] is the solution at times[j] (boundary nodes pinned to 0)."""

    states: np.ndarray
    times: np.ndarray
    params: WaveParams | None = None

    @property
    def n_nodes(self) -> int:
        return self.states.shape[1]


def stable_step_count(grid_like: GridSpec | None = None, *, L: float = DEFAULT_LENGTH,
                      T: float = DEFAULT_FINAL_TIME, N: int = DEFAULT_INTERVALS,
                      c: float = 1.0, multiple_of: int | None = None) -> int:
    """Smallest time-step count satisfying the CFL bound, optionally rounded up to a multiple.

    The multiple is handy when trajectories are later subsampled with an
    integer stride down to a fixed number of stored time levels.
    """
    if grid_like is not None:
        L, T, N = grid_like.L, grid_like.T, grid_like.N
    n = max(1, math.ceil(abs(c) * T * N / L))
    # guard against ceil landing exactly on the float boundary from below
    while abs(c) * (T / n) > L / N:
        n += 1
    if multiple_of:
        n = ((n + multiple_of - 1) // multiple_of) * multiple_of
    return n


def initial_pulse(params: WaveParams, grid: GridSpec) -> np.ndarray:
    """Gaussian pulse sampled at the grid nodes, boundary entries forced to 0."""
    params.validate(grid.L)
    x = grid.x
    u0 = params.a0 * np.exp(-((x - params.x0) ** 2) / (2.0 * params.sigma**2))
    u0[0] = 0.0
    u0[-1] = 0.0
    return u0


def cfl_courant(c: float, grid: GridSpec) -> float:
    """Courant ratio c*dt/dx. Solves must be rejected when it exceeds 1."""
    return abs(c) * grid.dt / grid.dx


def solve_from_state(u0: np.ndarray, grid: GridSpec, c: float,
                     params: WaveParams | None = None) -> Trajectory:
    """Leapfrog time stepping from an arbitrary initial state at rest.

    The first step is the second-order Taylor start consistent with zero
    initial velocity:

        u^1_i = u^0_i + (C/2) (u^0_{i+1} - 2 u^0_i + u^0_{i-1}),

    with C = (c dt/dx)^2; afterwards

        u^{j+1}_i = C (u^j_{i+1} + u^j_{i-1}) + 2 (1-C) u^j_i - u^{j-1}_i.

    Raises CflViolation when c*dt/dx > 1.
    """
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (grid.N + 1,):
        raise ValidationError(
            f"initial state has shape {u0.shape}, expected ({grid.N + 1},)"
        )
    ratio = cfl_courant(c, grid)
    if ratio > 1.0:
        raise CflViolation(
            f"Courant ratio {ratio:.6g} > 1 (c={c}, dt={grid.dt:.6g}, dx={grid.dx:.6g})"
        )
    C = ratio * ratio

    states = np.zeros((grid.n_steps + 1, grid.N + 1))
    states[0] = u0
    states[0, 0] = 0.0
    states[0, -1] = 0.0
    states[1, 1:-1] = states[0, 1:-1] + 0.5 * C * (
        states[0, 2:] - 2.0 * states[0, 1:-1] + states[0, :-2]
    )
    for j in range(1, grid.n_steps):
        states[j + 1, 1:-1] = (
            C * (states[j, 2:] + states[j, :-2])
            + 2.0 * (1.0 - C) * states[j, 1:-1]
            - states[j - 1, 1:-1]
        )
    return Trajectory(states=states, times=grid.times, params=params)


def solve_wave(params: WaveParams, grid: GridSpec) -> Trajectory:
    """Solve for the Gaussian-pulse initial condition given by ``params``."""
    return solve_from_state(initial_pulse(params, grid), grid, params.c, params=params)

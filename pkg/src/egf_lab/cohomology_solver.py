"""Cohomological equation of a linear torus flow, solved by small divisors.

For a constant direction field v on the 2- or 3-torus, the equation
v . grad f = h - mean(h) is solved mode by mode: each Fourier coefficient of
h is divided by 2 pi i <u, v>.  The solver is truncation-based: it works on
the finite mode table it is given (|u|_inf <= K) and reports the residual of
the reconstructed identity on a verification grid, so nothing about
convergence of infinite series is assumed silently.

Direction vectors with rational resonances leave some divisors at zero; the
solver refuses exactly when the data carries energy on such a mode, naming
the offending lattice vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

DIVISOR_MARGIN_FLOOR = 1e-12
ENERGY_FLOOR_REL = 1e-13


class ResonanceError(RuntimeError):
    """The data has energy on a mode whose divisor is below the floor."""

    def __init__(self, message: str, worst_mode: tuple[int, ...]):
        super().__init__(message)
        self.worst_mode = worst_mode


def _as_mode(u: Iterable[int]) -> tuple[int, ...]:
    mode = tuple(int(c) for c in u)
    return mode


def _neg(u: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(-c for c in u)


@dataclass
class TorusCohomologyProblem:
    """Right-hand side h (finite Fourier table) and flow direction v.

    ``coeffs`` maps integer modes u (|u|_inf <= K) to complex coefficients of
    exp(2 pi i <u, x>).  Conjugate symmetry (h real) is completed when one of
    a +-u pair is missing and validated when both are present.  ``s`` is the
    Diophantine exponent used in margin diagnostics; the leaf dimension of
    the soliton reading is dim - 1.
    """

    v: tuple[float, ...]
    coeffs: dict
    K: int
    s: float = 1.0

    def __post_init__(self):
        self.v = tuple(float(c) for c in self.v)
        if len(self.v) not in (2, 3):
            raise ValueError("only 2- and 3-dimensional torus flows are supported")
        if self.K < 1:
            raise ValueError("truncation radius K must be >= 1")
        if self.s <= 0:
            raise ValueError("Diophantine exponent s must be positive")
        table: dict[tuple[int, ...], complex] = {}
        for u, c in self.coeffs.items():
            mode = _as_mode(u)
            if len(mode) != self.dim:
                raise ValueError(f"mode {mode} does not match dimension {self.dim}")
            if max(abs(m) for m in mode) > self.K:
                raise ValueError(f"mode {mode} lies outside |u|_inf <= {self.K}")
            table[mode] = complex(c)
        scale = max([abs(c) for c in table.values()], default=0.0)
        for u, c in list(table.items()):
            nu = _neg(u)
            if nu in table:
                if abs(table[nu] - c.conjugate()) > 1e-10 * max(1.0, scale):
                    raise ValueError(
                        f"conjugate symmetry violated between modes {u} and {nu}"
                    )
            else:
                table[nu] = c.conjugate()
        self.coeffs = table

    @property
    def dim(self) -> int:
        return len(self.v)

    @property
    def leaf_dim(self) -> int:
        return self.dim - 1

    @classmethod
    def from_modes(cls, v, modes: Mapping, K: int, s: float = 1.0):
        return cls(tuple(v), dict(modes), K, s)

    @classmethod
    def from_grid(cls, v, grid: np.ndarray, K: int, s: float = 1.0):
        """Build the coefficient table from real samples on a uniform grid.

        The transform is a direct summation over the grid: coefficient of
        exp(2 pi i <u, x>) with x_j = index/M per axis.
        """
        grid = np.asarray(grid, dtype=float)
        if grid.ndim != len(tuple(v)):
            raise ValueError("grid dimension must match the direction vector")
        if min(grid.shape) < 2 * K + 1:
            raise ValueError(
                f"grid of shape {grid.shape} cannot resolve modes up to K={K}"
            )
        coeffs = _dft_direct(grid, K)
        return cls(tuple(v), coeffs, K, s)


def _mode_range(K: int) -> np.ndarray:
    return np.arange(-K, K + 1)


def _dft_direct(grid: np.ndarray, K: int) -> dict:
    """Direct-summation DFT of a real grid, modes |u|_inf <= K."""
    dims = grid.shape
    mats = []
    for M in dims:
        j = np.arange(M)
        mats.append(np.exp(-2j * np.pi * np.outer(_mode_range(K), j / M)) / M)
    if grid.ndim == 2:
        cube = np.einsum("jk,aj,bk->ab", grid, mats[0], mats[1], optimize=True)
    else:
        cube = np.einsum("jkl,aj,bk,cl->abc", grid, mats[0], mats[1], mats[2], optimize=True)
    coeffs = {}
    K_idx = _mode_range(K)
    for idx in np.ndindex(*cube.shape):
        u = tuple(int(K_idx[i]) for i in idx)
        c = complex(cube[idx])
        if abs(c) > 0.0:
            coeffs[u] = c
    return coeffs


def _evaluate_modes(coeffs: Mapping, dim: int, K: int, grid_shape: tuple[int, ...]):
    """Evaluate a finite mode table on a uniform grid by separable summation."""
    cube = np.zeros((2 * K + 1,) * dim, dtype=complex)
    for u, c in coeffs.items():
        cube[tuple(m + K for m in u)] += c
    mats = []
    for M in grid_shape:
        j = np.arange(M)
        mats.append(np.exp(2j * np.pi * np.outer(_mode_range(K), j / M)))
    if dim == 2:
        return np.einsum("ab,aj,bk->jk", cube, mats[0], mats[1], optimize=True)
    return np.einsum("abc,aj,bk,cl->jkl", cube, mats[0], mats[1], mats[2], optimize=True)


def diophantine_margin(v, K: int, s: float) -> float:
    """min over 0 < |u|_inf <= K of |<u, v>| * ||u||_2^s, by exhaustive scan."""
    v = np.asarray(v, dtype=float)
    if K < 1:
        raise ValueError("K must be >= 1")
    axes = [_mode_range(K)] * v.size
    mesh = np.meshgrid(*axes, indexing="ij")
    lattice = np.stack([m.ravel() for m in mesh], axis=-1).astype(float)
    norms = np.linalg.norm(lattice, axis=-1)
    nonzero = norms > 0
    inner = np.abs(lattice[nonzero] @ v)
    return float(np.min(inner * norms[nonzero] ** s))


@dataclass
class CohomologySolution:
    """Mode table of f with the absorbed mean and verification diagnostics.

    ``eps`` is the zero mode of h (the constant the equation cannot produce).
    For the soliton structure reading on leaves of dimension n = dim - 1, the
    solved field must be scaled by ``soliton_field_scale`` = n/2, since the
    structure equation carries the factor 2/n in front of the derivative.
    """

    f_coeffs: dict
    eps: float
    margin: float
    residual: float
    max_imag: float
    soliton_field_scale: float
    problem: TorusCohomologyProblem = field(repr=False)


def solve_linear_flow(
    p: TorusCohomologyProblem,
    divisor_floor: float = DIVISOR_MARGIN_FLOOR,
) -> CohomologySolution:
    """Solve v . grad f = h - mean(h) mode by mode within the truncation.

    f_u = h_u / (2 pi i <u, v>) on every mode carrying energy; the zero mode
    of h is absorbed into eps.  Modes with |h_u| below the relative energy
    floor are dropped.  If an energized mode has |<u,v>| ||u||^s below the
    divisor floor, the problem is unsolvable within this truncation and the
    worst lattice vector is named.
    """
    v = np.asarray(p.v, dtype=float)
    scale = max([abs(c) for c in p.coeffs.values()], default=0.0)
    energy_floor = ENERGY_FLOOR_REL * max(1.0, scale)

    eps_c = p.coeffs.get((0,) * p.dim, 0.0 + 0.0j)
    eps = float(eps_c.real)

    f_coeffs: dict[tuple[int, ...], complex] = {(0,) * p.dim: 0.0 + 0.0j}
    worst_mode = None
    worst_margin = math.inf
    for u, c in p.coeffs.items():
        if all(m == 0 for m in u) or abs(c) <= energy_floor:
            continue
        inner = float(np.dot(u, v))
        mode_margin = abs(inner) * float(np.linalg.norm(u)) ** p.s
        if mode_margin < divisor_floor:
            if mode_margin < worst_margin:
                worst_margin = mode_margin
                worst_mode = u
            continue
        f_coeffs[u] = c / (2j * np.pi * inner)
    if worst_mode is not None:
        raise ResonanceError(
            f"mode u = {worst_mode} is resonant for v = {p.v}: "
            f"|<u,v>| ||u||^s = {worst_margin:.3e} below floor {divisor_floor:.1e}",
            worst_mode,
        )

    grid_shape = (max(4 * p.K, 8),) * p.dim
    df_coeffs = {
        u: c * 2j * np.pi * float(np.dot(u, v)) for u, c in f_coeffs.items()
    }
    h_centered = {
        u: c for u, c in p.coeffs.items() if not all(m == 0 for m in u)
    }
    field_df = _evaluate_modes(df_coeffs, p.dim, p.K, grid_shape)
    field_h = _evaluate_modes(h_centered, p.dim, p.K, grid_shape)
    field_f = _evaluate_modes(f_coeffs, p.dim, p.K, grid_shape)
    residual = float(np.max(np.abs((field_df - field_h).real)))
    residual = max(residual, float(np.max(np.abs((field_df - field_h).imag))))
    max_imag = float(np.max(np.abs(field_f.imag))) if field_f.size else 0.0

    return CohomologySolution(
        f_coeffs=f_coeffs,
        eps=eps,
        margin=diophantine_margin(p.v, p.K, p.s),
        residual=residual,
        max_imag=max_imag,
        soliton_field_scale=p.leaf_dim / 2.0,
        problem=p,
    )


@dataclass(frozen=True)
class ShellRow:
    """Small-divisor amplification within one shell |u|_inf = const."""

    shell: int
    n_modes: int
    min_divisor: float
    max_amplification: float
    margin_bound: float


def amplification_report(sol: CohomologySolution) -> list[ShellRow]:
    """Per-shell worst-case |f_u| / |h_u| against the Diophantine bound.

    The bound per mode is ||u||_2^s / (2 pi margin); a solution obtained
    through the solver always sits below it.
    """
    p = sol.problem
    v = np.asarray(p.v, dtype=float)
    shells: dict[int, dict] = {}
    for u, fc in sol.f_coeffs.items():
        if all(m == 0 for m in u):
            continue
        hc = p.coeffs.get(u, 0.0)
        if abs(hc) == 0.0:
            continue
        shell = max(abs(m) for m in u)
        row = shells.setdefault(
            shell,
            {"n": 0, "min_div": math.inf, "max_amp": 0.0, "bound": 0.0},
        )
        row["n"] += 1
        row["min_div"] = min(row["min_div"], abs(float(np.dot(u, v))))
        row["max_amp"] = max(row["max_amp"], abs(fc) / abs(hc))
        if sol.margin > 0:
            bound = float(np.linalg.norm(u)) ** p.s / (2 * np.pi * sol.margin)
        else:
            bound = math.inf
        row["bound"] = max(row["bound"], bound)
    return [
        ShellRow(shell, row["n"], row["min_div"], row["max_amp"], row["bound"])
        for shell, row in sorted(shells.items())
    ]

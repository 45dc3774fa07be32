"""Pseudo-multiplier quantization: operator application, kernels, Galerkin matrices.

The operator of symbol m acts as

    T_m f(x) = sum_{|nu|<=N} m(x, nu) f_hat(phi_nu) phi_nu(x)

on the truncated span, with kernel

    K_m(x, y) = sum_{|nu|<=N} m(x, nu) phi_nu(x) phi_nu(y)

sampled at the quadrature nodes, so that operator application, trace
integrals, and factorization all share one discrete inner product.  The
nu-sum always runs over the canonical graded enumeration.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .hermite import QuadratureGrid, hermite_basis, multi_indices, sample
from .symbols import Symbol
from .transform import forward_transform


def _symbol_basis_product(symbol: Symbol, N: int, grid: QuadratureGrid):
    """Phi[a, i] = phi_nu_a(x_i) and A[a, i] = m(x_i, nu_a) phi_nu_a(x_i)."""
    indices = multi_indices(grid.n, N)
    Phi = hermite_basis(indices, grid.points)
    A = np.empty_like(Phi)
    for a, nu in enumerate(indices):
        A[a] = symbol.evaluate(grid.points, nu) * Phi[a]
    return indices, Phi, A


def apply(symbol: Symbol, f, N: int, grid: QuadratureGrid, x):
    """T_m f at point(s) x, with coefficients from forward_transform.

    x may be a single point (n,) giving a float, or an (M, n) array giving
    an (M,) array.
    """
    if symbol.n != grid.n:
        raise ValueError(f"symbol dimension {symbol.n} != grid dimension {grid.n}")
    coeffs = forward_transform(f, N, grid)
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    pts = np.atleast_2d(x)
    indices = multi_indices(grid.n, N)
    Phi = hermite_basis(indices, pts)  # (K, M)
    out = np.zeros(pts.shape[0])
    for a, nu in enumerate(indices):
        out += coeffs.values[a] * symbol.evaluate(pts, nu) * Phi[a]
    return float(out[0]) if single else out


@dataclass(frozen=True)
class KernelMatrix:
    """K[i, j] = K_m(x_i, x_j) over the tensor nodes of a grid."""

    grid: QuadratureGrid
    N: int
    entries: np.ndarray
    symbol_kind: str
    symbol_provenance: dict

    def __post_init__(self):
        if self.entries.shape != (self.grid.size, self.grid.size):
            raise ValueError("kernel entries must be square over the grid nodes")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("kernel entries must be finite")

    def apply_to_samples(self, fvals: np.ndarray) -> np.ndarray:
        """Quadrature application integral K(x, y) f(y) dy at every node."""
        fvals = np.asarray(fvals, dtype=float).reshape(self.grid.size)
        return self.entries @ (self.grid.scaled_weights * fvals)

    def apply_to(self, f) -> np.ndarray:
        return self.apply_to_samples(sample(self.grid, f))

    def diagonal(self) -> np.ndarray:
        return np.diag(self.entries).copy()

    def to_csv(self, path) -> None:
        """Rows i,j,x_i...,x_j...,value for every node pair."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            coords = [f"xi{j + 1}" for j in range(self.grid.n)]
            coords += [f"yj{j + 1}" for j in range(self.grid.n)]
            writer.writerow(["i", "j"] + coords + ["value"])
            pts = self.grid.points
            for i in range(self.grid.size):
                for j in range(self.grid.size):
                    writer.writerow(
                        [i, j] + pts[i].tolist() + pts[j].tolist()
                        + [repr(float(self.entries[i, j]))]
                    )


def assemble_kernel(symbol: Symbol, N: int, grid: QuadratureGrid) -> KernelMatrix:
    """Dense K[i, j] = sum_{|nu|<=N} m(x_i, nu) phi_nu(x_i) phi_nu(x_j)."""
    if symbol.n != grid.n:
        raise ValueError(f"symbol dimension {symbol.n} != grid dimension {grid.n}")
    _, Phi, A = _symbol_basis_product(symbol, N, grid)
    entries = A.T @ Phi
    return KernelMatrix(grid=grid, N=N, entries=entries,
                        symbol_kind=symbol.kind, symbol_provenance=symbol.provenance())


def coefficient_matrix(symbol: Symbol, N: int, grid: QuadratureGrid) -> np.ndarray:
    """Galerkin matrix A[mu, nu] = <T_m phi_nu, phi_mu> over |mu|,|nu| <= N.

    Row/column order is the canonical enumeration (multi_indices).  For
    multiplier symbols the matrix is diagonal with entries m(nu).
    """
    if symbol.n != grid.n:
        raise ValueError(f"symbol dimension {symbol.n} != grid dimension {grid.n}")
    _, Phi, A = _symbol_basis_product(symbol, N, grid)
    # <m(.,nu) phi_nu, phi_mu> by shared quadrature
    return (Phi * grid.scaled_weights) @ A.T

"""Hermite functions, oscillator eigenvalues, and Gauss-Hermite quadrature.

The 1D Hermite functions are the orthonormal oscillator eigenstates

    phi_k(x) = (2^k k! sqrt(pi))^{-1/2} H_k(x) exp(-x^2/2),

evaluated here by the normalized three-term recurrence

    phi_{k+1}(x) = x sqrt(2/(k+1)) phi_k(x) - sqrt(k/(k+1)) phi_{k-1}(x),

which never forms H_k or k! and therefore does not overflow for large k.
Multi-dimensional functions are products over axes, indexed by tuples of
non-negative integers ("multi-indices") enumerated in graded lexicographic
order: ascending total degree, ties broken by ascending tuple comparison.

Quadrature is Gauss-Hermite with respect to exp(-|x|^2).  Plain integrals
of rapidly decaying functions are computed as

    integral f(x) dx  ~=  sum_i w_i exp(+|x_i|^2) f(x_i),

and the re-weighted coefficients w_i exp(x_i^2) are produced directly from
the stable identity w_i exp(x_i^2) = 1 / (Q phi_{Q-1}(x_i)^2); forming
exp(+x^2) explicitly would overflow long before the supported Q = 512.

Everything in this module is a pure function of immutable inputs; grids are
safe to share between threads after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations_with_replacement
from math import comb

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import EvaluationError

MAX_QUADRATURE_POINTS = 512

MultiIndex = tuple[int, ...]


def validate_multi_index(nu) -> MultiIndex:
    """Coerce to a tuple of non-negative ints; raise ValueError otherwise."""
    try:
        out = tuple(int(v) for v in nu)
    except TypeError:
        raise ValueError(f"multi-index must be a sequence of integers, got {nu!r}")
    if len(out) == 0 or any(v < 0 for v in out) or any(v != w for v, w in zip(out, nu)):
        raise ValueError(f"multi-index entries must be non-negative integers, got {nu!r}")
    return out


def degree(nu) -> int:
    return int(sum(nu))


def eigenvalue(nu) -> float:
    """Oscillator eigenvalue of phi_nu: lambda_nu = 2|nu| + n."""
    nu = validate_multi_index(nu)
    return float(2 * degree(nu) + len(nu))


def multi_indices(n: int, N: int) -> list[MultiIndex]:
    """All multi-indices with |nu| <= N in graded lexicographic order.

    Returns exactly C(N+n, n) distinct tuples; the order is the canonical
    enumeration used for coefficient vectors and Galerkin matrices.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if N < 0:
        raise ValueError(f"degree cutoff must be >= 0, got {N}")
    out: list[MultiIndex] = []
    for d in range(N + 1):
        shell = []
        # compositions of d into n parts, via bars-and-stars
        for bars in combinations_with_replacement(range(n), d):
            idx = [0] * n
            for b in bars:
                idx[b] += 1
            shell.append(tuple(idx))
        out.extend(sorted(shell))
    assert len(out) == comb(N + n, n)
    return out


def hermite_basis_1d(max_order: int, x) -> np.ndarray:
    """Table T[k, i] = phi_k(x_i) for k = 0..max_order, by the recurrence."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("evaluation points must be finite")
    flat = np.atleast_1d(x).ravel()
    T = np.empty((max_order + 1, flat.size))
    T[0] = np.pi ** -0.25 * np.exp(-0.5 * flat**2)
    if max_order >= 1:
        T[1] = np.sqrt(2.0) * flat * T[0]
    for k in range(1, max_order):
        T[k + 1] = flat * np.sqrt(2.0 / (k + 1)) * T[k] - np.sqrt(k / (k + 1.0)) * T[k - 1]
    return T


def hermite_function_1d(order: int, x):
    """phi_order(x) for scalar or array x.  |result| <= ~1.087 always."""
    if order != int(order) or order < 0:
        raise ValueError(f"order must be a non-negative integer, got {order}")
    x = np.asarray(x, dtype=float)
    vals = hermite_basis_1d(int(order), x)[int(order)]
    return float(vals[0]) if x.ndim == 0 else vals.reshape(x.shape)


def hermite_function_nd(nu, x):
    """phi_nu(x) = prod_j phi_{nu_j}(x_j) at a point x in R^n (or rows of points)."""
    nu = validate_multi_index(nu)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != len(nu):
        raise ValueError(f"point dimension {x.shape[1]} != multi-index dimension {len(nu)}")
    out = np.ones(x.shape[0])
    for j, k in enumerate(nu):
        out *= hermite_function_1d(k, x[:, j])
    return float(out[0]) if out.size == 1 else out


def hermite_basis(indices, points: np.ndarray) -> np.ndarray:
    """Matrix Phi[a, i] = phi_{indices[a]}(points[i]) for points of shape (M, n).

    Uses one 1D recurrence table per axis, so the cost is O(n Q max|nu|)
    plus the O(K M) assembly of products.
    """
    indices = [validate_multi_index(nu) for nu in indices]
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[1]
    if any(len(nu) != n for nu in indices):
        raise ValueError("all multi-indices must match the point dimension")
    if not indices:
        return np.zeros((0, points.shape[0]))
    max_order = max(max(nu) for nu in indices)
    tables = [hermite_basis_1d(max_order, points[:, j]) for j in range(n)]
    nu_arr = np.array(indices)  # (K, n)
    Phi = tables[0][nu_arr[:, 0]]
    for j in range(1, n):
        Phi = Phi * tables[j][nu_arr[:, j]]
    return Phi


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensorized Gauss-Hermite rule on R^n.

    ``axis_nodes``/``axis_weights`` are the 1D rule shared by every axis;
    weights integrate against exp(-x^2) per axis (``weight_convention``).
    ``axis_scaled_weights`` holds w_i exp(x_i^2), the coefficients actually
    used for plain integrals, computed stably (see module docstring).  At
    very large Q the raw weights at extreme nodes fall below the smallest
    positive double and round to zero; the scaled weights never do.
    """

    n: int
    q: int
    axis_nodes: np.ndarray
    axis_weights: np.ndarray
    axis_scaled_weights: np.ndarray
    weight_convention: str = "exp(-x^2)"

    @property
    def size(self) -> int:
        return self.q**self.n

    @cached_property
    def points(self) -> np.ndarray:
        """All tensor nodes, shape (q^n, n), C-order over axes."""
        axes = np.meshgrid(*([self.axis_nodes] * self.n), indexing="ij")
        return np.stack(axes, axis=-1).reshape(-1, self.n)

    @cached_property
    def scaled_weights(self) -> np.ndarray:
        """Tensorized w_i exp(|x_i|^2), aligned with ``points``."""
        W = self.axis_scaled_weights
        out = W
        for _ in range(self.n - 1):
            out = np.multiply.outer(out, W)
        return out.reshape(-1)

    def tensor(self, n: int) -> "QuadratureGrid":
        """Same 1D rule tensorized over ``n`` axes."""
        if n < 1:
            raise ValueError(f"dimension must be >= 1, got {n}")
        return QuadratureGrid(
            n=n,
            q=self.q,
            axis_nodes=self.axis_nodes,
            axis_weights=self.axis_weights,
            axis_scaled_weights=self.axis_scaled_weights,
        )

    def same_rule(self, other: "QuadratureGrid") -> bool:
        return (
            self.n == other.n
            and self.q == other.q
            and np.array_equal(self.axis_nodes, other.axis_nodes)
        )

    def to_csv(self, path) -> None:
        """One "node,weight" row per 1D abscissa (debugging format)."""
        arr = np.column_stack([self.axis_nodes, self.axis_weights])
        np.savetxt(path, arr, delimiter=",", header="node,weight", comments="")


def gauss_hermite_rule(Q: int, n: int = 1) -> QuadratureGrid:
    """Q-point Gauss-Hermite rule (Golub-Welsch), tensorized over n axes.

    Nodes are the roots of H_Q, obtained as eigenvalues of the symmetric
    tridiagonal Jacobi matrix with off-diagonals sqrt(k/2); the rule
    integrates p(x) exp(-x^2) exactly for polynomial degree <= 2Q-1.
    """
    if Q != int(Q) or not 1 <= Q <= MAX_QUADRATURE_POINTS:
        raise ValueError(f"Q must be an integer in [1, {MAX_QUADRATURE_POINTS}], got {Q}")
    Q = int(Q)
    if Q == 1:
        nodes = np.zeros(1)
    else:
        off = np.sqrt(np.arange(1, Q) / 2.0)
        nodes, _ = eigh_tridiagonal(np.zeros(Q), off)
        nodes = 0.5 * (nodes - nodes[::-1])  # enforce symmetry about 0
        if Q % 2 == 1:
            nodes[Q // 2] = 0.0
    # w_i e^{x_i^2} = 1 / (Q phi_{Q-1}(x_i)^2): stable at every node
    phi_last = hermite_basis_1d(Q - 1, nodes)[Q - 1]
    scaled = 1.0 / (Q * phi_last**2)
    scaled = 0.5 * (scaled + scaled[::-1])
    weights = scaled * np.exp(-(nodes**2))
    return QuadratureGrid(
        n=1, q=Q, axis_nodes=nodes, axis_weights=weights, axis_scaled_weights=scaled
    ).tensor(n)


def sample(grid: QuadratureGrid, f) -> np.ndarray:
    """Evaluate f on all grid points; f takes an (M, n) array, returns (M,)."""
    vals = np.asarray(f(grid.points), dtype=float)
    if vals.shape != (grid.size,):
        vals = vals.reshape(grid.size)  # allow (M,1) etc.
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.argmax(bad))
        raise EvaluationError(
            f"integrand is not finite at node {i} = {grid.points[i].tolist()}"
        )
    return vals


def integrate_samples(grid: QuadratureGrid, values) -> float:
    """Plain integral over R^n of a function sampled on grid.points."""
    values = np.asarray(values, dtype=float).reshape(grid.size)
    return float(np.dot(grid.scaled_weights, values))


def integrate(grid: QuadratureGrid, f) -> float:
    """Integral of f over R^n: sum_i W_i exp(+|x_i|^2) f(x_i).

    Exact (to rounding) when f(x) = p(x) exp(-|x|^2) with per-axis
    polynomial degree <= 2Q-1; accurate for integrands with Gaussian-type
    decay.  Non-finite values raise EvaluationError naming the node.
    """
    return integrate_samples(grid, sample(grid, f))

"""Fourier-Hermite analysis and synthesis on the truncated basis.

The forward transform maps a function to its coefficients <f, phi_nu> for
every |nu| <= N; the inverse transform evaluates the truncated expansion
sum c_nu phi_nu(x).  Coefficients are stored densely over the simplex
|nu| <= N in the canonical graded-lexicographic enumeration, so vectors
round-trip bit-for-bit.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .hermite import (
    MultiIndex,
    QuadratureGrid,
    hermite_basis,
    integrate_samples,
    multi_indices,
    sample,
    validate_multi_index,
)


@dataclass(frozen=True)
class CoefficientVector:
    """Coefficients f_hat(phi_nu) for all |nu| <= N, in enumeration order."""

    n: int
    N: int
    values: np.ndarray
    indices: tuple[MultiIndex, ...] = field(default=())

    def __post_init__(self):
        idx = tuple(multi_indices(self.n, self.N))
        object.__setattr__(self, "indices", idx)
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(idx),):
            raise ValueError(
                f"expected {len(idx)} coefficients for n={self.n}, N={self.N}, "
                f"got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, nu) -> float:
        nu = validate_multi_index(nu)
        try:
            return float(self.values[self.indices.index(nu)])
        except ValueError:
            raise KeyError(f"{nu} outside the simplex |nu| <= {self.N}")

    def as_dict(self) -> dict[MultiIndex, float]:
        return {nu: float(v) for nu, v in zip(self.indices, self.values)}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"nu{j + 1}" for j in range(self.n)] + ["value"])
            for nu, v in zip(self.indices, self.values):
                writer.writerow(list(nu) + [repr(float(v))])

    @classmethod
    def from_csv(cls, path) -> "CoefficientVector":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, rows = rows[0], rows[1:]
        n = len(header) - 1
        table = {tuple(int(c) for c in row[:n]): float(row[n]) for row in rows}
        N = max(sum(nu) for nu in table)
        idx = multi_indices(n, N)
        if set(table) != set(idx):
            raise ValueError(f"{path}: rows do not cover the simplex |nu| <= {N} exactly")
        return cls(n=n, N=N, values=np.array([table[nu] for nu in idx]))


def forward_transform(f, N: int, grid: QuadratureGrid) -> CoefficientVector:
    """Coefficients integrate(f * phi_nu) for every |nu| <= N.

    f is evaluated once on the grid; Q >= N+1 makes the projection exact on
    the truncated span (a warning is issued otherwise).
    """
    if grid.q < N + 1:
        warnings.warn(
            f"Q = {grid.q} < N+1 = {N + 1}: quadrature is not exact on the "
            "truncated span",
            stacklevel=2,
        )
    fvals = sample(grid, f)
    Phi = hermite_basis(multi_indices(grid.n, N), grid.points)
    coeffs = Phi @ (grid.scaled_weights * fvals)
    return CoefficientVector(n=grid.n, N=N, values=coeffs)


def inverse_transform(c: CoefficientVector, x):
    """Truncated inversion sum_{|nu|<=N} c[nu] phi_nu(x) at point(s) x."""
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != c.n:
        raise ValueError(f"point dimension {pts.shape[1]} != coefficient dimension {c.n}")
    Phi = hermite_basis(c.indices, pts)
    out = c.values @ Phi
    return float(out[0]) if single else out


def as_function(c: CoefficientVector):
    """The expansion as a plain callable on (M, n) point arrays."""
    return lambda pts: np.atleast_1d(inverse_transform(c, pts))


def norm_squared(grid: QuadratureGrid, f) -> float:
    """integrate(f^2), the squared L2 norm under the shared quadrature."""
    vals = sample(grid, f)
    return integrate_samples(grid, vals * vals)

"""Symbols m(x, nu) and the built-in families.

A Symbol packages the evaluator for m together with its provenance
(family id + parameters), the dimension, and whether it actually depends
on x.  Multiplier symbols are constant in x and expose ``value(nu)``.

Built-in families:

    heat(t)     m(nu) = exp(-t * lambda_nu)
    power(a)    m(nu) = (1 + |nu|)^(-a)
    delta(nu0)  m(nu) = 1 if nu == nu0 else 0
    table       finitely many (nu, value) rows from CSV; 0 elsewhere
    expr        expression string over x1..xn, nu1..nun, |nu|, lambda

Evaluators must be pure and safe for concurrent calls; every built-in is.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import EvaluationError
from .expressions import parse_symbol_expression
from .hermite import MultiIndex, eigenvalue, validate_multi_index


@dataclass(frozen=True)
class Symbol:
    """The defining function of a pseudo-multiplier, with provenance."""

    n: int
    kind: str  # "multiplier" | "pseudo"
    evaluator: Callable  # (points (M, n) | None, nu) -> (M,) array | float
    family_id: str
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("multiplier", "pseudo"):
            raise ValueError(f"kind must be 'multiplier' or 'pseudo', got {self.kind!r}")

    def value(self, nu) -> float:
        """m(nu) for multiplier symbols (x-independent)."""
        if self.kind != "multiplier":
            raise ValueError("value(nu) is only defined for multiplier symbols")
        nu = validate_multi_index(nu)
        v = float(self.evaluator(None, nu))
        if not np.isfinite(v):
            raise EvaluationError(f"symbol {self.family_id} is not finite at nu={nu}")
        return v

    def evaluate(self, points, nu) -> np.ndarray:
        """m(x_i, nu) over the rows of points (M, n); finite or raises."""
        nu = validate_multi_index(nu)
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.n:
            raise ValueError(f"point dimension {points.shape[1]} != symbol dimension {self.n}")
        vals = self.evaluator(points, nu)
        vals = np.broadcast_to(np.asarray(vals, dtype=float), (points.shape[0],))
        if not np.all(np.isfinite(vals)):
            raise EvaluationError(f"symbol {self.family_id} is not finite at nu={nu}")
        return np.array(vals)

    def provenance(self) -> dict:
        return {"family": self.family_id, "parameters": dict(self.parameters), "kind": self.kind}


def multiplier(n: int, fn: Callable[[MultiIndex], float], family_id: str, parameters=None) -> Symbol:
    """Wrap a plain nu -> value function as a multiplier Symbol."""
    def evaluator(points, nu):
        v = float(fn(tuple(nu)))
        return v if points is None else np.full(points.shape[0], v)
    return Symbol(n=n, kind="multiplier", evaluator=evaluator,
                  family_id=family_id, parameters=dict(parameters or {}))


def heat_symbol(t: float, n: int = 1) -> Symbol:
    if not t > 0:
        raise ValueError(f"heat time must be positive, got {t}")
    return multiplier(n, lambda nu: np.exp(-t * eigenvalue(nu)), "heat", {"t": float(t)})


def power_symbol(a: float, n: int = 1) -> Symbol:
    return multiplier(n, lambda nu: (1.0 + sum(nu)) ** (-a), "power", {"a": float(a)})


def delta_symbol(nu0, n: int | None = None) -> Symbol:
    nu0 = validate_multi_index(nu0)
    n = len(nu0) if n is None else n
    if n != len(nu0):
        raise ValueError(f"delta index {nu0} does not match dimension {n}")
    return multiplier(n, lambda nu: 1.0 if tuple(nu) == nu0 else 0.0,
                      "delta", {"nu0": list(nu0)})


def expression_symbol(text: str, n: int) -> Symbol:
    """Symbol from an expression string; pseudo iff some x_j occurs."""
    evaluator, uses_x = parse_symbol_expression(text, n)
    return Symbol(n=n, kind="pseudo" if uses_x else "multiplier",
                  evaluator=evaluator, family_id="expr", parameters={"text": text})


def table_symbol(rows: dict[MultiIndex, float], n: int, source: str = "<memory>") -> Symbol:
    """Finitely-supported multiplier from explicit (nu, value) entries."""
    table = {validate_multi_index(nu): float(v) for nu, v in rows.items()}
    if any(len(nu) != n for nu in table):
        raise ValueError("table indices must all have the declared dimension")
    return multiplier(n, lambda nu: table.get(tuple(nu), 0.0),
                      "table", {"path": source, "support": len(table)})


def load_multiplier_table(path) -> Symbol:
    """Multiplier table from CSV with header nu1,..,nun,value."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    header, rows = rows[0], rows[1:]
    if header[-1].strip() != "value" or not all(h.strip().startswith("nu") for h in header[:-1]):
        raise ValueError(f"{path}: expected header nu1,..,nun,value, got {header}")
    n = len(header) - 1
    table = {tuple(int(c) for c in row[:n]): float(row[n]) for row in rows}
    return table_symbol(table, n, source=str(path))


def save_multiplier_table(symbol_values: dict[MultiIndex, float], n: int, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"nu{j + 1}" for j in range(n)] + ["value"])
        for nu in sorted(symbol_values):
            writer.writerow(list(nu) + [repr(float(symbol_values[nu]))])


def load_pseudo_table(path, grid) -> Symbol:
    """Pseudo-multiplier table bound to a grid.

    Format: a "# n=<n> Q=<Q>" header line declaring the tensor grid, then
    CSV rows x_index,nu1,..,nun,value where x_index enumerates grid.points.
    Indices absent from the table evaluate to 0.
    """
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        body = list(csv.reader(fh))
    meta = dict(part.split("=") for part in first.lstrip("# ").split())
    n, Q = int(meta["n"]), int(meta["Q"])
    if n != grid.n or Q != grid.q:
        raise ValueError(f"{path}: table grid n={n}, Q={Q} does not match n={grid.n}, Q={grid.q}")
    header, rows = body[0], body[1:]
    if header[0].strip() != "x_index":
        raise ValueError(f"{path}: expected x_index,nu1,..,nun,value header")
    table: dict[MultiIndex, np.ndarray] = {}
    for row in rows:
        nu = tuple(int(c) for c in row[1 : n + 1])
        col = table.setdefault(nu, np.zeros(grid.size))
        col[int(row[0])] = float(row[n + 1])

    def evaluator(points, nu):
        col = table.get(tuple(nu))
        if col is None:
            return np.zeros(points.shape[0])
        if points.shape[0] != grid.size:
            raise ValueError("pseudo table symbols can only be evaluated on their own grid")
        return col

    return Symbol(n=n, kind="pseudo", evaluator=evaluator,
                  family_id="table", parameters={"path": str(path), "pseudo": True})


def symbol_from_spec(spec: str, n: int, grid=None) -> Symbol:
    """Build a Symbol from a CLI-style spec string.

    Forms: "heat:t=1", "power:a=2", "delta:0,0", "table:path=sym.csv",
    "expr:<expression>" (everything after the first colon is the text).
    """
    family, _, rest = spec.partition(":")
    family = family.strip()
    if family == "expr":
        if not rest:
            raise ValueError("expr symbol requires an expression after the colon")
        return expression_symbol(rest, n)
    if family == "heat":
        return heat_symbol(t=_param_dict(rest, {"t"})["t"], n=n)
    if family == "power":
        return power_symbol(a=_param_dict(rest, {"a"})["a"], n=n)
    if family == "delta":
        entries = [s for s in rest.replace(" ", "").split(",") if s]
        if len(entries) == 1 and n > 1:
            entries = entries * n
        return delta_symbol(tuple(int(e) for e in entries), n=n)
    if family == "table":
        path = rest.partition("=")[2] if "=" in rest else rest
        with open(path) as fh:
            first = fh.readline()
        if first.lstrip().startswith("#"):
            if grid is None:
                raise ValueError("pseudo table symbols require a grid")
            return load_pseudo_table(path, grid)
        return load_multiplier_table(path)
    raise ValueError(f"unknown symbol family {family!r} in {spec!r}")


def _param_dict(text: str, expected: set[str]) -> dict[str, float]:
    out = {}
    for part in text.split(","):
        key, _, val = part.partition("=")
        key = key.strip()
        if key not in expected:
            raise ValueError(f"unknown parameter {key!r}; expected {sorted(expected)}")
        out[key] = float(val)
    missing = expected - set(out)
    if missing:
        raise ValueError(f"missing parameters {sorted(missing)}")
    return out

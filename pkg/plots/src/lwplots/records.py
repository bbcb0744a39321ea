"""Reading and validating the loss-table CSVs produced by the harness.

This package never recomputes losses; everything plotted is arithmetic on
the mean_loss / std_err columns of the input file.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

REQUIRED_COLUMNS = (
    "estimator",
    "p",
    "n",
    "mean_loss",
    "std_err",
)

BOUND_ESTIMATOR = "LW_op"


class TableError(Exception):
    """Malformed or incomplete loss table."""


@dataclass(frozen=True)
class LossRow:
    estimator: str
    p: int
    n: int
    mean_loss: float
    std_err: float


@dataclass(frozen=True)
class LossTable:
    rows: tuple[LossRow, ...]

    @property
    def estimators(self) -> tuple[str, ...]:
        seen = []
        for row in self.rows:
            if row.estimator not in seen:
                seen.append(row.estimator)
        return tuple(seen)

    @property
    def has_bound(self) -> bool:
        return BOUND_ESTIMATOR in self.estimators

    def cells(self, estimator: str) -> dict[tuple[int, int], LossRow]:
        return {(r.p, r.n): r for r in self.rows if r.estimator == estimator}

    def relative_loss(self, estimator: str) -> dict[tuple[int, int], float]:
        """Mean loss minus the cell's LW_op mean loss (raw loss without LW_op)."""
        own = self.cells(estimator)
        if not self.has_bound or estimator == BOUND_ESTIMATOR:
            return {cell: r.mean_loss for cell, r in own.items()}
        bound = self.cells(BOUND_ESTIMATOR)
        missing = sorted(set(own) - set(bound))
        if missing:
            raise TableError(f"no {BOUND_ESTIMATOR} rows for cells {missing}")
        return {cell: r.mean_loss - bound[cell].mean_loss for cell, r in own.items()}


def read_loss_table(path: str) -> LossTable:
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise TableError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in REQUIRED_COLUMNS:
            if column not in header:
                raise TableError(f"{path}: missing column {column!r}")
        rows = []
        for i, raw in enumerate(reader, start=2):
            try:
                rows.append(
                    LossRow(
                        raw["estimator"],
                        int(raw["p"]),
                        int(raw["n"]),
                        float(raw["mean_loss"]),
                        float(raw["std_err"]),
                    )
                )
            except (TypeError, KeyError, ValueError) as exc:
                raise TableError(f"{path}: bad row {i}: {exc}") from exc
    if not rows:
        raise TableError(f"{path}: no data rows")
    return LossTable(tuple(rows))


def require_estimators(table: LossTable, names) -> None:
    present = set(table.estimators)
    for name in names:
        if name not in present:
            raise TableError(f"estimator {name!r} not present in the table")


def full_grid_axes(cells_by_estimator) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Common (p, n) axes; raises listing any missing cell of the rectangle."""
    all_cells = set()
    for cells in cells_by_estimator.values():
        all_cells.update(cells)
    p_values = tuple(sorted({p for p, _ in all_cells}))
    n_values = tuple(sorted({n for _, n in all_cells}))
    wanted = {(p, n) for p in p_values for n in n_values}
    problems = []
    for name, cells in cells_by_estimator.items():
        missing = sorted(wanted - set(cells))
        if missing:
            problems.append(f"{name}: {missing}")
    if problems:
        raise TableError("incomplete (p, n) grid, missing cells -- " + "; ".join(problems))
    return p_values, n_values

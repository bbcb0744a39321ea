"""The two figure styles: loss-difference surfaces and convergence curves.

Both functions are pure consumers of a loss table: the same CSV always
produces the same plotted arrays.  Rendering is done on the Agg backend with
a fixed figure size.  Saved images come in PNG and SVG, and every figure
writes a JSON sidecar listing the cells it had to mask (logarithms of
non-positive relative losses).
"""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .records import (
    BOUND_ESTIMATOR,
    LossTable,
    TableError,
    full_grid_axes,
    read_loss_table,
    require_estimators,
)

FIGSIZE = (8.0, 6.0)
DPI = 120


@dataclass(frozen=True)
class FigureSpec:
    """One figure request.

    kind "surface_diff" needs `pair` (A, B); kind "convergence_curves"
    takes `estimators` (defaults to every non-bound estimator in the CSV).
    """

    input_csv: str
    kind: str
    out_path: str
    pair: tuple[str, str] | None = None
    estimators: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("surface_diff", "convergence_curves"):
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if self.kind == "surface_diff" and self.pair is None:
            raise ValueError("surface_diff needs an estimator pair")


@dataclass(frozen=True)
class MaskedCell:
    estimator: str
    p: int
    n: int
    relative_loss: float


@dataclass(frozen=True)
class SurfaceData:
    """What the surface figure actually shows."""

    estimator_a: str
    estimator_b: str
    p_values: tuple[int, ...]
    n_values: tuple[int, ...]
    z: np.ndarray  # shape (len(n_values), len(p_values)), NaN where masked
    masked: tuple[MaskedCell, ...]
    relative_to_bound: bool


@dataclass(frozen=True)
class Curve:
    estimator: str
    n_values: tuple[int, ...]
    excess: tuple[float, ...]
    band: tuple[float, ...]  # 2 standard errors


@dataclass(frozen=True)
class CurveData:
    curves: tuple[Curve, ...]
    masked: tuple[MaskedCell, ...]
    relative_to_bound: bool


def _output_paths(out_path: str) -> tuple[str, str, str]:
    stem, _ = os.path.splitext(out_path)
    return f"{stem}.png", f"{stem}.svg", f"{stem}_masked.json"


def _write_masked_report(path: str, masked) -> None:
    body = [
        {"estimator": m.estimator, "p": m.p, "n": m.n, "relative_loss": m.relative_loss}
        for m in masked
    ]
    with open(path, "w") as fh:
        json.dump({"masked_cells": body, "count": len(body)}, fh, indent=2)
        fh.write("\n")


def _save(fig, out_path: str, masked) -> tuple[str, str, str]:
    png, svg, report = _output_paths(out_path)
    fig.savefig(png, dpi=DPI)
    fig.savefig(svg)
    plt.close(fig)
    _write_masked_report(report, masked)
    return png, svg, report


def surface_diff_data(table: LossTable, pair: tuple[str, str]) -> SurfaceData:
    """log10 relative-loss difference of the pair over the full (p, n) grid."""
    a, b = pair
    require_estimators(table, [a, b])
    cells = {name: table.cells(name) for name in {a, b}}
    if table.has_bound:
        cells[BOUND_ESTIMATOR] = table.cells(BOUND_ESTIMATOR)
    p_values, n_values = full_grid_axes(cells)

    rel_a = table.relative_loss(a)
    rel_b = table.relative_loss(b)
    z = np.full((len(n_values), len(p_values)), np.nan)
    masked = []
    for j, n in enumerate(n_values):
        for i, p in enumerate(p_values):
            ra, rb = rel_a[(p, n)], rel_b[(p, n)]
            bad = [(a, ra)] if ra <= 0 else []
            if rb <= 0:
                bad.append((b, rb))
            if bad:
                masked.extend(MaskedCell(e, p, n, v) for e, v in bad)
                continue
            z[j, i] = np.log10(ra) - np.log10(rb)
    return SurfaceData(a, b, p_values, n_values, z, tuple(masked), table.has_bound)


def plot_surface_diff(spec: FigureSpec) -> tuple[SurfaceData, tuple[str, str, str]]:
    """Render the surface with its black level-0 iso-line; returns data + paths."""
    table = read_loss_table(spec.input_csv)
    data = surface_diff_data(table, spec.pair)
    a, b = spec.pair
    if a == b:
        warnings.warn("surface of an estimator against itself is identically zero")

    fig, ax = plt.subplots(figsize=FIGSIZE)
    pg, ng = np.meshgrid(data.p_values, data.n_values)
    mesh = ax.pcolormesh(pg, ng, data.z, shading="nearest", cmap="RdBu_r")
    fig.colorbar(mesh, ax=ax, label=f"log10 loss({a}) - log10 loss({b})")
    finite = np.isfinite(data.z)
    if finite.any() and len(data.n_values) > 1 and len(data.p_values) > 1:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # all-positive surfaces have no 0-line
            ax.contour(pg, ng, data.z, levels=[0.0], colors="black", linewidths=1.5)
    suffix = " (relative to LW_op)" if data.relative_to_bound else ""
    ax.set_xlabel("dimension p")
    ax.set_ylabel("samples n")
    ax.set_title(f"{a} vs {b}{suffix}")
    return data, _save(fig, spec.out_path, data.masked)


def convergence_data(table: LossTable, estimators=None) -> CurveData:
    """Per-estimator excess mean loss over LW_op, against n, with 2 SE bands."""
    names = tuple(estimators) if estimators else tuple(
        e for e in table.estimators if e != BOUND_ESTIMATOR
    )
    require_estimators(table, names)
    curves = []
    masked = []
    for name in names:
        rel = table.relative_loss(name)
        se = {cell: r.std_err for cell, r in table.cells(name).items()}
        points = sorted(rel, key=lambda cell: cell[1])
        ns, excess, band = [], [], []
        for cell in points:
            value = rel[cell]
            if value <= 0:
                masked.append(MaskedCell(name, cell[0], cell[1], value))
                continue
            ns.append(cell[1])
            excess.append(value)
            band.append(2.0 * se[cell])
        curves.append(Curve(name, tuple(ns), tuple(excess), tuple(band)))
    return CurveData(tuple(curves), tuple(masked), table.has_bound)


def plot_convergence(spec: FigureSpec) -> tuple[CurveData, tuple[str, str, str]]:
    """Render log-log excess-loss curves with error bands; returns data + paths."""
    table = read_loss_table(spec.input_csv)
    data = convergence_data(table, spec.estimators)

    fig, ax = plt.subplots(figsize=FIGSIZE)
    for curve in data.curves:
        if not curve.n_values:
            continue
        n = np.array(curve.n_values, dtype=float)
        y = np.array(curve.excess)
        half = np.array(curve.band)
        ax.errorbar(n, y, yerr=half, marker="o", capsize=3, label=curve.estimator)
        lower = np.maximum(y - half, np.finfo(float).tiny)
        ax.fill_between(n, lower, y + half, alpha=0.15)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("samples n")
    ylabel = "mean loss - LW_op mean loss" if data.relative_to_bound else "mean loss"
    ax.set_ylabel(ylabel)
    ax.legend()
    return data, _save(fig, spec.out_path, data.masked)


def render(spec: FigureSpec):
    if spec.kind == "surface_diff":
        return plot_surface_diff(spec)
    return plot_convergence(spec)

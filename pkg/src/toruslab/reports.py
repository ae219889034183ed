"""Deterministic JSON and CSV emission for every report type.

Floats are rendered with %.17g everywhere, which round-trips IEEE doubles
exactly and makes repeated runs byte-identical; the stdlib json module is
only borrowed for string escaping.  No timestamps, hostnames or other
run-varying values ever enter a report.
"""
from __future__ import annotations

import json

import numpy as np

from .coherence import CenterCurve, CircleRestrictionReport, GrowthReport
from .cones import CenterField, PHReport
from .semiconjugacy import SemiconjugacyResult

SCHEMA_VERSION = "1"


def format_float(x: float) -> str:
    if x != x:
        return "NaN"
    if x in (float("inf"), float("-inf")):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def dumps(obj, indent: int = 0) -> str:
    """Serialize to JSON with %.17g floats; dict order is preserved."""
    pad = " " * indent
    inner = " " * (indent + 2)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [dumps(v, indent + 2) for v in obj]
        return "[\n" + ",\n".join(inner + s for s in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k))}: {dumps(v, indent + 2)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(inner + s for s in items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, payload: dict) -> None:
    body = dict(payload)
    body.setdefault("schema_version", SCHEMA_VERSION)
    ordered = {"schema_version": body.pop("schema_version")}
    ordered.update(body)
    with open(path, "w") as fh:
        fh.write(dumps(ordered) + "\n")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    return str(v)


def write_csv(path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(v) for v in row) + "\n")


def ph_report_to_dict(rep: PHReport) -> dict:
    return {
        "classification": rep.classification,
        "invariant": rep.invariant,
        "margin": rep.margin,
        "worst_point": list(rep.worst_point),
        "lambda_abs": rep.lambda_abs,
        "mu_abs": rep.mu_abs,
        "delta_abs": rep.delta_abs,
        "delta_pointwise": rep.delta_pointwise,
        "expansion_max": rep.expansion_max,
        "jacobian_osc": rep.jacobian_osc,
        "margin_warning": rep.margin_warning,
        "grid_n": rep.grid_n,
        "depth": rep.depth,
    }


def _grid_rows(grid_n: int, *grids):
    t = (np.arange(grid_n) + 0.5) / grid_n
    for j in range(grid_n):
        for i in range(grid_n):
            yield (t[i], t[j]) + tuple(float(g[j, i]) for g in grids)


def write_ph_csv(path, rep: PHReport) -> None:
    write_csv(path, ["x", "y", "angle", "width", "lambda", "mu"],
              _grid_rows(rep.grid_n, rep.center.angles, rep.center.widths,
                         rep.lambda_grid, rep.mu_grid))


def write_center_csv(path, field: CenterField) -> None:
    write_csv(path, ["x", "y", "angle", "width"],
              _grid_rows(field.grid_n, field.angles, field.widths))


def semiconjugacy_to_dict(res: SemiconjugacyResult) -> dict:
    h, w = res.u.shape
    return {
        "ell": res.strip.ell,
        "residual": res.residual,
        "iterations": res.iterations,
        "contraction_estimate": res.contraction_estimate,
        "u_sup": res.u_sup,
        "tol": res.tol,
        "grid_shape": [h, w],
    }


def write_u_csv(path, res: SemiconjugacyResult) -> None:
    h, w = res.u.shape
    xs = np.arange(w) / w
    ys = np.arange(h) / (h - 1)
    rows = ((xs[i], ys[j], float(res.u.samples[j, i]))
            for j in range(h) for i in range(w))
    write_csv(path, ["x", "y", "u"], rows)


def circle_to_dict(curve: CenterCurve, rep: CircleRestrictionReport) -> dict:
    return {
        "homotopy_class": list(curve.homotopy_class),
        "length": curve.length,
        "start": [float(curve.points[0, 0]), float(curve.points[0, 1])],
        "period": rep.period,
        "degree": rep.degree,
        "arc_length": rep.arc_length,
        "jacobian_integral": rep.jacobian_integral,
        "max_jacobian": rep.max_jacobian,
        "invariance_hausdorff": rep.invariance_hausdorff,
    }


def circles_to_dict(found, seeds: int, period_max: int, invariance_tol: float) -> dict:
    return {
        "seeds": seeds,
        "period_max": period_max,
        "invariance_tol": invariance_tol,
        "count": len(found),
        "circles": [circle_to_dict(c, r) for c, r in found],
    }


def growth_to_dict(rep: GrowthReport) -> dict:
    out = {
        "n_max": int(rep.ns[-1]),
        "lengths": rep.lengths,
        "areas": rep.areas,
        "cells": rep.cells,
        "K_estimate": rep.K_estimate,
        "lambda_fit": rep.lambda_fit,
        "crossover_n": rep.crossover_n,
    }
    if rep.lower_bounds is not None:
        out["lower_bounds"] = rep.lower_bounds
        out["upper_bounds"] = rep.upper_bounds
        out["K"] = rep.K
        out["c"] = rep.c
        out["ell"] = rep.ell
        out["u_sup"] = rep.u_sup
        out["len_h"] = rep.len_h
        out["lambda_used"] = rep.lam
    return out


def write_growth_csv(path, rep: GrowthReport) -> None:
    lower = rep.lower_bounds if rep.lower_bounds is not None else [None] * len(rep.ns)
    upper = rep.upper_bounds if rep.upper_bounds is not None else [None] * len(rep.ns)
    rows = ((int(n), float(le), float(a), lo if lo is None else float(lo),
             up if up is None else float(up))
            for n, le, a, lo, up in zip(rep.ns, rep.lengths, rep.areas, lower, upper))
    write_csv(path, ["n", "length", "area", "lower_bound", "upper_bound"], rows)


def write_curve_csv(path, curve: CenterCurve) -> None:
    rows = ((float(p[0]), float(p[1])) for p in curve.points)
    write_csv(path, ["x", "y"], rows)

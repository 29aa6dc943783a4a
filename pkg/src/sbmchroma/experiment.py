"""Seeded Monte Carlo driver: sample graphs over a parameter grid, measure
chromatic numbers / weighted independence / edge counts, compare against the
closed-form predictions, and emit a CSV report plus a JSON summary.

Determinism contract: a config maps to byte-identical report and summary
files on every rerun.  Per-row seeds come from an injective mix of
(base_seed, grid point, replicate).  Wall-clock timings are real data but
not reproducible, so they go to a separate `.timing.csv` sidecar instead of
the report itself.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import chromatic as chrom
from .functionals import GuardError, w_star_solve
from .graphs import (BlowUpSpec, blow_up_as_model, sample_chung_lu, sample_sbm,
                     union_graphs, union_model)
from .model import BlockVector, ModelError, ModelInstance, ProbMatrix, q_star
from .predictions import (predict_chung_lu, predict_gnp, predict_percolation,
                          predict_two_block, sigma_estimate)
from .seeds import derive_seed, mix_seed

__all__ = ["ConfigError", "ExperimentConfig", "ReportRow", "run_experiment",
           "emit_plotdata", "REPORT_VERSION"]

REPORT_VERSION = "sbmchroma-report v1"

_CHI_METHODS = ("exact", "dsatur", "extraction")
_MEASURES = ("chi", "alpha_h", "edge_count")
_MODEL_KINDS = ("sbm", "gnp", "blowup-percolate", "chunglu-times",
                "chunglu-plus", "union-sbm")
DEFAULT_EXACT_GUARD = 70


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    model: dict
    replicates: int
    base_seed: int
    chi_methods: list[str] = field(default_factory=lambda: ["dsatur"])
    measures: list[str] = field(default_factory=lambda: ["chi"])
    sweep: list[dict] = field(default_factory=list)
    epsilon: float = 0.2
    exact_budget: int = chrom.DEFAULT_COLOURING_BUDGET
    exact_guard: int = DEFAULT_EXACT_GUARD
    alpha_h_mode: str = "heuristic"
    extraction_effort: int = 8
    workers: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            cfg = cls(
                model=dict(data["model"]),
                replicates=int(data["replicates"]),
                base_seed=int(data["base_seed"]),
                chi_methods=list(data.get("chi_methods", ["dsatur"])),
                measures=list(data.get("measures", ["chi"])),
                sweep=[dict(s) for s in data.get("sweep", [])],
                epsilon=float(data.get("epsilon", 0.2)),
                exact_budget=int(data.get("exact_budget",
                                          chrom.DEFAULT_COLOURING_BUDGET)),
                exact_guard=int(data.get("exact_guard", DEFAULT_EXACT_GUARD)),
                alpha_h_mode=str(data.get("alpha_h_mode", "heuristic")),
                extraction_effort=int(data.get("extraction_effort", 8)),
                workers=int(data.get("workers", 1)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed experiment config: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def validate(self) -> None:
        kind = self.model.get("kind")
        if kind not in _MODEL_KINDS:
            raise ConfigError(f"model kind must be one of {_MODEL_KINDS}, "
                              f"got {kind!r}")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if not self.measures:
            raise ConfigError("at least one measure is required")
        for meth in self.chi_methods:
            if meth not in _CHI_METHODS:
                raise ConfigError(f"unknown chi method {meth!r}")
        for meas in self.measures:
            if meas not in _MEASURES:
                raise ConfigError(f"unknown measure {meas!r}")
        if "chi" in self.measures and not self.chi_methods:
            raise ConfigError("measure 'chi' needs at least one chi method")
        for entry in self.sweep:
            if "param" not in entry or "values" not in entry or not entry["values"]:
                raise ConfigError("sweep entries need 'param' and nonempty 'values'")
        if self.alpha_h_mode not in ("heuristic", "exact"):
            raise ConfigError("alpha_h_mode must be 'heuristic' or 'exact'")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError("epsilon must lie in (0, 1)")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    # --- grid handling ------------------------------------------------------

    def grid_points(self) -> list[dict]:
        """Cartesian product of the sweep values, in config order."""
        points = [{}]
        for entry in self.sweep:
            points = [dict(pt, **{entry["param"]: v})
                      for pt in points for v in entry["values"]]
        return points

    def model_at(self, point: dict) -> dict:
        spec = json.loads(json.dumps(self.model))  # deep copy
        for name, value in point.items():
            _apply_param(spec, name, value)
        return spec

    def param_names(self) -> list[str]:
        return [entry["param"] for entry in self.sweep]


def _apply_param(spec: dict, name: str, value) -> None:
    kind = spec.get("kind")
    if name == "p12":
        if kind not in ("sbm",) or len(spec.get("P", [])) != 2:
            raise ConfigError("sweeping p12 needs a two-block sbm model")
        spec["P"][0][1] = spec["P"][1][0] = value
        return
    if name.startswith("P."):  # P.i.j entry of the probability matrix
        try:
            _, i, j = name.split(".")
            i, j = int(i), int(j)
            spec["P"][i][j] = spec["P"][j][i] = value
        except (KeyError, ValueError, IndexError) as exc:
            raise ConfigError(f"cannot sweep {name!r}: {exc}") from exc
        return
    spec[name] = value


# --- model realisation ------------------------------------------------------

def _instance_for(spec: dict) -> Optional[ModelInstance]:
    """Block-model instance for a model spec; None for per-vertex kinds."""
    kind = spec["kind"]
    if kind == "sbm":
        return ModelInstance(BlockVector.integral(spec["sizes"]),
                             ProbMatrix(spec["P"]),
                             sigma_hint=spec.get("sigma_hint"))
    if kind == "gnp":
        return ModelInstance.gnp(int(spec["n"]), float(spec["p"]))
    if kind == "blowup-percolate":
        bspec = BlowUpSpec.from_edges(int(spec["k"]), spec["h_edges"],
                                      spec["sizes"])
        return blow_up_as_model(bspec, float(spec["p"]))
    if kind == "union-sbm":
        m1 = _instance_for(spec["of"][0])
        m2 = _instance_for(spec["of"][1])
        return union_model(m1, m2)
    return None  # chunglu kinds: blocks are per-vertex


def _vertex_model_for(spec: dict) -> ModelInstance:
    """Per-vertex-block instance for the Chung-Lu kinds (k = n).

    Raises ModelError when some entry reaches 1 (e.g. plus kind with
    2 p max(u) >= 1); callers then record the row as lacking a model.
    """
    u = np.asarray(spec["u"], dtype=np.float64)
    p = float(spec["p"])
    if spec["kind"] == "chunglu-times":
        pm = p * np.outer(u, u)
    else:
        pm = p * (u[:, None] + u[None, :])
    return ModelInstance(BlockVector.integral(np.ones(u.size, dtype=np.int64)),
                         ProbMatrix(pm))


def _instance_or_none(spec: dict) -> Optional[ModelInstance]:
    inst = _instance_for(spec)
    if inst is not None:
        return inst
    try:
        return _vertex_model_for(spec)
    except ModelError:
        return None


def _sample(spec: dict, seed: int):
    kind = spec["kind"]
    if kind in ("sbm", "gnp", "blowup-percolate"):
        return sample_sbm(_instance_for(spec), seed)
    if kind == "union-sbm":
        g1 = sample_sbm(_instance_for(spec["of"][0]), derive_seed(seed, 1))
        g2 = sample_sbm(_instance_for(spec["of"][1]), derive_seed(seed, 2))
        return union_graphs(g1, g2)
    if kind in ("chunglu-times", "chunglu-plus"):
        return sample_chung_lu(spec["u"], float(spec["p"]),
                               kind.removeprefix("chunglu-"), seed)
    raise ConfigError(f"unknown model kind {kind!r}")


# --- predictions per grid point ----------------------------------------------

def _point_predictions(spec: dict, cfg: ExperimentConfig) -> dict:
    """All prediction columns for one grid point (replicate-independent)."""
    out = {"chi_pred_qstar": None, "chi_pred_sigma": None,
           "chi_pred_model": None, "alpha_pred_qstar": None,
           "alpha_pred_sigma": None, "edges_pred": None}
    kind = spec["kind"]
    inst = _instance_for(spec)
    if inst is not None:
        out["edges_pred"] = inst.expected_edges()
        norm = inst.sizes.norm
        qs = q_star(inst.q)
        try:
            sigma = sigma_estimate(inst)
        except ModelError:
            sigma = None
        if qs > 0.0 and qs * norm > 1.0 and sigma is not None:
            wstar = w_star_solve(inst.sizes, inst.q,
                                 seed=derive_seed(cfg.base_seed, 777)).w_sum
            out["chi_pred_qstar"] = wstar / (2.0 * math.log(qs * norm))
            out["chi_pred_sigma"] = wstar / (2.0 * (1.0 - sigma) * math.log(norm))
            out["alpha_pred_qstar"] = math.log(qs * norm)
            out["alpha_pred_sigma"] = (1.0 - sigma) * math.log(norm)
    if kind == "gnp":
        n, p = int(spec["n"]), float(spec["p"])
        if p * n > 1.0:
            out["chi_pred_model"] = predict_gnp(n, p).chi_predicted
    elif kind == "blowup-percolate":
        bspec = BlowUpSpec.from_edges(int(spec["k"]), spec["h_edges"],
                                      spec["sizes"])
        p = float(spec["p"])
        if p * bspec.sizes.norm > 1.0:
            out["chi_pred_model"] = predict_percolation(bspec, p).chi_predicted
    elif kind == "sbm" and len(spec.get("sizes", [])) == 2:
        P = spec["P"]
        try:
            out["chi_pred_model"] = predict_two_block(
                int(spec["sizes"][0]), int(spec["sizes"][1]),
                float(P[0][0]), float(P[1][1]), float(P[0][1])).chi_predicted
        except ModelError:
            pass
    elif kind in ("chunglu-times", "chunglu-plus"):
        try:
            out["chi_pred_model"] = predict_chung_lu(
                spec["u"], float(spec["p"]),
                kind.removeprefix("chunglu-")).chi_predicted
        except ModelError:
            pass
        try:
            vm = _vertex_model_for(spec)
        except ModelError:
            vm = None
        if vm is not None:
            qs = q_star(vm.q)
            if qs > 0.0 and qs * vm.sizes.norm > 1.0:
                out["alpha_pred_qstar"] = math.log(qs * vm.sizes.norm)
            out["edges_pred"] = vm.expected_edges()
    return out


@dataclass
class ReportRow:
    point: int
    replicate: int
    seed: int
    params: dict
    status: str
    values: dict            # measured columns
    predictions: dict       # per-point prediction columns
    runtime_ms: float

    def ratio(self, measure_col: str, pred_col: str) -> Optional[float]:
        v = self.values.get(measure_col)
        p = self.predictions.get(pred_col)
        if v is None or p is None or not p > 0.0:
            return None
        return v / p


_MEASURE_COLS = ("chi_exact", "chi_dsatur", "chi_extraction", "alpha_h",
                 "edge_count")
_PRED_COLS = ("chi_pred_qstar", "chi_pred_sigma", "chi_pred_model",
              "alpha_pred_qstar", "alpha_pred_sigma", "edges_pred")
_RATIO_SPEC = (
    ("ratio_chi_exact_qstar", "chi_exact", "chi_pred_qstar"),
    ("ratio_chi_exact_sigma", "chi_exact", "chi_pred_sigma"),
    ("ratio_chi_exact_model", "chi_exact", "chi_pred_model"),
    ("ratio_chi_dsatur_qstar", "chi_dsatur", "chi_pred_qstar"),
    ("ratio_chi_dsatur_sigma", "chi_dsatur", "chi_pred_sigma"),
    ("ratio_chi_dsatur_model", "chi_dsatur", "chi_pred_model"),
    ("ratio_chi_extraction_qstar", "chi_extraction", "chi_pred_qstar"),
    ("ratio_chi_extraction_sigma", "chi_extraction", "chi_pred_sigma"),
    ("ratio_chi_extraction_model", "chi_extraction", "chi_pred_model"),
    ("ratio_alpha_h_qstar", "alpha_h", "alpha_pred_qstar"),
    ("ratio_alpha_h_sigma", "alpha_h", "alpha_pred_sigma"),
    ("ratio_edge_count", "edge_count", "edges_pred"),
)


def _measure_row(cfg: ExperimentConfig, point_idx: int, replicate: int,
                 spec: dict, preds: dict, params: dict) -> ReportRow:
    seed = mix_seed(cfg.base_seed, point_idx, replicate)
    t0 = time.perf_counter()
    status: list[str] = []
    values: dict = {}
    g = _sample(spec, seed)
    inst = _instance_or_none(spec)
    if "edge_count" in cfg.measures:
        values["edge_count"] = float(g.m)
    if "chi" in cfg.measures:
        for method in cfg.chi_methods:
            col = f"chi_{method}"
            try:
                if method == "exact":
                    if g.n > cfg.exact_guard:
                        status.append(f"exact_skipped_n>{cfg.exact_guard}")
                        continue
                    values[col] = float(chrom.exact_chromatic(g, cfg.exact_budget))
                elif method == "dsatur":
                    values[col] = float(chrom.dsatur_colouring(
                        g, seed=derive_seed(seed, 10)).num_colours)
                elif inst is None:
                    status.append("extraction_skipped_no_model")
                else:
                    values[col] = float(chrom.balanced_extraction_colouring(
                        inst, g, epsilon=cfg.epsilon,
                        seed=derive_seed(seed, 11),
                        effort=cfg.extraction_effort).num_colours)
            except chrom.BudgetExceededError as exc:
                status.append(f"{method}_budget[{exc.lower},{exc.upper}]")
    if "alpha_h" in cfg.measures:
        if inst is None:
            status.append("alpha_h_skipped_no_model")
        else:
            try:
                values["alpha_h"] = chrom.alpha_h(
                    inst, g, mode=cfg.alpha_h_mode,
                    seed=derive_seed(seed, 12)).h_value
            except GuardError as exc:
                status.append(f"alpha_h_guard[{exc}]")
    runtime = (time.perf_counter() - t0) * 1000.0
    return ReportRow(point=point_idx, replicate=replicate, seed=seed,
                     params=params, status=";".join(status) or "ok",
                     values=values, predictions=preds, runtime_ms=runtime)


def _run_cell(args):
    cfg_dict, point_idx, replicate, spec, preds, params = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    return _measure_row(cfg, point_idx, replicate, spec, preds, params)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, float):
        if float(x).is_integer() and abs(x) < 1e15:
            return str(int(x))
        return f"{x:.10g}"
    return str(x)


def run_experiment(cfg: ExperimentConfig, out_path: str) -> list[ReportRow]:
    """Execute the full grid x replicate plan and write:

    out_path                the report CSV (deterministic, versioned header)
    out_path.summary.json   per-point median and IQR of every ratio column
    out_path.timing.csv     wall-clock per row (not reproducible by nature)
    """
    cfg.validate()
    points = cfg.grid_points()
    cells = []
    for point_idx, params in enumerate(points):
        spec = cfg.model_at(params)
        _sample(spec, 0)  # validate the model spec early (fail fast)
        preds = _point_predictions(spec, cfg)
        for replicate in range(cfg.replicates):
            cells.append((point_idx, replicate, spec, preds, params))

    if cfg.workers > 1:
        cfg_dict = _config_as_dict(cfg)
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(
                _run_cell,
                [(cfg_dict, *cell) for cell in cells], chunksize=1))
    else:
        rows = [_measure_row(cfg, *cell) for cell in cells]
    rows.sort(key=lambda r: (r.point, r.replicate))

    param_names = cfg.param_names()
    columns = (["point", "replicate", "seed", "status"]
               + [f"param_{p}" for p in param_names]
               + list(_MEASURE_COLS) + list(_PRED_COLS)
               + [name for name, _, _ in _RATIO_SPEC])
    lines = [f"# {REPORT_VERSION}", ",".join(columns)]
    for r in rows:
        rec = [str(r.point), str(r.replicate), str(r.seed), r.status]
        rec += [_fmt(r.params.get(p)) for p in param_names]
        rec += [_fmt(r.values.get(c)) for c in _MEASURE_COLS]
        rec += [_fmt(r.predictions.get(c)) for c in _PRED_COLS]
        rec += [_fmt(r.ratio(mc, pc)) for _, mc, pc in _RATIO_SPEC]
        lines.append(",".join(rec))
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

    _write_summary(rows, points, param_names, f"{out_path}.summary.json")
    with open(f"{out_path}.timing.csv", "w", encoding="utf-8") as fh:
        fh.write("point,replicate,runtime_ms\n")
        for r in rows:
            fh.write(f"{r.point},{r.replicate},{r.runtime_ms:.3f}\n")
    return rows


def _config_as_dict(cfg: ExperimentConfig) -> dict:
    return {
        "model": cfg.model, "replicates": cfg.replicates,
        "base_seed": cfg.base_seed, "chi_methods": cfg.chi_methods,
        "measures": cfg.measures, "sweep": cfg.sweep, "epsilon": cfg.epsilon,
        "exact_budget": cfg.exact_budget, "exact_guard": cfg.exact_guard,
        "alpha_h_mode": cfg.alpha_h_mode,
        "extraction_effort": cfg.extraction_effort, "workers": 1,
    }


def _write_summary(rows: list[ReportRow], points: list[dict],
                   param_names: list[str], path: str) -> None:
    summary = {"version": REPORT_VERSION, "points": []}
    for idx, params in enumerate(points):
        entry: dict = {"point": idx,
                       "params": {p: params.get(p) for p in param_names}}
        point_rows = [r for r in rows if r.point == idx]
        for name, mc, pc in _RATIO_SPEC:
            vals = [r.ratio(mc, pc) for r in point_rows]
            vals = sorted(v for v in vals if v is not None)
            if not vals:
                continue
            arr = np.asarray(vals)
            entry[name] = {
                "count": len(vals),
                "median": float(f"{np.median(arr):.10g}"),
                "iqr": float(f"{np.percentile(arr, 75) - np.percentile(arr, 25):.10g}"),
            }
        summary["points"].append(entry)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def emit_plotdata(report_path: str, x: str, y: str, out_path: str,
                  group: Optional[str] = None) -> None:
    """Two-column (plus optional group key) plot table from a report CSV.

    Rows sort by x (numeric when possible), then group; no rendering here.
    """
    with open(report_path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    if not lines:
        raise ModelError("empty report")
    header = lines[0].split(",")
    for col in [x, y] + ([group] if group else []):
        if col not in header:
            raise ModelError(f"unknown column {col!r}")
    xi, yi = header.index(x), header.index(y)
    gi = header.index(group) if group else None

    def sort_key(rec: list[str]):
        try:
            xv: object = float(rec[xi])
        except ValueError:
            xv = rec[xi]
        return (xv, rec[gi] if gi is not None else "")

    body = [ln.split(",") for ln in lines[1:] if ln]
    body.sort(key=sort_key)
    cols = [x, y] + ([group] if group else [])
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(cols) + "\n")
        for rec in body:
            out = [rec[xi], rec[yi]] + ([rec[gi]] if gi is not None else [])
            fh.write("\t".join(out) + "\n")

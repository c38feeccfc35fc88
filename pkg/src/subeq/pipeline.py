"""Pipeline orchestration: run configured analyses in dependency order,
persist CSV tables, JSON report, and figures."""

from __future__ import annotations

import csv
import os
import time

import numpy as np

from . import __version__, figures
from .bunching import (PointSpec, bunching_margin, burnside_irreducibility,
                       holonomy, lyapunov_spectrum, typicality_report)
from .config import SystemConfig, parse_word
from .mixing import coordinate_partition, k_scan, vwb_scan
from .potential import check_submultiplicativity, distortion_constant
from .report import config_hash, dumps, write_report
from .thermo import (GibbsReport, gibbs_weights, lps_check, pressure_estimate,
                     qm_search)


def _word_str(w) -> str:
    return "".join(map(str, w))


def _key_str(key) -> str:
    """Stable string form for atom keys (tuples of labels)."""
    return "|".join(_word_str(k) if isinstance(k, tuple) else str(k)
                    for k in key)


def _matrix(M) -> list:
    return [[float(v) for v in row] for row in np.asarray(M)]


class PipelineContext:
    """Carries results forward: pressure feeds gibbs, gibbs feeds the
    weight-consuming analyses."""

    def __init__(self, cfg: SystemConfig):
        self.cfg = cfg
        self.pressure_value: float | None = None
        self.gibbs: GibbsReport | None = None

    def ensure_pressure(self) -> float:
        if self.pressure_value is None:
            rep = pressure_estimate(self.cfg.potential, n_max=8)
            self.pressure_value = rep.extrapolated if rep.extrapolated is not None \
                else rep.upper_bound
        return self.pressure_value

    def ensure_weights(self, level: int):
        if self.gibbs is None or self.gibbs.weights.level < level:
            P = self.ensure_pressure()
            self.gibbs = gibbs_weights(self.cfg.potential, level, P)
        return self.gibbs.weights.marginal(level) if \
            self.gibbs.weights.level > level else self.gibbs.weights


def run_analysis(ctx: PipelineContext, a: dict) -> dict:
    op = a["op"]
    cfg = ctx.cfg
    return _RUNNERS[op](ctx, a)


def _run_pressure(ctx, a):
    rep = pressure_estimate(ctx.cfg.potential, int(a["n_max"]))
    if rep.extrapolated is not None:
        ctx.pressure_value = rep.extrapolated
    return {
        "n_values": rep.n_values,
        "log_partition_sums": rep.log_partition_sums,
        "estimates": rep.estimates,
        "upper_bound": rep.upper_bound,
        "lower_bound": rep.lower_bound,
        "extrapolated": rep.extrapolated,
        "periodic_orbit_data": {str(p): v
                                for p, v in rep.periodic_orbit_data.items()},
    }


def _run_gibbs(ctx, a):
    n = int(a["n"])
    P = float(a["pressure"]) if a.get("pressure") is not None \
        else ctx.ensure_pressure()
    rep = gibbs_weights(ctx.cfg.potential, n, P,
                        with_defects=bool(a.get("defects", True)))
    ctx.gibbs = rep
    return {
        "level": n,
        "pressure": P,
        "gibbs_constant": rep.gibbs_constant,
        "refinement_defect": rep.refinement_defect,
        "shift_defect": rep.shift_defect,
        "weights": {_word_str(w): v for w, v in rep.weights.weights.items()},
    }


def _run_qm(ctx, a):
    cert = qm_search(ctx.cfg.potential, int(a["n"]), int(a["k_max"]))
    return {
        "n": cert.n,
        "k": cert.k,
        "c": cert.c,
        "worst_pair": [_word_str(cert.worst_pair[0]),
                       _word_str(cert.worst_pair[1])],
        "worst_connector": _word_str(cert.worst_connector),
        "failures": [[_word_str(i), _word_str(j)] for i, j in cert.failures],
        "ok": cert.ok,
    }


def _run_lps(ctx, a):
    n = int(a["n"])
    weights2 = ctx.ensure_weights(2 * n)
    c_hat = ctx.gibbs.gibbs_constant if ctx.gibbs is not None else None
    rep = lps_check(weights2, gibbs_constant=c_hat)
    return {
        "n": rep.n,
        "max_ratio": rep.max_ratio,
        "min_ratio": rep.min_ratio,
        "worst_pair": [_word_str(rep.worst_pair[0]),
                       _word_str(rep.worst_pair[1])],
        "transposed_max": rep.transposed_max,
        "transposed_min": rep.transposed_min,
        "bound": rep.bound,
        "verdict": rep.verdict,
        "ratios": {f"{_word_str(j)}|{_word_str(i)}": r
                   for (j, i), r in rep.ratios.items()},
    }


def _run_bunching(ctx, a):
    rep = bunching_margin(ctx.cfg.cocycle, a.get("mode", "fiber"))
    return {
        "mode": rep.mode,
        "worst_product": rep.worst_product,
        "worst_window": _word_str(rep.worst_window),
        "threshold": rep.threshold,
        "margin": rep.margin,
        "verdict": "PASS" if rep.ok else "FAIL",
    }


def _holonomy_pair(cfg, a):
    cycle = parse_word(a["cycle"])
    bridge = parse_word(a.get("bridge", ""))
    side = {"s": "stable", "u": "unstable"}.get(a.get("side", "u"),
                                               a.get("side", "unstable"))
    x = PointSpec.periodic(cfg.sft, cycle)
    if side == "stable":
        y = PointSpec.homoclinic_past(cfg.sft, cycle, bridge)
    else:
        y = PointSpec.homoclinic(cfg.sft, cycle, bridge)
    return x, y, side


def _run_holonomy(ctx, a):
    x, y, side = _holonomy_pair(ctx.cfg, a)
    rep = holonomy(ctx.cfg.cocycle, x, y, side, int(a.get("n", 40)))
    return {
        "side": rep.side,
        "n_max": rep.n_max,
        "estimate": _matrix(rep.estimate),
        "increments": rep.increments,
        "fitted_ratio": rep.fitted_ratio,
        "fit_residual": rep.fit_residual,
        "error_estimate": rep.error_estimate,
    }


def _run_typicality(ctx, a):
    rep = typicality_report(ctx.cfg.cocycle, parse_word(a["p"]),
                            parse_word(a["bridge"]), int(a.get("n", 40)))
    levels = {}
    for t, lt in rep.per_level.items():
        levels[str(t)] = {
            "dimension": lt.dimension,
            "eigenvalues": [[float(v.real), float(v.imag)]
                            for v in lt.eigenvalues],
            "moduli_gap": float(lt.moduli_gap) if np.isfinite(lt.moduli_gap)
            else None,
            "eigenvector_condition": lt.eigenvector_condition,
            "pinching": lt.pinching,
            "general_position_margin": lt.general_position_margin,
            "twisting": lt.twisting,
        }
    return {
        "periodic_word": _word_str(rep.periodic_word),
        "bridge": _word_str(rep.bridge),
        "loop": _matrix(rep.loop),
        "per_level": levels,
        "typical": rep.typical,
    }


def _run_irreducibility(ctx, a):
    rep = burnside_irreducibility(list(ctx.cfg.cocycle.table.values()))
    return {
        "dimension": rep.dimension,
        "algebra_dimension": rep.algebra_dimension,
        "irreducible": rep.irreducible,
        "note": rep.note,
    }


def _run_lyapunov(ctx, a):
    n = int(a["n"])
    weights = ctx.ensure_weights(n + ctx.cfg.cocycle.k)
    est = lyapunov_spectrum(ctx.cfg.cocycle, weights, n)
    return {
        "n": est.n,
        "exponents": [float(v) for v in est.exponents],
        "log_det_average": est.log_det_average,
        "determinant_identity_gap":
            abs(float(est.exponents.sum()) - est.log_det_average),
    }


def _default_tests(sft):
    part = coordinate_partition(sft)
    return [(part, {a}) for a in range(sft.q)]


def _run_kscan(ctx, a):
    m1, m2, eps = int(a["m1"]), int(a["m2"]), float(a["eps"])
    xi = coordinate_partition(ctx.cfg.sft)
    weights = ctx.ensure_weights(1 + m2)
    rep = k_scan(weights, xi, _default_tests(ctx.cfg.sft), m1, m2, eps)
    return {
        "m1": rep.m1, "m2": rep.m2, "epsilon": rep.epsilon,
        "atom_count": rep.atom_count,
        "worst_deviation": rep.worst_deviation,
        "failing_mass": rep.failing_mass,
        "failing_atoms": [_key_str(k) for k in rep.failing_atoms],
        "verdict": rep.verdict,
        "per_atom": {_key_str(k): v for k, v in rep.per_atom.items()},
    }


def _run_vwbscan(ctx, a):
    n, m1, m2, eps = int(a["n"]), int(a["m1"]), int(a["m2"]), float(a["eps"])
    xi = coordinate_partition(ctx.cfg.sft)
    weights = ctx.ensure_weights(1 + m2 + n)
    rep = vwb_scan(weights, xi, n, m1, m2, eps)
    return {
        "n": rep.n, "m1": rep.m1, "m2": rep.m2, "epsilon": rep.epsilon,
        "atom_count": rep.atom_count,
        "worst_dbar": rep.worst_dbar,
        "failing_mass": rep.failing_mass,
        "failing_atoms": [_key_str(k) for k in rep.failing_atoms],
        "verdict": rep.verdict,
        "per_atom": {_key_str(k): v for k, v in rep.per_atom.items()},
    }


_RUNNERS = {
    "pressure": _run_pressure,
    "gibbs": _run_gibbs,
    "qm": _run_qm,
    "lps": _run_lps,
    "bunching": _run_bunching,
    "holonomy": _run_holonomy,
    "typicality": _run_typicality,
    "irreducibility": _run_irreducibility,
    "lyapunov": _run_lyapunov,
    "kscan": _run_kscan,
    "vwbscan": _run_vwbscan,
}

_FIGURES = {
    "pressure": lambda r, d, i: figures.pressure_figure(
        r, os.path.join(d, f"pressure_{i}.png")),
    "gibbs": lambda r, d, i: figures.weights_figure(
        r, os.path.join(d, f"gibbs_weights_{i}.png")),
    "lps": lambda r, d, i: figures.lps_figure(
        r, os.path.join(d, f"lps_ratios_{i}.png")),
    "holonomy": lambda r, d, i: figures.holonomy_figure(
        r, os.path.join(d, f"holonomy_{i}.png")),
    "kscan": lambda r, d, i: figures.scan_figure(
        r, os.path.join(d, f"kscan_{i}.png"), "per_atom", "worst deviation"),
    "vwbscan": lambda r, d, i: figures.scan_figure(
        r, os.path.join(d, f"vwbscan_{i}.png"), "per_atom", "d-bar"),
}


def _write_csv_tables(op: str, result: dict, out_dir: str, index: int) -> None:
    if op == "gibbs":
        path = os.path.join(out_dir, f"gibbs_weights_{index}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["word", "weight"])
            for word in sorted(result["weights"]):
                w.writerow([word, f"{result['weights'][word]:.17g}"])
    elif op == "lps":
        path = os.path.join(out_dir, f"lps_ratios_{index}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["past", "future", "ratio"])
            for key in sorted(result["ratios"]):
                j, i = key.split("|")
                w.writerow([j, i, f"{result['ratios'][key]:.17g}"])
    elif op in ("kscan", "vwbscan"):
        path = os.path.join(out_dir, f"{op}_{index}.csv")
        col = "worst_deviation" if op == "kscan" else "dbar"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["atom", col])
            for key in sorted(result["per_atom"]):
                w.writerow([key, f"{result['per_atom'][key]:.17g}"])


def run_pipeline(cfg: SystemConfig, out_dir: str | None = None,
                 render_figures: bool = True) -> tuple[dict, int]:
    """Execute the configured analyses; returns (report, exit_code).

    Exit code 0 on success, 3 on numeric failure (the report then carries a
    ``failed_after`` marker and any partial results).
    """
    ctx = PipelineContext(cfg)
    results = []
    timings = []
    failed_after = None
    error = None
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    for i, a in enumerate(cfg.analyses):
        t0 = time.perf_counter()
        try:
            result = run_analysis(ctx, a)
        except Exception as e:  # numeric failure: persist partial results
            failed_after = {"index": i, "op": a["op"], "error": str(e)}
            error = e
            break
        timings.append({"op": a["op"], "seconds": time.perf_counter() - t0})
        results.append({"op": a["op"], "params": {k: v for k, v in a.items()
                                                  if k != "op"},
                        "result": result})
        if out_dir:
            _write_csv_tables(a["op"], result, out_dir, i)
            if render_figures and a["op"] in _FIGURES:
                _FIGURES[a["op"]](result, out_dir, i)

    payload = {
        "tool_version": __version__,
        "config_hash": config_hash(cfg.semantic),
        "seed": cfg.seed,
        "results": results,
    }
    if failed_after is not None:
        payload["failed_after"] = failed_after
    report = dict(payload)
    report["timings"] = timings
    if out_dir:
        write_report(os.path.join(out_dir, "report.json"), report)
    return report, (3 if failed_after is not None else 0)

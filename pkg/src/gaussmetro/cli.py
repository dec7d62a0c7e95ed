"""Command-line front end.

Every subcommand reads a JSON run configuration (``--config``), applies
``--override key=value`` edits (dotted keys, JSON values), writes a CSV table
to ``--out`` (stdout when absent) and, next to a CSV file, the effective
configuration as ``<stem>.config.json`` plus, for commands that produce one,
a ``<stem>.summary.json``.

Exit codes: 0 success, 1 tolerance failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import itertools
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import bounds
from .bounds import BoundInputs
from .channel import (ChannelAtTime, DissipationProfile, ReservoirSpec, apply_channel,
                      channel_at, derive_coeffs, eta_at)
from .errors import GaussMetroError, TruncationLeak
from .fock import MAX_DIM, channel_output, fock_moments, phase_qfi
from .optimize import exact_curve, optimize_state_phase, optimize_time_frequency
from .qfi import qfi_frequency, qfi_phase
from .state import StateParams, build_state

EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad command line or configuration."""


_GRID = {
    "type": "object",
    "properties": {
        "values": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "start": {"type": "number", "exclusiveMinimum": 0},
        "stop": {"type": "number", "exclusiveMinimum": 0},
        "per_decade": {"type": "integer", "minimum": 0},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "task": {"enum": ["phase", "frequency"]},
        "reservoir": {
            "type": "object",
            "properties": {"n_th": {"type": "number", "minimum": 0},
                           "n_sq": {"type": "number", "minimum": 0},
                           "xi": {"type": "number"}},
            "additionalProperties": False,
        },
        "eta": {"type": ["number", "null"], "exclusiveMinimum": 0, "maximum": 1},
        "profile": {
            "type": ["object", "null"],
            "properties": {"gamma": {"type": "number", "minimum": 0},
                           "beta": {"type": "integer", "minimum": 0}},
            "additionalProperties": False,
        },
        "nbar": _GRID,
        "state": {
            "oneOf": [
                {"enum": ["optimal", "coherent", "squeezed_vacuum", "vacuum"]},
                {"type": "object",
                 "properties": {"alpha_re": {"type": "number"}, "alpha_im": {"type": "number"},
                                "r0": {"type": "number"}, "psi": {"type": "number"},
                                "n0": {"type": "number", "minimum": 0}},
                 "additionalProperties": False},
            ]
        },
        "t": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "total_time": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "phi0": {"type": "number"},
        "model": {"enum": ["reparametrized", "full"]},
        "betas": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "oracle": {
            "type": "object",
            "properties": {
                "nbar": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                "n_sq": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "n_th": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "eta": {"type": "array",
                        "items": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
                "dim": {"type": "integer", "minimum": 4},
                "max_dim": {"type": "integer", "minimum": 4},
                "leak_tol": {"type": "number", "exclusiveMinimum": 0},
                "qfi_tol": {"type": "number", "exclusiveMinimum": 0},
                "moment_tol": {"type": "number", "exclusiveMinimum": 0},
                "sanity_tol": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

_FIG_GRID = {"start": 1.0, "stop": 1e4, "per_decade": 60}

#: per-command defaults, merged under the user's config
DEFAULTS = {
    "qfi": {"task": "phase", "reservoir": {"n_th": 0.0, "n_sq": 0.0, "xi": 0.0}, "eta": 1.0,
            "profile": None, "nbar": {"values": [1.0]}, "state": "coherent", "t": None,
            "phi0": 0.0},
    "bound": {"task": "phase", "reservoir": {"n_th": 0.0, "n_sq": 10.0, "xi": 0.0},
              "eta": 0.9, "profile": None, "nbar": {"start": 1.0, "stop": 1e4, "per_decade": 10},
              "total_time": None},
    "optimize-state": {"task": "phase", "reservoir": {"n_th": 0.0, "n_sq": 10.0, "xi": 0.0},
                       "eta": 0.9, "nbar": {"values": [1.0, 10.0, 100.0]}, "state": "optimal",
                       "phi0": 0.0},
    "optimize-time": {"task": "frequency", "reservoir": {"n_th": 0.0, "n_sq": 10.0, "xi": 0.0},
                      "profile": {"gamma": 1.0, "beta": 0},
                      "nbar": {"values": [10.0, 100.0, 1000.0]}, "state": "optimal",
                      "total_time": None, "model": "reparametrized"},
    "fig2": {"reservoir": {"n_th": 0.0, "n_sq": 10.0, "xi": 0.0}, "eta": 0.9,
             "nbar": {"start": 0.01, "stop": 1e4, "per_decade": 60}},
    "fig3": {"reservoir": {"n_th": 0.0, "n_sq": 10.0, "xi": 0.0},
             "profile": {"gamma": 1.0, "beta": 0}, "betas": [0, 1], "nbar": dict(_FIG_GRID),
             "model": "full"},
    "cavity-demo": {"reservoir": {"n_th": 0.0, "n_sq": 10.0, "xi": 0.0},
                    "profile": {"gamma": 1.0, "beta": 0}, "betas": [0, 1],
                    "nbar": {"start": 1.0, "stop": 1e4, "per_decade": 20}, "model": "full"},
    "oracle-check": {"oracle": {"nbar": [0.5, 1.0, 2.0], "n_sq": [0.0, 1.0, 2.0],
                                "n_th": [0.0, 0.5], "eta": [0.5, 0.9], "dim": 40,
                                "max_dim": MAX_DIM, "leak_tol": 1e-9, "qfi_tol": 1e-3,
                                "moment_tol": 1e-5, "sanity_tol": 1e-10}},
}


# configuration ------------------------------------------------------------

# replaced as a whole: a values list and a start/stop range must not mix
_ATOMIC = {"nbar"}


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in extra.items():
        if key not in _ATOMIC and isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _parse_override(text: str):
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise UsageError(f"override {text!r} is not of the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.split("."), value


def _apply_override(cfg: dict, path, value):
    node = cfg
    for part in path[:-1]:
        if not isinstance(node.get(part), dict):
            node[part] = {}
        node = node[part]
    node.update(_merge(node, {path[-1]: value}))


def load_config(command: str, path: str | None = None, overrides=()) -> dict:
    """Defaults for ``command``, updated by the JSON file and the overrides.

    Raises:
        UsageError: unreadable file or a configuration violating the schema.
    """
    cfg = copy.deepcopy(DEFAULTS[command])
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(user, dict):
            raise UsageError("config must be a JSON object")
        cfg = _merge(cfg, user)
    for text in overrides:
        _apply_override(cfg, *_parse_override(text))
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise UsageError(f"invalid config: {exc.message}") from exc
    return cfg


def nbar_grid(spec: dict) -> np.ndarray:
    """Explicit values, or ``per_decade`` log-spaced points from start to stop."""
    if "values" in spec:
        grid = np.array(sorted(spec["values"]), dtype=float)
    elif {"start", "stop", "per_decade"} <= spec.keys():
        start, stop, per = spec["start"], spec["stop"], spec["per_decade"]
        if stop < start or per == 0:
            grid = np.array([])
        else:
            n = int(round(math.log10(stop / start) * per)) + 1
            grid = np.geomspace(start, stop, n)
    else:
        raise UsageError("nbar grid needs 'values' or start/stop/per_decade")
    if grid.size == 0:
        raise UsageError("nbar grid is empty")
    return grid


def _coeffs(cfg, **change):
    res = _merge(cfg["reservoir"], change)
    return derive_coeffs(ReservoirSpec(res.get("n_th", 0.0), res.get("n_sq", 0.0),
                                       res.get("xi", 0.0)))


def _profile(cfg, beta=None) -> DissipationProfile:
    prof = cfg.get("profile")
    if not prof:
        raise UsageError("this task needs a dissipation profile")
    return DissipationProfile(prof.get("gamma", 1.0),
                              prof.get("beta", 0) if beta is None else beta)


def _phase_eta(cfg) -> float:
    """Exactly one of eta / profile (with t) fixes the phase channel."""
    eta, prof = cfg.get("eta"), cfg.get("profile")
    if (eta is None) == (prof is None):
        raise UsageError("phase tasks need exactly one of 'eta' and 'profile'")
    if eta is not None:
        return eta
    if cfg.get("t") is None:
        raise UsageError("a phase task given a profile also needs 't'")
    return eta_at(_profile(cfg), cfg["t"])


def _fixed_state(mode, nbar):
    if mode == "coherent":
        return StateParams.coherent(math.sqrt(nbar))
    if mode == "squeezed_vacuum":
        return StateParams.squeezed_vacuum(nbar)
    if mode == "vacuum":
        return StateParams()
    if isinstance(mode, dict):
        return StateParams(complex(mode.get("alpha_re", 0.0), mode.get("alpha_im", 0.0)),
                           mode.get("r0", 0.0), mode.get("psi", 0.0), mode.get("n0", 0.0))
    raise UsageError(f"state mode {mode!r} is not a fixed state")


# output -------------------------------------------------------------------

def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.11e}"
    return str(value)


def format_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[h]) for h in header])
    return buf.getvalue()


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def write_outputs(out, header, rows, cfg, summary=None, stream=None):
    text = format_csv(header, rows)
    if out is None:
        (stream or sys.stdout).write(text)
        if summary is not None:
            sys.stderr.write(json.dumps(_json_ready(summary), indent=2, sort_keys=True) + "\n")
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    stem = out.with_suffix("")
    Path(f"{stem}.config.json").write_text(json.dumps(_json_ready(cfg), indent=2,
                                                      sort_keys=True) + "\n")
    if summary is not None:
        Path(f"{stem}.summary.json").write_text(
            json.dumps(_json_ready(summary), indent=2, sort_keys=True) + "\n")


# commands -----------------------------------------------------------------
# each returns (header, rows, summary, exit_code)

def cmd_qfi(cfg):
    grid = nbar_grid(cfg["nbar"])
    coeffs = _coeffs(cfg)
    mode = cfg["state"]
    rows = []
    for nbar in grid:
        if cfg["task"] == "phase":
            eta = _phase_eta(cfg)
            if mode == "optimal":
                opt = optimize_state_phase(nbar, coeffs, eta, cfg["phi0"])
                value, method = opt.qfi, "optimized"
            else:
                ch = ChannelAtTime.markovian(coeffs, eta)
                value = qfi_phase(_fixed_state(mode, nbar), ch, cfg["phi0"]).value
                method = "gaussian_formula"
        else:
            prof, t = _profile(cfg), cfg.get("t")
            if t is None:
                raise UsageError("frequency QFI needs the interrogation time 't'")
            if mode == "optimal":
                opt = optimize_state_phase(nbar, coeffs, eta_at(prof, t))
                value, method = t * t * opt.qfi, "optimized"
            else:
                value = qfi_frequency(_fixed_state(mode, nbar), coeffs, prof, t).value
                method = "gaussian_formula"
        rows.append({"nbar": float(nbar), "qfi": value, "method": method})
    return ["nbar", "qfi", "method"], rows, None, EXIT_OK


def cmd_bound(cfg):
    grid = nbar_grid(cfg["nbar"])
    coeffs = _coeffs(cfg)
    rows = []
    if cfg["task"] == "phase":
        eta = cfg.get("eta")
        if eta is None:
            raise UsageError("phase bounds need 'eta'")
        header = ["nbar", "phase_optimal", "phase_coherent", "noiseless", "infinite_sq"]
        for nbar in grid:
            inp = BoundInputs(nbar, coeffs, eta=eta)
            rows.append({"nbar": float(nbar),
                         "phase_optimal": bounds.phase_bound_general(inp),
                         "phase_coherent": bounds.phase_bound_coherent(inp),
                         "noiseless": bounds.reference_limits("noiseless_phase", nbar),
                         "infinite_sq": bounds.reference_limits("infinite_sq_phase", nbar,
                                                                eta=eta)})
        return header, rows, None, EXIT_OK
    prof = _profile(cfg)
    header = ["nbar", "var_t_optimal", "t_opt_optimal", "var_t_coherent", "t_opt_coherent",
              "infinite_sq"]
    for nbar in grid:
        inp = BoundInputs(nbar, coeffs, gamma=prof.gamma, beta=prof.beta)
        opt, coh = bounds.freq_bound_optimal(inp), bounds.freq_bound_coherent(inp)
        rows.append({"nbar": float(nbar), "var_t_optimal": opt.var_t_product,
                     "t_opt_optimal": opt.t_opt, "var_t_coherent": coh.var_t_product,
                     "t_opt_coherent": coh.t_opt,
                     "infinite_sq": bounds.reference_limits("infinite_sq_frequency", nbar,
                                                            gamma=prof.gamma, beta=prof.beta)})
    return header, rows, None, EXIT_OK


def cmd_optimize_state(cfg):
    grid = nbar_grid(cfg["nbar"])
    eta = cfg.get("eta")
    if eta is None:
        raise UsageError("optimize-state needs 'eta'")
    family = cfg["state"]
    if family not in ("optimal", "coherent"):
        raise UsageError("optimize-state searches the 'optimal' or 'coherent' family")
    coeffs = _coeffs(cfg)
    rows = []
    prev = None
    for nbar in grid:
        opt = optimize_state_phase(nbar, coeffs, eta, cfg["phi0"], family,
                                   extra_starts=None if prev is None else [prev])
        u = opt.best_params.unit()
        prev = u if family == "optimal" else u[3:]
        bp = opt.best_params
        rows.append({"nbar": float(nbar), "delta_phi": opt.bound, "qfi": opt.qfi, "s": bp.s,
                     "n0": bp.n0, "psi": bp.psi, "delta": bp.delta})
    return ["nbar", "delta_phi", "qfi", "s", "n0", "psi", "delta"], rows, None, EXIT_OK


def cmd_optimize_time(cfg):
    grid = nbar_grid(cfg["nbar"])
    prof = _profile(cfg)
    coeffs = _coeffs(cfg)
    total = cfg.get("total_time") or math.inf
    mode = cfg["state"]
    rows = []
    for nbar in grid:
        state = mode if mode in ("optimal", "coherent") else _fixed_state(mode, nbar)
        opt = optimize_time_frequency(nbar, coeffs, prof, total, state, cfg["model"])
        rows.append({"nbar": float(nbar), "var_t_product": opt.var_t_product,
                     "t_opt": opt.t_opt, "qfi": opt.qfi, "s": opt.best_params.s,
                     "n0": opt.best_params.n0, "boundary": opt.boundary,
                     "stationarity": opt.stationarity})
    header = ["nbar", "var_t_product", "t_opt", "qfi", "s", "n0", "boundary", "stationarity"]
    return header, rows, None, EXIT_OK


def _local_slopes(x, y):
    return np.gradient(np.log(y), np.log(x))


def cmd_fig2(cfg):
    grid = nbar_grid(cfg["nbar"])
    eta = cfg.get("eta")
    if eta is None:
        raise UsageError("fig2 needs 'eta'")
    sq = _coeffs(cfg)
    lossy = _coeffs(cfg, n_th=0.0, n_sq=0.0)
    optimal = exact_curve("phase", grid, sq, eta=eta)
    coherent = exact_curve("phase", grid, sq, eta=eta, family="coherent")
    plain = exact_curve("phase", grid, lossy, eta=eta)
    vac = 1 / math.sqrt(qfi_phase(StateParams(), ChannelAtTime.markovian(sq, eta)).value)
    rows = []
    for nbar, o, c, p in zip(grid, optimal, coherent, plain):
        inp_sq, inp_0 = BoundInputs(nbar, sq, eta=eta), BoundInputs(nbar, lossy, eta=eta)
        ref = bounds.reference_limits("noiseless_phase", nbar)
        rows.append({
            "nbar": float(nbar), "exact_optimal": o["bound"], "exact_coherent": c["bound"],
            "exact_lossy_optimal": p["bound"],
            "asym_optimal": bounds.phase_bound_general(inp_sq),
            "asym_coherent": bounds.phase_bound_coherent(inp_sq),
            "asym_lossy": bounds.phase_bound_general(inp_0),
            "vacuum_input": vac,
            "infinite_sq_reference": bounds.reference_limits("infinite_sq_phase", nbar, eta=eta),
            "noiseless_reference": ref, "ratio": o["bound"] / ref, "s_optimal": o["s"],
        })
    ratio = np.array([r["ratio"] for r in rows])
    exact = np.array([r["exact_optimal"] for r in rows])
    slopes = _local_slopes(grid, exact) if len(grid) > 1 else np.array([math.nan])
    window = (grid >= 30) & (grid <= 140)
    i = int(np.argmin(ratio))
    summary = {
        "min_ratio": float(ratio[i]), "argmin_nbar": float(grid[i]),
        "min_log_slope_30_140": float(np.min(slopes[window])) if window.any() else None,
        "vacuum_input_bound": vac,
        "asymptote_optimal_prefactor": bounds.phase_bound_general(BoundInputs(1.0, sq, eta=eta)),
        "asymptote_coherent_prefactor": bounds.phase_bound_coherent(
            BoundInputs(1.0, sq, eta=eta)),
        "asymptote_lossy_prefactor": bounds.phase_bound_general(BoundInputs(1.0, lossy,
                                                                            eta=eta)),
    }
    header = ["nbar", "exact_optimal", "exact_coherent", "exact_lossy_optimal", "asym_optimal",
              "asym_coherent", "asym_lossy", "vacuum_input", "infinite_sq_reference",
              "noiseless_reference", "ratio", "s_optimal"]
    return header, rows, summary, EXIT_OK


def fig3_asymptotes(sq, plain, beta):
    """Asymptotic ratios Delta omega^2_0 / Delta omega^2_sq (optimal, coherent)."""
    opt = (bounds.freq_bound_optimal(BoundInputs(1.0, plain, gamma=1.0, beta=beta)).var_t_product
           / bounds.freq_bound_optimal(BoundInputs(1.0, sq, gamma=1.0, beta=beta)).var_t_product)
    coh = (bounds.freq_bound_coherent(BoundInputs(1.0, plain, gamma=1.0, beta=beta)).var_t_product
           / bounds.freq_bound_coherent(BoundInputs(1.0, sq, gamma=1.0, beta=beta)).var_t_product)
    return opt, coh


def cmd_fig3(cfg):
    grid = nbar_grid(cfg["nbar"])
    sq = _coeffs(cfg)
    plain = _coeffs(cfg, n_th=0.0, n_sq=0.0)
    gamma = _profile(cfg).gamma
    rows = [{"nbar": float(n)} for n in grid]
    summary = {"gamma": gamma, "model": cfg["model"]}
    header = ["nbar"]
    for beta, family in itertools.product(cfg["betas"], ("optimal", "coherent")):
        prof = DissipationProfile(gamma, beta)
        tag = f"{family}_b{beta}"
        with_sq = exact_curve("frequency", grid, sq, profile=prof, family=family,
                              model=cfg["model"])
        without = exact_curve("frequency", grid, plain, profile=prof, family=family,
                              model=cfg["model"])
        for row, a, b in zip(rows, with_sq, without):
            row[f"ratio_{tag}"] = b["bound"] / a["bound"]
            row[f"var_t_sq_{tag}"] = a["bound"]
            row[f"var_t_0_{tag}"] = b["bound"]
            row[f"boundary_{tag}"] = a["boundary"] or b["boundary"]
        header += [f"ratio_{tag}", f"var_t_sq_{tag}", f"var_t_0_{tag}", f"boundary_{tag}"]
        ratios = np.array([r[f"ratio_{tag}"] for r in rows])
        asym = fig3_asymptotes(sq, plain, beta)[0 if family == "optimal" else 1]
        summary[tag] = {
            "asymptote": asym, "last_ratio": float(ratios[-1]),
            "last_over_asymptote": float(ratios[-1] / asym), "min_ratio": float(ratios.min()),
            "argmin_nbar": float(grid[int(np.argmin(ratios))]),
            "all_above_one": bool(np.all(ratios > 1)),
            "monotone_decreasing": bool(np.all(np.diff(ratios) < 0)),
        }
    return header, rows, summary, EXIT_OK


def cmd_cavity_demo(cfg):
    grid = nbar_grid(cfg["nbar"])
    sq = _coeffs(cfg, n_th=0.0)
    plain = _coeffs(cfg, n_th=0.0, n_sq=0.0)
    gamma = _profile(cfg).gamma
    rows, summary = [], {}
    for beta in cfg["betas"]:
        prof = DissipationProfile(gamma, beta)
        with_sq = exact_curve("frequency", grid, sq, profile=prof, family="coherent",
                              model=cfg["model"])
        without = exact_curve("frequency", grid, plain, profile=prof, family="coherent",
                              model=cfg["model"])
        asym = 1 / fig3_asymptotes(sq, plain, beta)[1]
        for nbar, a, b in zip(grid, with_sq, without):
            lossy = bounds.freq_bound_coherent(BoundInputs(nbar, plain, gamma=gamma, beta=beta))
            rows.append({"beta": beta, "nbar": float(nbar), "var_t_sq": a["bound"],
                         "t_opt_sq": a["t_opt"], "var_t_0": b["bound"], "t_opt_0": b["t_opt"],
                         "lossy_reference": lossy.var_t_product,
                         "gain": a["bound"] / b["bound"], "gain_asymptote": asym})
        summary[f"beta{beta}"] = {"gain_asymptote": asym, "last_gain": rows[-1]["gain"]}
    if 0 in cfg["betas"]:
        summary["cavity_gain_formula"] = bounds.cavity_gain(sq)
    header = ["beta", "nbar", "var_t_sq", "t_opt_sq", "var_t_0", "t_opt_0", "lossy_reference",
              "gain", "gain_asymptote"]
    return header, rows, summary, EXIT_OK


def _rel(a, b, floor):
    return abs(a - b) / max(abs(b), floor)


def _moment_dev(g, f):
    # covariance entries are at least ~1/2 for these inputs; 1/2 also floors
    # the relative error of first moments that happen to be near zero
    return max(_rel(getattr(f, k), getattr(g, k), 0.5) for k in ("x", "p", "sxx", "sxp", "spp"))


def oracle_state(nbar):
    """Half squeezing, half displacement, rotated off both axes."""
    return StateParams(alpha0=math.sqrt(0.5 * nbar) * complex(math.cos(0.3), math.sin(0.3)),
                       r0=math.asinh(math.sqrt(0.5 * nbar)), psi=math.pi / 8)


def oracle_rows(oc):
    """Gaussian path against the Fock master-equation path on a small grid."""
    rows = []
    prof = DissipationProfile(1.0, 0)
    for nbar, n_sq, n_th, eta in itertools.product(oc["nbar"], oc["n_sq"], oc["n_th"],
                                                   oc["eta"]):
        coeffs = derive_coeffs(ReservoirSpec(n_th, n_sq, 0.0))
        params = oracle_state(nbar)
        t = prof.time_for_eta(eta)
        row = {"check": "channel", "nbar": float(nbar), "n_sq": float(n_sq), "n_th": float(n_th),
               "eta": float(eta)}
        try:
            rho = channel_output(params, coeffs, prof, t, dim=oc["dim"], max_dim=oc["max_dim"],
                                 leak_tol=oc["leak_tol"])
        except TruncationLeak as exc:
            row.update(dim=None, qfi_gaussian=None, qfi_fock=None, qfi_dev=None,
                       moment_dev=None, passed=False, error=f"TruncationLeak: {exc}")
            rows.append(row)
            continue
        ch = channel_at(coeffs, prof, t)
        g_state = apply_channel(build_state(params), ch)
        gq = qfi_phase(params, ch).value
        fq = phase_qfi(rho)
        qdev, mdev = _rel(fq, gq, 1e-300), _moment_dev(g_state, fock_moments(rho))
        row.update(dim=rho.dim, qfi_gaussian=gq, qfi_fock=fq, qfi_dev=qdev, moment_dev=mdev,
                   passed=bool(qdev <= oc["qfi_tol"] and mdev <= oc["moment_tol"]), error="")
        rows.append(row)
    # without dissipation both paths are exact rotations of the same state
    params = oracle_state(1.0)
    coeffs = derive_coeffs(ReservoirSpec(0.0, 1.0, 0.0))
    still = DissipationProfile(0.0, 0)
    row = {"check": "no_dissipation", "nbar": 1.0, "n_sq": 1.0, "n_th": 0.0, "eta": 1.0}
    try:
        rho = channel_output(params, coeffs, still, 1.0, dim=oc["dim"], max_dim=oc["max_dim"],
                             leak_tol=oc["leak_tol"])
    except TruncationLeak as exc:
        row.update(dim=None, qfi_gaussian=None, qfi_fock=None, qfi_dev=None, moment_dev=None,
                   passed=False, error=f"TruncationLeak: {exc}")
        return rows + [row]
    gq = qfi_phase(params, channel_at(coeffs, still, 1.0)).value
    fq = phase_qfi(rho, richardson=True)
    qdev = _rel(fq, gq, 1e-300)
    mdev = _moment_dev(build_state(params), fock_moments(rho))
    row.update(dim=rho.dim, qfi_gaussian=gq, qfi_fock=fq, qfi_dev=qdev, moment_dev=mdev,
               passed=bool(qdev <= oc["sanity_tol"] and mdev <= oc["sanity_tol"]), error="")
    return rows + [row]


def cmd_oracle_check(cfg):
    oc = cfg["oracle"]
    if oc["max_dim"] < oc["dim"]:
        raise UsageError("max_dim must be at least dim")
    rows = oracle_rows(oc)
    header = ["check", "nbar", "n_sq", "n_th", "eta", "dim", "qfi_gaussian", "qfi_fock",
              "qfi_dev", "moment_dev", "passed", "error"]
    done = [r for r in rows if r["qfi_dev"] is not None]
    summary = {
        "max_qfi_dev": max((r["qfi_dev"] for r in done if r["check"] == "channel"), default=None),
        "max_moment_dev": max((r["moment_dev"] for r in done if r["check"] == "channel"),
                              default=None),
        "no_dissipation_dev": (None if rows[-1]["qfi_dev"] is None
                               else max(rows[-1]["qfi_dev"], rows[-1]["moment_dev"])),
        "failures": sum(not r["passed"] for r in rows),
        "truncation_leaks": sum(r["error"].startswith("TruncationLeak") for r in rows),
        "all_passed": all(r["passed"] for r in rows),
    }
    return header, rows, summary, EXIT_OK if summary["all_passed"] else EXIT_TOLERANCE


COMMANDS = {
    "qfi": cmd_qfi,
    "bound": cmd_bound,
    "optimize-state": cmd_optimize_state,
    "optimize-time": cmd_optimize_time,
    "fig2": cmd_fig2,
    "fig3": cmd_fig3,
    "cavity-demo": cmd_cavity_demo,
    "oracle-check": cmd_oracle_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussmetro",
        description="Precision bounds for phase and frequency estimation with Gaussian "
                    "probes in squeezed-thermal dissipative reservoirs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="CSV output path (stdout if omitted)")
        p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                       help="set a config field, e.g. reservoir.n_sq=5 (repeatable)")
    return parser


def run(command: str, cfg: dict, out=None, stream=None) -> int:
    header, rows, summary, code = COMMANDS[command](cfg)
    write_outputs(out, header, rows, cfg, summary, stream)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.command, args.config, args.override)
        return run(args.command, cfg, args.out)
    except (UsageError, GaussMetroError) as exc:
        print(f"gaussmetro {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

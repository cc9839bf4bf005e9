"""Command-line front end.

Subcommands: ``analyze`` (JSON report of threshold, reduced coefficients,
verdict, equilibria), ``simulate`` (full spectral PDE run with CSV histories
and figures), ``render`` (rasterize an equilibrium pattern or a saved field),
and ``reproduce`` (built-in configurations for the canonical patterns).

Configs are strict INI (key = value under sections) or JSON with the same
section/key layout; unknown sections or keys are rejected.  Exit codes:
0 success, 2 config error, 3 unsupported case, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classifier import classify, straight_line_report
from .equilibria import stability_report
from .errors import (
    BlowUp,
    CardinalityOutOfModel,
    ChLatticeError,
    ConfigError,
    DegenerateCoefficients,
    DegenerateLattice,
    InvalidConcentration,
    IoFailure,
    NotConverged,
    PesViolation,
    PreTransition,
    QuadratureUnderResolved,
    ResonantDenominator,
    UnderResolved,
    UnsupportedCase,
    WrongMultiplicity,
    ZeroMode,
)
from .lattice import CriticalSet, DualLattice, LatticeSpec, dual_lattice, minimal_shell
from .reduction import (
    CASE_MULT6_RESONANT_EVEN,
    CASE_MULT6_RESONANT_GENERAL,
    reduced_coefficients,
)
from .renderer import (
    RasterSpec,
    classify_pattern,
    export,
    load_field,
    rasterize,
    save_field,
    synthesize_stationary,
)
from .simulator import SimConfig, run_pde, shell_amplitude
from .spectrum import ModelParams

SCHEMA_VERSION = "1"

_CONFIG_ERRORS = (ConfigError, DegenerateLattice, InvalidConcentration)
_UNSUPPORTED_ERRORS = (UnsupportedCase, CardinalityOutOfModel, WrongMultiplicity)
_NUMERICAL_ERRORS = (BlowUp, NotConverged, PesViolation, ResonantDenominator,
                     DegenerateCoefficients, UnderResolved,
                     QuadratureUnderResolved, IoFailure, ZeroMode,
                     PreTransition)

_ALLOWED_KEYS = {
    "lattice": {"l1", "l2", "k1", "k2"},
    "model": {"lambda", "gamma2", "gamma3", "sigma", "even"},
    "sim": {"n", "dt", "t_end", "scheme", "seed", "init", "init_amplitude",
            "record_every", "dealias"},
    "render": {"equilibrium", "field_file", "phases", "width", "height",
               "tiles"},
    "output": {"directory", "formats", "prefix"},
}


@dataclass
class RunConfig:
    lattice: dict = field(default_factory=dict)
    model: dict = field(default_factory=dict)
    sim: dict = field(default_factory=dict)
    render: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)


def _parse_vector(text) -> np.ndarray:
    if isinstance(text, (list, tuple)):
        vals = [float(v) for v in text]
    else:
        vals = [float(v) for v in str(text).replace(",", " ").split()]
    if len(vals) != 2:
        raise ConfigError(f"expected two components, got {text!r}")
    return np.array(vals)


def load_config(path) -> RunConfig:
    """Strict INI or JSON config with sections lattice/model/sim/render/output."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc

    if path.suffix == ".json" or text.lstrip().startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("top-level JSON config must be an object")
        sections = {str(k): dict(v) for k, v in raw.items()}
    else:
        parser = configparser.ConfigParser(strict=True,
                                           interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"invalid config: {exc}") from exc
        sections = {name: dict(parser[name]) for name in parser.sections()}

    cfg = RunConfig()
    for name, entries in sections.items():
        if name not in _ALLOWED_KEYS:
            raise ConfigError(f"unknown config section [{name}]")
        allowed = _ALLOWED_KEYS[name]
        for key in entries:
            if key.lower() not in allowed:
                raise ConfigError(f"unknown key '{key}' in section [{name}]")
        getattr(cfg, name).update(
            {k.lower(): v for k, v in entries.items()})
    _validate_lattice_keys(cfg)
    return cfg


def _validate_lattice_keys(cfg: RunConfig):
    has_l = "l1" in cfg.lattice or "l2" in cfg.lattice
    has_k = "k1" in cfg.lattice or "k2" in cfg.lattice
    if has_l and has_k:
        raise ConfigError("give either l-vectors or k-vectors, not both")
    if has_l and not ("l1" in cfg.lattice and "l2" in cfg.lattice):
        raise ConfigError("both l1 and l2 are required")
    if has_k and not ("k1" in cfg.lattice and "k2" in cfg.lattice):
        raise ConfigError("both k1 and k2 are required")
    if not has_l and not has_k:
        raise ConfigError("a lattice section with l- or k-vectors is required")


def _as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def build_problem(cfg: RunConfig):
    """Resolve the config into (dual, critical set, model parameters)."""
    if "k1" in cfg.lattice:
        dual = DualLattice(_parse_vector(cfg.lattice["k1"]),
                           _parse_vector(cfg.lattice["k2"]))
    else:
        dual = dual_lattice(LatticeSpec(_parse_vector(cfg.lattice["l1"]),
                                        _parse_vector(cfg.lattice["l2"])))
    try:
        sigma = float(cfg.model.get("sigma", 0.0))
        gamma2 = float(cfg.model.get("gamma2", 0.0))
        gamma3 = float(cfg.model.get("gamma3", 1.0))
        even = _as_bool(cfg.model.get("even", False))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad model parameter: {exc}") from exc
    if sigma < 0:
        raise ConfigError("sigma must be nonnegative")

    cs = minimal_shell(dual, sigma=sigma)

    lam_raw = cfg.model.get("lambda", "auto:1.0")
    lam = _resolve_lambda(lam_raw, cs.lambda0)
    params = ModelParams(lam=lam, gamma2=gamma2, gamma3=gamma3, sigma=sigma,
                         even_symmetry=even)
    return dual, cs, params


def _resolve_lambda(raw, lambda0: float) -> float:
    text = str(raw).strip()
    if text.startswith("auto"):
        factor = 1.0
        if ":" in text:
            try:
                factor = float(text.split(":", 1)[1])
            except ValueError as exc:
                raise ConfigError(f"bad auto-lambda factor in {raw!r}") from exc
        return lambda0 * factor
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"bad lambda value {raw!r}") from exc


def _jsonable(obj):
    """Recursively convert report values to deterministic JSON-safe types."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def analysis_report(cfg: RunConfig) -> dict:
    dual, cs, params = build_problem(cfg)
    report = {
        "schema_version": SCHEMA_VERSION,
        "lattice": {
            "k1": dual.k1,
            "k2": dual.k2,
            "cell_area": dual.cell_area,
        },
        "shell": {
            "members": [list(m) for m in cs.members],
            "representatives": [list(m) for m in cs.critical_indices],
            "multiplicity": cs.multiplicity,
            "resonance": cs.resonance,
            "norm_sq": cs.norm_sq,
            "lambda0": cs.lambda0,
        },
        "model": {
            "lambda": params.lam,
            "gamma2": params.gamma2,
            "gamma3": params.gamma3,
            "sigma": params.sigma,
            "even": params.even_symmetry,
        },
    }

    rc = reduced_coefficients(cs, dual, params)
    report["reduction"] = {
        "case": rc.case,
        "beta": rc.beta,
        "xi": rc.xi,
        "eta": rc.eta,
        "chi": rc.chi,
        "omega": rc.omega,
        "tau": rc.tau,
        "a_constant": rc.a_constant,
    }

    try:
        verdict = classify(rc, params)
        report["classification"] = {
            "available": True,
            "transition_type": verdict.transition_type,
            "threshold": verdict.threshold,
            "margin": verdict.margin,
            "notes": list(verdict.notes),
        }
    except UnsupportedCase as exc:
        report["classification"] = {"available": False, "reason": str(exc)}

    try:
        lines = straight_line_report(rc)
        report["straight_lines"] = [
            {"id": ln.line_id, "coefficients": list(ln.coefficients),
             "order": ln.order, "approaches_origin": ln.approaches_origin}
            for ln in lines
        ]
    except UnsupportedCase:
        report["straight_lines"] = []

    if params.lam > cs.lambda0 and rc.case != CASE_MULT6_RESONANT_GENERAL:
        sr = stability_report(rc, params)
        report["equilibria"] = [
            {
                "family": e.family,
                "pattern": e.pattern,
                "coordinates": list(e.coordinates),
                "eigenvalues": list(e.jacobian_eigenvalues),
                "stability": e.stability,
                "unstable_directions": [list(d) for d in e.unstable_directions],
                "residual": e.residual,
            }
            for e in sr.equilibria
        ]
        if sr.roll_regime is not None:
            report["roll_regime"] = sr.roll_regime
    else:
        report["equilibria"] = []
    return report


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_analyze(cfg: RunConfig, args) -> int:
    report = analysis_report(cfg)
    text = dumps_report(report)
    out = _out_dir(args)
    (out / "report.json").write_text(text)
    sys.stdout.write(text)
    return 0


def _sim_config(cfg: RunConfig, cs: CriticalSet, seed) -> SimConfig:
    sim = cfg.sim
    try:
        return SimConfig(
            N=int(sim.get("n", max(32, 4 * cs.max_index))),
            dt=float(sim.get("dt", 1e-3)),
            t_end=float(sim.get("t_end", 10.0)),
            scheme=str(sim.get("scheme", "IMEX1")).upper(),
            dealias=int(sim.get("dealias", 2)),
            seed=int(seed if seed is not None else sim.get("seed", 0)),
            init=str(sim.get("init", "random")),
            init_amplitude=float(sim.get("init_amplitude", 1e-3)),
            record_every=int(sim.get("record_every", 10)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad sim parameter: {exc}") from exc


def _history_figure(result, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for j in range(result.shell_amplitudes.shape[1]):
        ax1.plot(result.times, result.shell_amplitudes[:, j],
                 label=f"pair {j + 1}")
    ax1.set_ylabel("shell amplitude")
    ax1.legend(loc="best", fontsize="small")
    ax2.plot(result.times, result.energy, color="k")
    ax2.set_xlabel("t")
    ax2.set_ylabel("free energy")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_simulate(cfg: RunConfig, args) -> int:
    dual, cs, params = build_problem(cfg)
    sim = _sim_config(cfg, cs, args.seed)
    result = run_pde(sim, dual, params, cs)
    out = _out_dir(args)

    n_pairs = len(cs.critical_indices)
    header = "t," + ",".join(f"amp{j + 1}" for j in range(n_pairs)) + ",F"
    table = np.column_stack([result.times, result.shell_amplitudes,
                             result.energy])
    np.savetxt(out / "history.csv", table, fmt="%.17g", delimiter=",",
               header=header, comments="")
    save_field(result.final_field, dual, out / "final_field.csv")
    _history_figure(result, out / "history.png")

    rc = reduced_coefficients(cs, dual, params)
    note = {
        "schema_version": SCHEMA_VERSION,
        "observed": "escaped" if result.escape_flag else "settled",
        "escape_time": result.escape_time,
        "dt_final": result.dt_final,
        "final_shell_amplitude": shell_amplitude(result.final_field, cs),
    }
    try:
        verdict = classify(rc, params)
        note["predicted"] = verdict.transition_type
        if params.lam <= cs.lambda0:
            note["consistent"] = not result.escape_flag
            note["note"] = "pre-transition control value: settling expected"
        elif verdict.transition_type == "TypeI":
            note["consistent"] = not result.escape_flag
        elif verdict.transition_type == "TypeII":
            note["consistent"] = bool(result.escape_flag)
        else:
            note["consistent"] = None
    except UnsupportedCase as exc:
        note["predicted"] = None
        note["consistent"] = None
        note["note"] = str(exc)
    (out / "verdict.json").write_text(dumps_report(note))
    sys.stdout.write(dumps_report(note))
    return 0


def _raster_spec(cfg: RunConfig) -> RasterSpec:
    rnd = cfg.render
    try:
        tiles_raw = rnd.get("tiles", "1 1")
        if isinstance(tiles_raw, (list, tuple)):
            tiles = tuple(int(v) for v in tiles_raw)
        else:
            tiles = tuple(int(v) for v in
                          str(tiles_raw).replace(",", " ").split())
        if len(tiles) == 1:
            tiles = (tiles[0], tiles[0])
        return RasterSpec(width=int(rnd.get("width", 512)),
                          height=int(rnd.get("height", 512)),
                          tiles=tiles)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad render parameter: {exc}") from exc


def _raster_figure(raster, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 5))
    ax.imshow(raster.values.T, origin="lower", cmap="gray")
    ax.set_xticks([])
    ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _export_raster(raster, out: Path, stem: str, fmt: str):
    formats = [fmt] if fmt != "all" else ["csv", "pgm", "png"]
    written = []
    for f in formats:
        if f == "json":
            continue
        p = out / f"{stem}.{f}"
        export(raster, p, f)
        written.append(p)
    _raster_figure(raster, out / f"{stem}_figure.png")
    return written


def cmd_render(cfg: RunConfig, args) -> int:
    out = _out_dir(args)
    fmt = args.format or "png"
    spec = _raster_spec(cfg)

    if "field_file" in cfg.render:
        fld, dual = load_field(cfg.render["field_file"])
        raster = rasterize(fld, dual, spec)
        label = classify_pattern(raster, dual)
        _export_raster(raster, out, f"field_{label}", fmt)
        return 0

    dual, cs, params = build_problem(cfg)
    rc = reduced_coefficients(cs, dual, params)
    sr = stability_report(rc, params)
    wanted = str(cfg.render.get("equilibrium", "")).strip()
    phases_raw = cfg.render.get("phases", None)
    phases = None
    if phases_raw is not None:
        if isinstance(phases_raw, (list, tuple)):
            phases = [float(v) for v in phases_raw]
        else:
            phases = [float(v) for v in
                      str(phases_raw).replace(",", " ").split()]

    even = rc.case == CASE_MULT6_RESONANT_EVEN
    selected = [e for e in sr.equilibria
                if not wanted or e.family == wanted]
    if not selected:
        raise ConfigError(
            f"no equilibrium matches id {wanted!r}; available: "
            + ", ".join(e.family for e in sr.equilibria))
    for eqm in selected:
        fld = synthesize_stationary(eqm, cs, phases=phases, even=even)
        raster = rasterize(fld, dual, spec)
        label = classify_pattern(raster, dual)
        prefix = str(cfg.output.get("prefix", "")).strip()
        stem = f"{eqm.family.replace('+', 'p').replace('-', 'm')}_{label}"
        if prefix:
            stem = f"{prefix}_{stem}"
        _export_raster(raster, out, stem, fmt)
    return 0


# Built-in configurations for the canonical patterns.  Ids are descriptive:
# the lattice, the equilibrium family, and the expected pattern label.
_FIGURES = {
    "square-rolls": {
        "lattice": {"k1": "1 0", "k2": "0 1"},
        "model": {"lambda": "auto:1.01", "gamma2": "0", "gamma3": "1"},
        "render": {"equilibrium": "p1", "tiles": "3 3"},
    },
    "square-packed-circles": {
        "lattice": {"k1": "1 0", "k2": "0 1"},
        "model": {"lambda": "auto:1.01", "gamma2": "0", "gamma3": "1"},
        "render": {"equilibrium": "p3", "tiles": "3 3"},
    },
    "oblique-rolls": {
        "lattice": {"l1": "0.12566370614359174 -0.21766090146436738",
                    "l2": "0.0 0.25132741228718347"},
        "model": {"lambda": "auto:1.01", "gamma2": "0", "gamma3": "1"},
        "render": {"equilibrium": "p1", "tiles": "3 3"},
    },
    "hexagon-circles": {
        "lattice": {"k1": "1 0", "k2": "-0.5 -0.8660254037844386"},
        "model": {"lambda": "auto:1.01", "gamma2": "0.5", "gamma3": "1",
                  "even": "true"},
        "render": {"equilibrium": "p4", "tiles": "4 4"},
    },
    "hexagon-rolls": {
        "lattice": {"k1": "1 0", "k2": "-0.5 -0.8660254037844386"},
        "model": {"lambda": "auto:1.01", "gamma2": "0.5", "gamma3": "1",
                  "even": "true"},
        "render": {"equilibrium": "+p1", "tiles": "3 3"},
    },
}


def cmd_reproduce(figure_id: str, args) -> int:
    if figure_id not in _FIGURES:
        raise ConfigError(
            f"unknown figure id {figure_id!r}; known: "
            + ", ".join(sorted(_FIGURES)))
    raw = _FIGURES[figure_id]
    cfg = RunConfig()
    for name, entries in raw.items():
        getattr(cfg, name).update(entries)
    cfg.output["prefix"] = figure_id
    return cmd_render(cfg, args)


def _apply_thread_cap():
    cap = os.environ.get("CH_LATTICE_THREADS")
    if not cap:
        return
    try:
        n = max(1, int(cap))
    except ValueError:
        raise ConfigError(f"CH_LATTICE_THREADS must be an integer, got {cap!r}")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, str(n))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chlattice",
        description="Lattice-periodic Cahn-Hilliard transition analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="path to an INI or JSON run configuration")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the simulation seed")
        p.add_argument("--format", default=None,
                       choices=["csv", "pgm", "png", "json", "all"],
                       help="output format for rendered rasters")

    common(sub.add_parser("analyze", help="JSON transition report"))
    common(sub.add_parser("simulate", help="full spectral PDE run"))
    common(sub.add_parser("render", help="rasterize equilibrium patterns"))
    rep = sub.add_parser("reproduce", help="built-in pattern figures")
    rep.add_argument("figure_id", help="one of: " + ", ".join(sorted(_FIGURES)))
    common(rep, config_required=False)
    return parser


def _error_json(exc: Exception, code: int) -> str:
    payload = {
        "error": type(exc).__name__,
        "message": str(exc),
        "exit_code": code,
    }
    cs = getattr(exc, "critical_set", None)
    if isinstance(cs, CriticalSet):
        payload["critical_set"] = {
            "members": [list(m) for m in cs.members],
            "multiplicity": cs.multiplicity,
        }
    return dumps_report(payload)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _apply_thread_cap()
        if args.command == "reproduce":
            if args.config:
                cfg = load_config(args.config)
                return cmd_render(cfg, args)
            return cmd_reproduce(args.figure_id, args)
        cfg = load_config(args.config)
        if args.command == "analyze":
            return cmd_analyze(cfg, args)
        if args.command == "simulate":
            return cmd_simulate(cfg, args)
        if args.command == "render":
            return cmd_render(cfg, args)
        raise ConfigError(f"unknown command {args.command}")
    except _CONFIG_ERRORS as exc:
        sys.stderr.write(_error_json(exc, 2))
        return 2
    except _UNSUPPORTED_ERRORS as exc:
        sys.stderr.write(_error_json(exc, 3))
        return 3
    except _NUMERICAL_ERRORS as exc:
        sys.stderr.write(_error_json(exc, 4))
        return 4
    except ChLatticeError as exc:
        sys.stderr.write(_error_json(exc, 4))
        return 4


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``coeffs``, ``fringe``, ``zeno`` and ``certify``.

Configuration is a flat ``key = value`` file with ``#`` comments.  Every
output file starts with a ``#`` header holding the tool version, the fully
resolved configuration and the column names, so a data file documents the run
that produced it.  Data files contain no timestamps and are byte-identical
across reruns.

Exit codes: 0 clean, 1 configuration or usage error, 2 partial numeric
failure, 3 certification failure.
"""

from __future__ import annotations

import argparse
import configparser
import datetime
import json
import os
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .decoherence import (CatState, Regime, RegimeValidityError, compare_reservoirs,
                          fringe_trace)
from .kernels import CoefficientMode, QuadratureConfig, trace
from .oracle import (Equation, EvolutionSpec, InterpolatedCoefficients, cat_dimension,
                     evolve_cat, fock_dimension, fringe_from_trajectory,
                     survival_probability)
from .spectral import ReservoirKind, SpectralModel, TemperatureMode, ThermalBath
from .zeno import crossover_map, effective_decay_rate

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL, EXIT_CERTIFY = 0, 1, 2, 3

# key -> (default, parser).  Every accepted key is listed here.
_KEYS = {
    "reservoir": ("ohmic", str),
    "s": (1.0, float),
    "g": (0.1, float),
    "kT": (100.0, float),
    "temperature": ("hight", str),
    "r": (10.0, float),
    "alpha": (1.0, float),
    "regime": ("auto", str),
    "mode": ("nonmarkovian", str),
    # coeffs: time grid in units of 1/omega_0
    "t_max": (50.0, float),
    "n_points": (301, int),
    "spacing": ("linear", str),
    # fringe: grid in Gamma' t
    "gpt_max": (3.0, float),
    "gpt_min": (1e-5, float),
    "gpt_points": (301, int),
    "gpt_spacing": ("log", str),
    # zeno: r and omega_c tau grids
    "r_min": (0.1, float),
    "r_max": (3.0, float),
    "n_r": (60, int),
    "tau_min": (0.05, float),
    "tau_max": (10.0, float),
    "n_tau": (120, int),
    "root_min": (0.0, float),
    "root_max": (0.0, float),
    "n_scan": (400, int),
    # quadrature
    "rel_tol": (1e-8, float),
    "abs_tol": (1e-12, float),
    "omega_max_factor": (60.0, float),
    "max_subdivisions": (2000, int),
    # certify
    "profile": ("default", str),
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    values: Dict[str, object]

    def __getitem__(self, key):
        return self.values[key]

    @property
    def reservoirs(self) -> List[str]:
        return [k.strip() for k in str(self["reservoir"]).split(",") if k.strip()]

    def models(self) -> List[SpectralModel]:
        out = []
        for name in self.reservoirs:
            kind = ReservoirKind.parse(name)
            s = self["s"] if kind is ReservoirKind.CUSTOM else kind.s
            out.append(SpectralModel(s=s, g=self["g"], omega_c=self["r"], kind=kind))
        return out

    def model(self) -> SpectralModel:
        models = self.models()
        if len(models) != 1:
            raise ConfigError("this command takes exactly one reservoir")
        return models[0]

    def bath(self) -> ThermalBath:
        return ThermalBath(self["kT"], TemperatureMode(self["temperature"]))

    def coefficient_mode(self) -> CoefficientMode:
        return CoefficientMode(self["mode"])

    def regime(self) -> Regime:
        if self["regime"] == "auto":
            return Regime.OFF_RESONANT if self["r"] < 1 else Regime.RESONANT
        return Regime(self["regime"])

    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(self["rel_tol"], self["abs_tol"], self["omega_max_factor"],
                                self["max_subdivisions"])

    def echo(self) -> List[str]:
        return [f"{k} = {_fmt_value(self.values[k])}" for k in sorted(self.values)]


def _fmt_value(v):
    return repr(v) if isinstance(v, float) else str(v)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def parse_config(text: str = "", overrides: Optional[Dict[str, str]] = None) -> RunConfig:
    """Parse flat ``key = value`` text; unknown or duplicate keys are errors."""
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",),
                                       interpolation=None, strict=True)
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    raw = dict(parser["run"])
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(set(raw) - set(_KEYS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    values = {}
    for key, (default, conv) in _KEYS.items():
        if key in raw:
            try:
                values[key] = conv(raw[key])
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw[key]!r}") from exc
        else:
            values[key] = default
    cfg = RunConfig(values)
    try:
        cfg.models()
        cfg.bath()
        cfg.coefficient_mode()
        cfg.regime()
        cfg.quadrature()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if values["spacing"] not in ("linear", "log") or values["gpt_spacing"] not in ("linear", "log"):
        raise ConfigError("spacing must be 'linear' or 'log'")
    if values["profile"] not in ("default", "smoke"):
        raise ConfigError("profile must be 'default' or 'smoke'")
    return cfg


# --- output helpers --------------------------------------------------------------

def _header(command: str, cfg: RunConfig, columns: List[str], extra=()) -> str:
    lines = [f"# qbm_decoherence {__version__}", f"# command: {command}"]
    lines += [f"# config: {line}" for line in cfg.echo()]
    lines += [f"# {line}" for line in extra]
    lines.append("# columns: " + ",".join(columns))
    return "\n".join(lines) + "\n"


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(header)
        for row in rows:
            fh.write(",".join(c if isinstance(c, str) else _fmt(c) for c in row) + "\n")


def _grid(lo, hi, n, spacing, with_zero=False):
    if n < 1:
        raise ConfigError("grid sizes must be positive")
    if n == 1:
        pts = np.array([hi])
    elif spacing == "log":
        if not 0 < lo < hi:
            raise ConfigError("log grids need 0 < min < max")
        pts = np.geomspace(lo, hi, n)
    else:
        pts = np.linspace(lo, hi, n)
    if with_zero and pts[0] != 0:
        pts = np.concatenate([[0.0], pts])
    return pts


# --- commands ------------------------------------------------------------------

def cmd_coeffs(cfg: RunConfig, out: Path, workers: Optional[int]) -> int:
    model = cfg.model()
    bath = cfg.bath()
    if cfg["t_max"] == 0 or cfg["n_points"] == 1:
        times = np.array([0.0])
    elif cfg["spacing"] == "log":
        times = _grid(cfg["t_max"] / 1e4, cfg["t_max"], cfg["n_points"] - 1, "log",
                      with_zero=True)
    else:
        times = _grid(0.0, cfg["t_max"], cfg["n_points"], "linear")
    tr = trace(model, bath, times, cfg.coefficient_mode(), cfg.quadrature(), workers)
    cols = ["t", "omega_c_t", "delta", "gamma", "heating", "big_gamma"]
    header = _header("coeffs", cfg, cols, [f"delta_M = {_fmt(tr.delta_markov)}",
                                           f"gamma_M = {_fmt(tr.gamma_markov)}"])
    rows = zip(tr.times, tr.omega_c_times, tr.delta, tr.gamma, tr.heating, tr.big_gamma)
    _write_csv(out / "coeffs.csv", header, rows)
    return EXIT_OK


_FRINGE_GP = """# gnuplot script for fringe.csv
set datafile separator ','
set datafile commentschars '#'
set xlabel "Gamma' t"
set ylabel 'F'
set yrange [0:1.05]
set key top right
plot {plots}
set origin 0.45,0.45
set size 0.5,0.5
set logscale x
set multiplot
plot {inset}
unset multiplot
"""


def cmd_fringe(cfg: RunConfig, out: Path, workers: Optional[int]) -> int:
    models = cfg.models()
    bath = cfg.bath()
    regime = cfg.regime()
    cat = CatState(cfg["alpha"])
    w0 = models[0].omega_0
    gpt = _grid(cfg["gpt_min"], cfg["gpt_max"], cfg["gpt_points"], cfg["gpt_spacing"],
                with_zero=True)
    times = gpt / (2.0 * cfg["g"] ** 2 * w0) if cfg["g"] > 0 else gpt
    mode = cfg.coefficient_mode()
    notes = []
    try:
        comp = compare_reservoirs(cat, models, bath, times, regime, cfg.quadrature(), mode,
                                  workers=workers)
        markov = [fringe_trace(cat, m, bath, times, regime, CoefficientMode.MARKOVIAN,
                               cfg.quadrature()) for m in models]
    except RegimeValidityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    for tr in comp.traces:
        notes += list(tr.warnings)
    for n in notes:
        print(f"warning: {n}", file=sys.stderr)

    labels = [m.label for m in models]
    cols = ["Gamma_prime_t"] + [f"F_{lab}" for lab in labels] + \
        [f"F_markovian_{lab}" for lab in labels]
    header = _header("fringe", cfg, cols, [f"regime = {regime.value}"] +
                     [f"warning: {n}" for n in notes])
    rows = zip(gpt, *[tr.visibility for tr in comp.traces], *[tr.visibility for tr in markov])
    _write_csv(out / "fringe.csv", header, rows)

    report_cols = ["rank", "reservoir", "area"]
    report = _header("fringe", cfg, report_cols, [f"window Gamma' t = {_fmt(comp.window)}",
                                                  "ranking: " + " > ".join(comp.ranking)])
    _write_csv(out / "fringe_ranking.csv", report,
               [(str(i + 1), lab, comp.area_of(lab)) for i, lab in enumerate(comp.ranking)])
    print("ranking (slowest decoherence first): " + ", ".join(comp.ranking))

    plots = ", ".join(f"'fringe.csv' using 1:{k + 2} with lines title '{lab}'"
                      for k, lab in enumerate(labels))
    n = len(labels)
    inset = ", ".join(
        f"'fringe.csv' using 1:{k + 2} with lines title '{lab}', "
        f"'fringe.csv' using 1:{k + 2 + n} with lines dt 2 title '{lab} Markovian'"
        for k, lab in enumerate(labels))
    (out / "fringe.gp").write_text(_FRINGE_GP.format(plots=plots, inset=inset), encoding="utf-8")
    return EXIT_OK


_ZENO_GP = """# gnuplot script for zeno_map.csv; bold line marks ratio = 1
set datafile separator ','
set datafile commentschars '#'
set xlabel 'r'
set ylabel 'omega_c tau'
set logscale y
set view map
set dgrid3d {n_tau},{n_r}
set contour base
set cntrparam levels discrete 1.0
set style increment user
set style line 1 lw 3 lc rgb 'black'
splot 'zeno_map.csv' using 1:2:3 with pm3d notitle, \\
      'zeno_map.csv' using 1:2:3 with lines ls 1 nosurface title 'ratio = 1'
"""


def cmd_zeno(cfg: RunConfig, out: Path, workers: Optional[int]) -> int:
    model = cfg.model()
    r_grid = _grid(cfg["r_min"], cfg["r_max"], cfg["n_r"], "linear")
    tau_grid = _grid(cfg["tau_min"], cfg["tau_max"], cfg["n_tau"], "log")
    root_range = None
    if cfg["root_max"] > 0:
        root_range = (cfg["root_min"], cfg["root_max"])
    zmap = crossover_map(model.kind, cfg["g"], cfg.bath(), r_grid, tau_grid, cfg.quadrature(),
                         cfg.coefficient_mode(), s=model.s, root_range=root_range,
                         n_scan=cfg["n_scan"], workers=workers)
    classes = zmap.classification
    header = _header("zeno", cfg, ["r", "omega_c_tau", "ratio", "class"],
                     [f"failure: {f}" for f in zmap.failures])
    rows = ((r, t, zmap.ratio[i, j] if np.isfinite(zmap.ratio[i, j]) else "nan", classes[i, j])
            for i, r in enumerate(r_grid) for j, t in enumerate(tau_grid))
    _write_csv(out / "zeno_map.csv", header, rows)
    root_header = _header("zeno", cfg, ["r", "tau_star"])
    _write_csv(out / "zeno_roots.csv", root_header,
               ((r, " ".join(_fmt(x) for x in roots)) for r, roots in zip(r_grid, zmap.roots)))
    (out / "zeno_map.gp").write_text(_ZENO_GP.format(n_tau=tau_grid.size, n_r=r_grid.size),
                                     encoding="utf-8")
    for f in zmap.failures:
        print(f"warning: {f}", file=sys.stderr)
    return EXIT_OK if zmap.complete else EXIT_PARTIAL


# --- certification ---------------------------------------------------------------

def _abs_dev(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) if np.size(a) else 0.0


def _rel_dev(value, ref) -> float:
    return abs(value - ref) / abs(ref) if ref != 0 else abs(value - ref)


def _fringe_suite(name, g, r, equation, regime, t_max, tol, n_samples, workers):
    model = SpectralModel.named(ReservoirKind.OHMIC, g, r)
    bath = ThermalBath(100.0)
    alpha = 1.0
    times = np.linspace(0.0, t_max, n_samples)
    closed = fringe_trace(CatState(alpha), model, bath, times, regime)
    coeffs = InterpolatedCoefficients.from_model(model, bath, t_max, workers=workers)
    spec = EvolutionSpec(equation, coeffs, (0.0, t_max), omega_0=model.omega_0)
    dim = max(cat_dimension(alpha), 50 if regime is Regime.RESONANT else 0)
    devs = {}
    fringes = {}
    for d in (dim, 2 * dim):
        fringes[d] = fringe_from_trajectory(evolve_cat(alpha, spec, times, dim=d))
        devs[d] = _abs_dev(fringes[d], closed.visibility)
    doubling = _abs_dev(fringes[dim], fringes[2 * dim])
    return {
        "suite": name, "passed": bool(devs[dim] <= tol and doubling <= tol / 4),
        "max_deviation": devs[dim], "tolerance": tol, "dim": dim,
        "max_deviation_doubled_dim": devs[2 * dim], "dim_doubling_change": doubling,
        "dim_doubling_tolerance": tol / 4, "t_max": t_max,
        "gamma_prime_t_max": 2 * g ** 2 * t_max,
    }


def _survival_suites(g, workers):
    model = SpectralModel.named(ReservoirKind.OHMIC, g, 1.0)
    bath = ThermalBath(100.0)
    tau, n_meas = 0.3, 10
    coeffs = InterpolatedCoefficients.from_model(model, bath, tau, workers=workers)
    spec = EvolutionSpec(Equation.SECULAR, coeffs, (0.0, tau))
    expected = effective_decay_rate(model, bath, tau)
    rates, doubled = {}, {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for n in (0, 1, 2):
            res = survival_probability(n, tau, n_meas, spec)
            big = survival_probability(n, tau, n_meas, spec, dim=2 * fock_dimension(n))
            rates[n] = res.fitted_rate
            doubled[n] = big.fitted_rate
    dev = _rel_dev(rates[1], expected)
    spread = (max(rates.values()) - min(rates.values())) / max(abs(min(rates.values())), 1e-300) \
        if any(rates.values()) else 0.0
    doubling = max(_rel_dev(doubled[n], rates[n]) for n in rates)
    rate_suite = {
        "suite": "zeno_rate", "passed": bool(dev <= 0.05 and doubling <= 0.05 / 4),
        "max_deviation": dev, "tolerance": 0.05, "fitted_rate_n1": rates[1],
        "expected_rate": expected, "dim_doubling_change": doubling,
        "dim_doubling_tolerance": 0.05 / 4,
    }
    indep_suite = {
        "suite": "n_independence", "passed": bool(spread <= 0.10 and doubling <= 0.10 / 4),
        "max_deviation": spread, "tolerance": 0.10,
        "fitted_rates": {str(n): v for n, v in rates.items()},
        "dim_doubling_change": doubling, "dim_doubling_tolerance": 0.10 / 4,
    }
    return [rate_suite, indep_suite]


def cmd_certify(cfg: RunConfig, out: Path, workers: Optional[int]) -> int:
    g = 0.0 if cfg["profile"] == "smoke" else None
    suites = [
        _fringe_suite("fringe_off_resonant", 0.1 if g is None else g, 0.1, Equation.SECULAR,
                      Regime.OFF_RESONANT, 25.0, 0.02, 51, workers),
        # Up to Gamma' t = 0.012, where the closed form is within 5% of its floor.
        _fringe_suite("fringe_resonant", 0.1 if g is None else g, 10.0, Equation.NON_SECULAR,
                      Regime.RESONANT, 0.6, 0.05, 31, workers),
    ]
    suites += _survival_suites(0.05 if g is None else g, workers)
    passed = all(s["passed"] for s in suites)
    report = {
        "tool": "qbm_decoherence", "version": __version__,
        "config": dict(sorted((k, v) for k, v in cfg.values.items())),
        "suites": suites, "passed": passed,
        "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    with open(out / "certify_report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for s in suites:
        status = "PASS" if s["passed"] else "FAIL"
        print(f"{status} {s['suite']}: deviation {s['max_deviation']:.4g} "
              f"(tolerance {s['tolerance']:g})")
    return EXIT_OK if passed else EXIT_CERTIFY


_COMMANDS = {"coeffs": cmd_coeffs, "fringe": cmd_fringe, "zeno": cmd_zeno,
             "certify": cmd_certify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qbm-decoherence", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(_COMMANDS))
    p.add_argument("--config", type=Path, help="flat key = value configuration file")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes for sweeps (default: available cores)")
    p.add_argument("--mode", choices=["nonmarkovian", "markovian"])
    p.add_argument("--regime", choices=["off", "res"])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        cfg = parse_config(text, {"mode": args.mode, "regime": args.regime})
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    workers = args.threads if args.threads is not None else (os.cpu_count() or 1)
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, args.out, workers)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface.

Subcommands cover the full pipeline: simulate a trace, transform it to
a spectrum with labeled peaks, fit the trace model, combine fits at two
drive powers into a field reconstruction, and run the self-test battery.
Every parameter can come from a YAML config file (--config); explicit
command line flags win over config values, which win over defaults.
Runs are deterministic for a given config and seed.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np
import yaml

from . import dataio, selftest
from .analytic import phase_params_for, population_dd, population_ramsey
from .errors import SensorError, ValidationError
from .estimation import fit_trace, two_power_summary
from .model import (
    DEFAULT_NU_TRANSITION_MHZ,
    DEFAULT_T2_STAR_US,
    RfFieldParams,
    SpinSystem,
    TimeTrace,
    validate_field,
    validate_system,
)
from .noise import ReadoutModel, sample_trace
from .propagator import StaticHamiltonian, auto_config, simulate_populations
from .spectral import assign_harmonics, find_peaks, spectrum


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ValidationError(f"config {path} is not valid YAML: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ValidationError(f"config {path} must be a mapping, got {type(doc).__name__}")
    return doc


class _Resolver:
    """Merge precedence: CLI flag > config entry > default."""

    def __init__(self, args: argparse.Namespace, config: dict, known: set):
        self.args = args
        self.config = config
        unknown = set(config) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")

    def get(self, name: str, default=None):
        value = getattr(self.args, name, None)
        if value is None:
            value = self.config.get(name, default)
        return value


def _fmt9(x: float) -> str:
    return f"{x:.9g}"


_SIM_KEYS = {
    "protocol", "engine", "frame", "nu_z", "nu_x", "nu_dc", "nu_rf", "phi0",
    "power_mw", "nu_transition", "spectator_factor", "coherence_order",
    "t2_star", "tau_min", "tau_max", "tau_points", "tau_pad",
    "noise", "shots", "rate0", "rate1", "seed", "out",
}


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _Resolver(args, _load_config(args.config), _SIM_KEYS)
    protocol = cfg.get("protocol", "ramsey")
    engine = cfg.get("engine", "analytic")
    if engine not in ("analytic", "numeric"):
        raise ValidationError(f"engine must be 'analytic' or 'numeric', got {engine!r}")

    field = validate_field(
        RfFieldParams(
            nu_z=float(cfg.get("nu_z", 0.0)),
            nu_x=float(cfg.get("nu_x", 0.0)),
            nu_rf=float(cfg.get("nu_rf", 2.0)),
            phi0=float(cfg.get("phi0", 0.0)),
            nu_dc=float(cfg.get("nu_dc", 0.0)),
            power_mw=cfg.get("power_mw"),
        )
    )
    system = SpinSystem(
        nu_transition=float(cfg.get("nu_transition", DEFAULT_NU_TRANSITION_MHZ)),
        coherence_order=int(cfg.get("coherence_order", 1)),
        t2_star=float(cfg.get("t2_star", DEFAULT_T2_STAR_US)),
    )
    validate_system(system)

    tau_min = float(cfg.get("tau_min", 0.02))
    tau_max = float(cfg.get("tau_max", 30.0))
    tau_points = int(cfg.get("tau_points", 1500))
    if tau_points < 2 or tau_max <= tau_min:
        raise ValidationError("need tau_points >= 2 and tau_max > tau_min")
    tau_pad = float(cfg.get("tau_pad", 0.5))
    tau = np.linspace(tau_min, tau_max, tau_points)

    if engine == "analytic":
        params = phase_params_for(field, system, protocol=protocol, tau_pad=tau_pad)
        if protocol == "ramsey":
            pops = population_ramsey(params, field, system.coherence_order, tau, system.t2_star)
        else:
            pops = population_dd(params, field, system.coherence_order, tau)
    else:
        static = StaticHamiltonian.for_transition(
            system.nu_transition, float(cfg.get("spectator_factor", 50.0))
        )
        prop = auto_config(static, field, frame=cfg.get("frame", "rotating"))
        pops = simulate_populations(static, field, tau, prop, protocol, tau_pad)

    meta = {
        "protocol": protocol,
        "engine": engine,
        "nu_rf": field.nu_rf,
        "phi0": field.phi0,
        "nu_z": field.nu_z,
        "nu_x": field.nu_x,
        "nu_dc": field.nu_dc,
        "t2_star": system.t2_star if (engine == "analytic" and protocol == "ramsey") else math.inf,
        "coherence_order": system.coherence_order,
        "nu_transition": system.nu_transition,
        "tau_pad": tau_pad,
    }
    if field.power_mw is not None:
        meta["power_mw"] = field.power_mw
    trace = TimeTrace(tau_us=tau, population=np.asarray(pops), meta=meta)

    if bool(cfg.get("noise", False)):
        model = ReadoutModel(
            rate0=float(cfg.get("rate0", 0.03)),
            rate1=float(cfg.get("rate1", 0.02)),
            shots=int(cfg.get("shots", 100_000)),
        )
        trace = sample_trace(trace, model, seed=int(cfg.get("seed", 0)))

    out = cfg.get("out")
    if out is None:
        raise ValidationError("simulate needs an output path (--out or config 'out')")
    dataio.write_trace(out, trace)
    print(f"wrote {trace.n} samples ({protocol}, {engine}) to {out}")
    return 0


_SPEC_KEYS = {"window", "pad_factor", "remove_mean", "threshold", "nu_rf", "out", "peaks"}


def cmd_spectrum(args: argparse.Namespace) -> int:
    cfg = _Resolver(args, _load_config(args.config), _SPEC_KEYS | {"infile"})
    trace = dataio.read_trace(args.infile)
    spec = spectrum(
        trace,
        window=cfg.get("window", "rect"),
        pad_factor=int(cfg.get("pad_factor", 8)),
        remove_mean=bool(cfg.get("remove_mean", True)),
    )
    out = cfg.get("out")
    if out:
        dataio.write_spectrum(out, spec)
        print(f"wrote {spec.freq_mhz.size} bins to {out}")
    peaks_out = cfg.get("peaks")
    threshold = float(cfg.get("threshold", 0.04))
    peaks = find_peaks(spec, threshold=threshold)
    nu_rf = cfg.get("nu_rf", trace.meta.get("nu_rf"))
    if nu_rf is not None:
        assigned = assign_harmonics(peaks, float(nu_rf))
        print("n branch freq_mhz magnitude shift_mhz")
        for a in assigned:
            print(f"{a.n} {a.branch} {_fmt9(a.freq_mhz)} {_fmt9(a.magnitude)} {_fmt9(a.shift_mhz)}")
        if peaks_out:
            dataio.write_peaks(peaks_out, assigned, meta={"threshold": threshold, "nu_rf": float(nu_rf)})
            print(f"wrote {len(assigned)} peaks to {peaks_out}")
    else:
        print("freq_mhz magnitude")
        for p in peaks:
            print(f"{_fmt9(p.freq_mhz)} {_fmt9(p.magnitude)}")
        if peaks_out:
            raise ValidationError("labeling peaks needs nu_rf (flag, config, or trace meta)")
    return 0


_FIT_KEYS = {
    "protocol", "nu_rf", "t2_star", "out",
    "init_alpha", "init_shift", "init_delta", "init_phi0",
}


def cmd_fit(args: argparse.Namespace) -> int:
    cfg = _Resolver(args, _load_config(args.config), _FIT_KEYS | {"infile"})
    trace = dataio.read_trace(args.infile)
    protocol = cfg.get("protocol", trace.meta.get("protocol", "ramsey"))
    nu_rf = cfg.get("nu_rf")
    t2_star = cfg.get("t2_star")

    init = {}
    for key, name in (
        ("alpha", "init_alpha"),
        ("shift_mhz", "init_shift"),
        ("delta", "init_delta"),
        ("phi0", "init_phi0"),
    ):
        value = cfg.get(name)
        if value is not None:
            init[key] = float(value)

    fit = fit_trace(
        trace,
        protocol=protocol,
        nu_rf=None if nu_rf is None else float(nu_rf),
        t2_star=None if t2_star is None else float(t2_star),
        init=init or None,
    )
    for key in ("alpha", "shift_mhz", "delta", "phi0", "scale", "offset"):
        print(f"{key} = {_fmt9(fit.params[key])} +- {_fmt9(fit.sigma[key])}")
    chi2 = "n/a" if fit.chi2_red is None else _fmt9(fit.chi2_red)
    print(
        f"residual_rms = {_fmt9(fit.residual_rms)}  chi2_red = {chi2}  "
        f"iterations = {fit.n_iter}  init = {fit.init_source}"
    )
    if fit.shift_sign_ambiguous:
        print("warning: mirrored shift sign fits equally well")
    out = cfg.get("out")
    if out:
        dataio.write_fit(out, fit)
        print(f"wrote fit to {out}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    fit_a = dataio.read_fit(args.fit_a)
    fit_b = dataio.read_fit(args.fit_b)
    summary = two_power_summary(fit_a, fit_b, float(args.nu_transition))
    pa, pb = summary["powers_mw"]
    print(f"drive powers: {_fmt9(pa)} and {_fmt9(pb)} mW")
    print(f"carrier: {_fmt9(summary['nu_rf'])} MHz, transition: {_fmt9(summary['nu_transition'])} MHz")
    rows = (
        ("nu_z_mhz", "longitudinal amplitude"),
        ("nu_x_mhz", "transverse amplitude"),
        ("nu_dc_mhz", "static offset"),
        ("nu_bs_mhz", "quadratic shift"),
        ("angle_deg", "field angle (deg)"),
    )
    for key, label in rows:
        a, b = summary[key]
        print(f"{label}: {_fmt9(a)}  {_fmt9(b)}")
    print(
        f"amplitude ratio: measured {_fmt9(summary['alpha_ratio_measured'])}, "
        f"sqrt-power law {_fmt9(summary['alpha_ratio_expected'])}, "
        f"deviation {_fmt9(100.0 * summary['alpha_ratio_rel_dev'])}%"
    )
    if args.out:
        dataio.write_summary(args.out, summary)
        print(f"wrote summary to {args.out}")
    return 0


def cmd_selftest(args: argparse.Namespace) -> int:
    results = selftest.run_all(quick=args.quick)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name} ({r.elapsed_s:.1f} s)")
        for key, value in sorted(r.details.items()):
            print(f"     {key} = {value}")
        failed += 0 if r.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvrf",
        description="Simulate and invert free-evolution sensing of an oscillating field.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a population trace")
    sim.add_argument("--config", help="YAML file with parameter defaults")
    sim.add_argument("--protocol", choices=("ramsey", "dd"))
    sim.add_argument("--engine", choices=("analytic", "numeric"))
    sim.add_argument("--frame", choices=("rotating", "lab"))
    for name in ("nu-z", "nu-x", "nu-dc", "nu-rf", "phi0", "power-mw",
                 "nu-transition", "spectator-factor", "t2-star",
                 "tau-min", "tau-max", "tau-pad", "rate0", "rate1"):
        sim.add_argument(f"--{name}", type=float)
    sim.add_argument("--coherence-order", type=int)
    sim.add_argument("--tau-points", type=int)
    sim.add_argument("--noise", action="store_const", const=True)
    sim.add_argument("--shots", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out")
    sim.set_defaults(func=cmd_simulate)

    spc = sub.add_parser("spectrum", help="transform a trace and label its peaks")
    spc.add_argument("infile", help="trace CSV")
    spc.add_argument("--config")
    spc.add_argument("--window", choices=("rect", "hann"))
    spc.add_argument("--pad-factor", type=int)
    spc.add_argument("--remove-mean", action="store_const", const=True)
    spc.add_argument("--threshold", type=float)
    spc.add_argument("--nu-rf", type=float)
    spc.add_argument("--out")
    spc.add_argument("--peaks")
    spc.set_defaults(func=cmd_spectrum)

    fit = sub.add_parser("fit", help="fit the trace model")
    fit.add_argument("infile", help="trace CSV")
    fit.add_argument("--config")
    fit.add_argument("--protocol", choices=("ramsey", "dd"))
    fit.add_argument("--nu-rf", type=float)
    fit.add_argument("--t2-star", type=float)
    fit.add_argument("--init-alpha", type=float)
    fit.add_argument("--init-shift", type=float)
    fit.add_argument("--init-delta", type=float)
    fit.add_argument("--init-phi0", type=float)
    fit.add_argument("--out")
    fit.set_defaults(func=cmd_fit)

    rep = sub.add_parser("report", help="reconstruct the field from two fits")
    rep.add_argument("--fit-a", required=True)
    rep.add_argument("--fit-b", required=True)
    rep.add_argument("--nu-transition", type=float, default=DEFAULT_NU_TRANSITION_MHZ)
    rep.add_argument("--out")
    rep.set_defaults(func=cmd_report)

    st = sub.add_parser("selftest", help="run the acceptance battery")
    st.add_argument("--quick", action="store_true", help="skip the slow numeric checks")
    st.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SensorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())

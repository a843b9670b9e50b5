"""Command-line front end: flat configs in, CSV plus JSON provenance out.

Flags may come inline or from a `key = value` config file (inline
wins); a JSON run summary can be re-fed as the config of a new run.
Exit codes: 0 success, 1 domain or usage errors, 2 numerical failures.
"""

from __future__ import annotations

import time
from dataclasses import replace
from datetime import datetime, timezone

import click
import numpy as np

from . import __version__
from .channels import CHANNELS, table_rows
from .config import (
    canonical_value,
    coerce_float,
    coerce_float_list,
    coerce_int,
    coerce_str,
    coerce_str_list,
    config_digest,
    load_config,
)
from .coulomb import WannierParams, zeta_sweep
from .errors import DomainError, NumericsError
from .flow import CLASS_NAMES, FlowSettings, integrate_flow
from .meanfield import (
    gl_coefficients,
    order_amplitude,
    quasiparticle_spectrum,
    small_gap_amplitude,
    soi_band_edge,
    soi_strength_k,
    zeeman_selection,
)
from .model import ModelParams
from .output import atomic_write_text, run_summary, write_csv, write_summary
from .susceptibility import DEFAULT_CHANNELS, DIVERGED, chi_rpa, temperature_sweep

try:
    from click.core import ParameterSource
except ImportError:  # pragma: no cover - click < 8 not supported
    ParameterSource = None


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class Resolver:
    """Merges inline flags over config-file values over flag defaults."""

    def __init__(self, ctx, config_path, subcommand):
        self.ctx = ctx
        self.subcommand = subcommand
        self.file_values = load_config(config_path) if config_path else {}
        recorded = self.file_values.pop("subcommand", None)
        if recorded is not None and recorded != subcommand:
            raise click.UsageError(
                f"config was written by subcommand {recorded!r}, not {subcommand!r}")
        self.used = set()
        self.values = {}

    def from_file(self, name):
        return name in self.file_values

    def from_flag(self, name):
        return self.ctx.get_parameter_source(name) is ParameterSource.COMMANDLINE

    def get(self, name, cast, flag_value):
        if name in self.file_values:
            # recognized even when an inline flag shadows it
            self.used.add(name)
        if self.from_flag(name):
            value = flag_value
        elif name in self.file_values:
            value = cast(name, self.file_values[name])
        else:
            value = flag_value
        self.values[name] = value
        return value

    def override(self, name, value):
        # computed defaults enter the echoed config, so reruns are exact
        self.values[name] = value

    def finish(self):
        unknown = sorted(set(self.file_values) - self.used)
        if unknown:
            raise click.UsageError(
                f"unknown config key(s): {', '.join(unknown)}")
        config = {"subcommand": self.subcommand}
        for name, value in self.values.items():
            if value is None:
                continue
            config[name] = canonical_value(value)
        return config


def _coerce_unit(key, text):
    mapping = {"ts": "ts", "tp": "tp", "ev": "eV"}
    lowered = str(text).strip().lower()
    if lowered not in mapping:
        raise DomainError(f"{key}: unit must be ts, tp or eV, got {text!r}")
    return mapping[lowered]


def _resolve_params(res, kw, temperature=False):
    fields = {}
    for name in ("t_s", "t_p", "delta", "u", "j", "jp"):
        fields[name] = res.get(name, coerce_float, kw[name])
    unit = _coerce_unit("unit", res.get("unit", coerce_str, kw["unit"]))
    res.override("unit", unit)
    if unit == "ts" and fields["t_s"] != 1.0:
        raise click.UsageError(
            "conflicting units: unit = ts declares energies in units of t_s, "
            "so t_s must equal 1")
    if unit == "tp" and fields["t_p"] != 1.0:
        raise click.UsageError(
            "conflicting units: unit = tp declares energies in units of t_p, "
            "so t_p must equal 1")
    if temperature:
        fields["temperature"] = res.get("temperature", coerce_float, kw["temperature"])
    return ModelParams(**fields)


def _resolve_grid(res, kw, params):
    """Log-spaced temperature grid plus the list of gaps to sweep."""
    t_min = res.get("t_min", coerce_float, kw["t_min"])
    t_max = res.get("t_max", coerce_float, kw["t_max"])
    t_points = res.get("t_points", coerce_int, kw["t_points"])
    if t_min is None:
        t_min = 1e-3 * params.t_p
    if t_max is None:
        t_max = params.t_p
    if not 0.0 < t_min <= t_max:
        raise click.UsageError("need 0 < t-min <= t-max")
    if t_points < 1:
        raise click.UsageError("t-points must be at least 1")
    res.override("t_min", float(t_min))
    res.override("t_max", float(t_max))
    temperatures = np.logspace(np.log10(t_min), np.log10(t_max), t_points)
    deltas_text = res.get("deltas", coerce_str, kw["deltas"])
    if deltas_text is None:
        deltas = [params.delta]
    else:
        deltas = coerce_float_list("deltas", deltas_text)
    res.override("deltas", [float(d) for d in deltas])
    return temperatures, deltas


def config_option(f):
    return click.option(
        "--config", "config_path", type=click.Path(exists=True, dir_okay=False),
        default=None, help="flat key = value file, or a JSON run summary")(f)


def model_options(f):
    for option in reversed((
        click.option("--t-s", "t_s", type=float, default=1.0, show_default=True,
                     help="s-band hopping"),
        click.option("--t-p", "t_p", type=float, default=1.0, show_default=True,
                     help="p-band hopping"),
        click.option("--delta", type=float, default=0.0, show_default=True,
                     help="band gap at k = 0"),
        click.option("--u", type=float, default=0.0, show_default=True,
                     help="intra-orbital repulsion U"),
        click.option("--j", type=float, default=0.0, show_default=True,
                     help="Hund coupling J (negative means ferromagnetic)"),
        click.option("--jp", type=float, default=0.0, show_default=True,
                     help="pair hopping J'"),
        click.option("--unit", type=str, default="tp", show_default=True,
                     help="energy unit declaration: ts, tp or eV"),
    )):
        f = option(f)
    return f


def grid_options(f):
    for option in reversed((
        click.option("--t-min", "t_min", type=float, default=None,
                     help="lowest temperature  [default: 1e-3 t_p]"),
        click.option("--t-max", "t_max", type=float, default=None,
                     help="highest temperature  [default: t_p]"),
        click.option("--t-points", "t_points", type=int, default=16,
                     show_default=True, help="log-spaced grid size"),
        click.option("--deltas", type=str, default=None,
                     help="comma list of gaps  [default: the --delta value]"),
    )):
        f = option(f)
    return f


def output_options(csv_default, json_default):
    def wrap(f):
        f = click.option("--out-json", "out_json", type=click.Path(dir_okay=False),
                         default=json_default, show_default=True,
                         help="JSON run summary path")(f)
        if csv_default is not None:
            f = click.option("--out-csv", "out_csv", type=click.Path(dir_okay=False),
                             default=csv_default, show_default=True,
                             help="CSV output path")(f)
        return f
    return wrap


@click.group()
@click.version_option(version=__version__, prog_name="soichain")
def cli():
    """Correlation-induced spin-orbit interaction in a three-orbital chain."""


@cli.command("flow")
@config_option
@model_options
@click.option("--temperature", type=float, default=0.0, show_default=True)
@click.option("--k-points", "k_points", type=int, default=512, show_default=True)
@click.option("--l-max", "l_max", type=float, default=30.0, show_default=True)
@output_options("flow.csv", "flow.json")
@click.pass_context
def flow_cmd(ctx, config_path, **kw):
    """Integrate the vertex flow and record the trajectory."""
    started = _now()
    clock = time.monotonic()
    res = Resolver(ctx, config_path, "flow")
    params = _resolve_params(res, kw, temperature=True)
    k_points = res.get("k_points", coerce_int, kw["k_points"])
    l_max = res.get("l_max", coerce_float, kw["l_max"])
    out_csv = res.get("out_csv", coerce_str, kw["out_csv"])
    out_json = res.get("out_json", coerce_str, kw["out_json"])
    config = res.finish()
    digest = config_digest(config)

    trajectory = integrate_flow(params, FlowSettings(k_points=k_points, l_max=l_max))
    rows = [(l, lam, *values) for l, lam, values
            in zip(trajectory.l, trajectory.lam, trajectory.values)]
    write_csv(out_csv, ["l", "lambda", *CLASS_NAMES], rows, digest)
    result = {
        "termination": trajectory.termination,
        "l_div": trajectory.l_div,
        "diverging_component": trajectory.diverging_component,
        "final": {name: float(value)
                  for name, value in zip(CLASS_NAMES, trajectory.final)},
        "max_leakage": trajectory.max_leakage,
    }
    write_summary(out_json, run_summary(config, digest, trajectory.termination,
                                        [out_csv, out_json], started,
                                        time.monotonic() - clock, result))
    click.echo(f"flow: {trajectory.termination} after {len(trajectory.l)} steps "
               f"-> {out_csv}")


@cli.command("sweep-chi")
@config_option
@model_options
@grid_options
@click.option("--channels", type=str, default=",".join(DEFAULT_CHANNELS),
              show_default=True, help="comma list of channel names")
@click.option("--k-points", "k_points", type=int, default=512, show_default=True)
@click.option("--l-max", "l_max", type=float, default=30.0, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@output_options("sweep-chi.csv", "sweep-chi.json")
@click.pass_context
def sweep_chi_cmd(ctx, config_path, **kw):
    """Channel susceptibilities over a temperature (and gap) grid."""
    started = _now()
    clock = time.monotonic()
    res = Resolver(ctx, config_path, "sweep-chi")
    params = _resolve_params(res, kw)
    temperatures, deltas = _resolve_grid(res, kw, params)
    channels = coerce_str_list("channels", res.get("channels", coerce_str,
                                                   kw["channels"]))
    res.override("channels", channels)
    for name in channels:
        if name not in CHANNELS:
            raise click.UsageError(
                f"unknown channel {name!r}; choose from {', '.join(CHANNELS)}")
    k_points = res.get("k_points", coerce_int, kw["k_points"])
    l_max = res.get("l_max", coerce_float, kw["l_max"])
    threads = res.get("threads", coerce_int, kw["threads"])
    out_csv = res.get("out_csv", coerce_str, kw["out_csv"])
    out_json = res.get("out_json", coerce_str, kw["out_json"])
    config = res.finish()
    digest = config_digest(config)

    sweep = temperature_sweep(params, temperatures, deltas=deltas,
                              channels=tuple(channels),
                              settings=FlowSettings(k_points=k_points, l_max=l_max),
                              threads=threads)
    rows = [(r.temperature, r.delta, r.channel, r.chi, r.diverged, r.l_div)
            for r in sweep.rows]
    write_csv(out_csv, ["temperature", "delta", "channel", "chi", "diverged",
                        "l_div"], rows, digest)
    status = "ok" if not sweep.errors else "partial"
    result = {
        "n_rows": len(rows),
        "errors": [{"temperature": t, "delta": d, "message": m}
                   for t, d, m in sweep.errors],
    }
    write_summary(out_json, run_summary(config, digest, status,
                                        [out_csv, out_json], started,
                                        time.monotonic() - clock, result))
    click.echo(f"sweep-chi: {len(rows)} rows ({len(channels)} channels x "
               f"{len(deltas)} gaps x {len(temperatures)} temperatures) -> {out_csv}")


@cli.command("rpa")
@config_option
@model_options
@grid_options
@click.option("--continuum", is_flag=True, default=False,
              help="use the small-gap closed form of the bubble")
@output_options("rpa.csv", "rpa.json")
@click.pass_context
def rpa_cmd(ctx, config_path, **kw):
    """Closed-form ladder susceptibility on the sweep-chi grid."""
    started = _now()
    clock = time.monotonic()
    res = Resolver(ctx, config_path, "rpa")
    params = _resolve_params(res, kw)
    temperatures, deltas = _resolve_grid(res, kw, params)
    continuum = res.get("continuum", lambda key, text: text.strip().lower()
                        in ("true", "1", "yes", "on"), kw["continuum"])
    out_csv = res.get("out_csv", coerce_str, kw["out_csv"])
    out_json = res.get("out_json", coerce_str, kw["out_json"])
    config = res.finish()
    digest = config_digest(config)

    rows = []
    n_diverged = 0
    for delta in deltas:
        for temperature in temperatures:
            local = replace(params, delta=delta, temperature=float(temperature))
            value = chi_rpa(local, continuum=continuum)
            if value is DIVERGED:
                rows.append((temperature, delta, "rpa", None, True, None))
                n_diverged += 1
            else:
                rows.append((temperature, delta, "rpa", value, False, None))
    write_csv(out_csv, ["temperature", "delta", "channel", "chi", "diverged",
                        "l_div"], rows, digest)
    result = {"n_rows": len(rows), "n_diverged": n_diverged}
    write_summary(out_json, run_summary(config, digest, "ok",
                                        [out_csv, out_json], started,
                                        time.monotonic() - clock, result))
    click.echo(f"rpa: {len(rows)} rows, {n_diverged} beyond the pole -> {out_csv}")


@cli.command("order")
@config_option
@model_options
@click.option("--delta-zeeman", "delta_zeeman", type=float, default=0.0,
              show_default=True, help="spin splitting that selects the order")
@output_options(None, "order.json")
@click.pass_context
def order_cmd(ctx, config_path, **kw):
    """Ginzburg-Landau coefficients and the selected order parameter."""
    started = _now()
    clock = time.monotonic()
    res = Resolver(ctx, config_path, "order")
    params = _resolve_params(res, kw)
    delta_zeeman = res.get("delta_zeeman", coerce_float, kw["delta_zeeman"])
    out_json = res.get("out_json", coerce_str, kw["out_json"])
    config = res.finish()
    digest = config_digest(config)

    coeffs = gl_coefficients(params)
    state = zeeman_selection(coeffs, delta_zeeman, params)
    result = {
        "r": coeffs.r,
        "c0": coeffs.c0,
        "c2": coeffs.c2,
        "ordered": coeffs.r > 0.0,
        "amplitude": state.amplitude,
        "small_gap_amplitude": small_gap_amplitude(params),
        "phi": [complex(x) for x in state.phi],
        "degenerate": state.degenerate,
    }
    write_summary(out_json, run_summary(config, digest, "ok", [out_json],
                                        started, time.monotonic() - clock, result))
    click.echo(f"order: r = {coeffs.r:.6g}, amplitude = {state.amplitude:.6g} "
               f"-> {out_json}")


@cli.command("soi")
@config_option
@model_options
@click.option("--phi", type=float, default=None,
              help="order parameter amplitude  [default: GL minimum]")
@click.option("--k-points", "k_points", type=int, default=256, show_default=True,
              help="momentum grid size across the zone")
@output_options("soi.csv", "soi.json")
@click.pass_context
def soi_cmd(ctx, config_path, **kw):
    """Quasiparticle bands and the induced spin-orbit strength."""
    started = _now()
    clock = time.monotonic()
    res = Resolver(ctx, config_path, "soi")
    params = _resolve_params(res, kw)
    phi = res.get("phi", coerce_float, kw["phi"])
    if phi is None:
        phi = order_amplitude(gl_coefficients(params))
        phi_source = "computed"
        res.override("phi", float(phi))
    else:
        phi_source = "supplied"
    k_points = res.get("k_points", coerce_int, kw["k_points"])
    if k_points < 2:
        raise click.UsageError("k-points must be at least 2")
    out_csv = res.get("out_csv", coerce_str, kw["out_csv"])
    out_json = res.get("out_json", coerce_str, kw["out_json"])
    config = res.finish()
    digest = config_digest(config)

    grid = np.linspace(-np.pi, np.pi, k_points)
    spectrum = quasiparticle_spectrum(params, phi, grid)
    strength = soi_strength_k(grid, params, phi)
    header = ["k", "lambda_so"] + [f"e{i}" for i in range(1, 7)]
    rows = [(k, lam, *energies)
            for k, lam, energies in zip(grid, strength, spectrum.energies)]
    write_csv(out_csv, header, rows, digest)
    result = {
        "band_edge": soi_band_edge(params, phi),
        "phi": float(phi),
        "phi_source": phi_source,
    }
    write_summary(out_json, run_summary(config, digest, "ok",
                                        [out_csv, out_json], started,
                                        time.monotonic() - clock, result))
    click.echo(f"soi: band edge {result['band_edge']:.6g} at phi = {phi:.6g} "
               f"-> {out_csv}")


@cli.command("coulomb")
@config_option
@click.option("--e0", type=float, default=None,
              help="energy scale e^2/sqrt(a_perp a_par)  [default: 1]")
@click.option("--e2", type=float, default=None, help="Coulomb scale e^2")
@click.option("--a-perp", "a_perp", type=float, default=None,
              help="transverse orbital width")
@click.option("--a-par", "a_par", type=float, default=None,
              help="chain-axis orbital width")
@click.option("--zetas", type=str, default="0.5,1,2", show_default=True,
              help="comma list of anisotropies a_par/a_perp")
@click.option("--n-samples", "n_samples", type=int, default=10**7,
              show_default=True)
@click.option("--seed", type=int, default=None, help="PRNG seed (required)")
@click.option("--beta", type=float, default=0.2, show_default=True,
              help="weight of the near-coincidence proposal")
@click.option("--threads", type=int, default=1, show_default=True)
@output_options("coulomb.csv", "coulomb.json")
@click.pass_context
def coulomb_cmd(ctx, config_path, **kw):
    """Monte Carlo interaction couplings over an anisotropy grid."""
    started = _now()
    clock = time.monotonic()
    res = Resolver(ctx, config_path, "coulomb")
    e0 = res.get("e0", coerce_float, kw["e0"])
    e2 = res.get("e2", coerce_float, kw["e2"])
    a_perp = res.get("a_perp", coerce_float, kw["a_perp"])
    a_par = res.get("a_par", coerce_float, kw["a_par"])
    geometry = [value is not None for value in (e2, a_perp, a_par)]
    if e0 is not None and any(geometry):
        raise click.UsageError(
            "give either --e0 or the explicit --e2/--a-perp/--a-par geometry, "
            "not both")
    if any(geometry) and not all(geometry):
        raise click.UsageError(
            "explicit geometry needs all of --e2, --a-perp and --a-par")
    zetas_given = res.from_flag("zetas") or res.from_file("zetas")
    zetas_text = res.get("zetas", coerce_str, kw["zetas"])
    if all(geometry):
        base = WannierParams(a_perp=a_perp, a_par=a_par, e2=e2)
        e0_value = base.e0
        zetas = [base.zeta] if not zetas_given \
            else coerce_float_list("zetas", zetas_text)
    else:
        e0_value = 1.0 if e0 is None else e0
        zetas = coerce_float_list("zetas", zetas_text)
    res.override("zetas", zetas)
    n_samples = res.get("n_samples", coerce_int, kw["n_samples"])
    seed = res.get("seed", coerce_int, kw["seed"])
    if seed is None:
        raise click.UsageError(
            "coulomb needs --seed <int> (or seed = <int> in the config) "
            "for reproducible sampling")
    beta = res.get("beta", coerce_float, kw["beta"])
    threads = res.get("threads", coerce_int, kw["threads"])
    out_csv = res.get("out_csv", coerce_str, kw["out_csv"])
    out_json = res.get("out_json", coerce_str, kw["out_json"])
    config = res.finish()
    digest = config_digest(config)

    table = zeta_sweep(e0_value, zetas, n_samples=n_samples, seed=seed,
                       beta=beta, threads=threads)
    rows = [(r.zeta, r.u, r.u_err, r.j, r.j_err, r.jp, r.jp_err) for r in table]
    write_csv(out_csv, ["zeta", "u", "u_err", "j", "j_err", "jp", "jp_err"],
              rows, digest)
    failures = [{"zeta": r.zeta, "message": r.failure}
                for r in table if r.failure is not None]
    status = "ok" if not failures else "partial"
    result = {"e0": e0_value, "couplings_in_units_of_e0": True,
              "failures": failures}
    write_summary(out_json, run_summary(config, digest, status,
                                        [out_csv, out_json], started,
                                        time.monotonic() - clock, result))
    click.echo(f"coulomb: {len(rows)} anisotropies at {n_samples} samples each "
               f"-> {out_csv}")


@cli.command("channels-table")
@config_option
@click.option("--records", "records", type=click.Path(dir_okay=False),
              default=None, help="write one machine-readable line per channel")
@output_options(None, None)
@click.pass_context
def channels_table_cmd(ctx, config_path, **kw):
    """Symmetry classes of the pairing bilinears, conjugates omitted."""
    started = _now()
    clock = time.monotonic()
    res = Resolver(ctx, config_path, "channels-table")
    records = res.get("records", coerce_str, kw["records"])
    out_json = res.get("out_json", coerce_str, kw["out_json"])
    config = res.finish()
    digest = config_digest(config)

    rows = table_rows()
    widths = max(len(r.text) for r in rows)
    header = (f"{'j_s':>4} {'m_s':>4} {'m_l':>4}  "
              f"{'channel':<{widths}}  {'SU(2)':<8} {'parity':<6} {'TRS':<4}")
    click.echo(header)
    click.echo("-" * len(header))
    lines = []
    for row in rows:
        m_s_text = "m_s" if row.j_s == 1 else "0"
        click.echo(f"{row.j_s:>4} {m_s_text:>4} {row.m_l:>4}  "
                   f"{row.text:<{widths}}  {row.signature.spin:<8} "
                   f"{row.signature.parity:<6} {row.signature.trs:<4}")
        combo = row.text.replace("m_s", str(row.m_s)).replace(" ", "")
        lines.append(f"js={row.j_s} ms={row.m_s} ml={row.m_l} "
                     f"su2={row.signature.spin} parity={row.signature.parity} "
                     f"trs={row.signature.trs} combo={combo}")
    artifacts = []
    if records is not None:
        text = f"# config_digest: {digest}\n" + "\n".join(lines) + "\n"
        atomic_write_text(records, text)
        artifacts.append(records)
    if out_json is not None:
        artifacts.append(out_json)
        write_summary(out_json, run_summary(config, digest, "ok", artifacts,
                                            started, time.monotonic() - clock,
                                            {"n_channels": len(rows)}))


def main(argv=None):
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except DomainError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except NumericsError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0

"""Command-line front end.

Every command reads a TOML config (``--config``), writes delimited tables
into ``--out`` and records a ``manifest.json`` next to them with the config
hash, input and output digests, sample window, lag order, weight scheme and
seed. Failures print a one-line JSON error record on stderr and exit 1.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import hashlib
import json
import logging
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, geography
from .alternatives import bias_correct, estimate_ardl_us, estimate_sdpm, render_table, theta_summary
from .bootstrap import BootstrapConfig, bootstrap_irf, bootstrap_second_round
from .config import RunConfig, load_config
from .errors import GvarError, InputMissing, UnknownRegion, UnknownState
from .estimation import (
    ArxSpec,
    ModelData,
    adf_test,
    align,
    estimate_system,
    foreign_series,
    granger_test,
    seasonality_ftest,
    select_lag_bic,
    write_coefficients,
)
from .gvar import assemble, solve_reduced_form, stability, write_system
from .ingest import (
    EVENT_GROUPS,
    default_region_map,
    parse_activity_panel,
    parse_borders,
    parse_county_counts,
    parse_date,
    parse_declarations,
    parse_region_map,
    parse_trade_flows,
)
from .irf import (
    aggregate_to_regions,
    compute_irf,
    make_region_scenario,
    make_state_scenario,
    second_round,
    write_long,
)
from .kernels import BACKEND
from .shocks import (
    StateMeta,
    build_state_shocks,
    summarize_declarations,
    write_national_shock,
    write_shock_panel,
    write_summary,
)
from .synth import DgpSpec, simulate_gvar, write_ingest_files
from .weights import adjacency_weights, trade_weights, write_weights

logger = logging.getLogger("gvarspill")


# ---------------------------------------------------------------------------
# pipeline


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _need(cfg: RunConfig, *keys: str) -> dict[str, Path]:
    out = {}
    for key in keys:
        path = getattr(cfg, key)
        if path is None:
            raise InputMissing(f"config has no data.{key} entry")
        if not path.exists():
            raise InputMissing(f"{key} file not found: {path}")
        out[key] = path
    return out


class Run:
    """Lazily built pipeline state shared by the commands."""

    def __init__(self, cfg: RunConfig, args: argparse.Namespace):
        self.cfg = cfg
        self.args = args
        self.groups = tuple(getattr(args, "event_group", None) or cfg.groups)
        self.adjacency = bool(getattr(args, "adjacency", False)) or cfg.scheme == "adjacency"
        self.inputs: dict[str, Path] = {}
        self._cache: dict = {}

    def _memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def states(self) -> tuple[str, ...]:
        return self.cfg.ingest.states

    @property
    def declarations(self):
        def load():
            self.inputs.update(_need(self.cfg, "declarations"))
            table = parse_declarations(self.cfg.declarations, self.cfg.ingest)
            if table.rejects:
                logger.warning("%d declaration rows rejected", len(table.rejects))
            return table
        return self._memo("declarations", load)

    @property
    def meta(self) -> list[StateMeta]:
        def load():
            counts = dict(geography.COUNTIES)
            if self.cfg.counties is not None:
                self.inputs.update(_need(self.cfg, "counties"))
                counts.update(parse_county_counts(self.cfg.counties, self.cfg.ingest))
            missing = [s for s in self.states if s not in counts]
            if missing:
                raise UnknownState(f"no county count for {missing}")
            return [StateMeta(s, counts[s]) for s in self.states]
        return self._memo("meta", load)

    @property
    def shocks(self):
        return self._memo("shocks", lambda: build_state_shocks(
            self.declarations.records, self.meta, self.groups, self.cfg.ingest.window, self.cfg.n_counties))

    @property
    def activity(self):
        def load():
            self.inputs.update(_need(self.cfg, "activity"))
            return parse_activity_panel(self.cfg.activity, self.cfg.ingest)
        return self._memo("activity", load)

    @property
    def data(self) -> ModelData:
        return self._memo("data", lambda: align(self.activity, self.shocks, self.cfg.difference))

    @property
    def region_map(self):
        def load():
            if self.cfg.region_map is None:
                return default_region_map()
            self.inputs.update(_need(self.cfg, "region_map"))
            return parse_region_map(self.cfg.region_map, self.cfg.ingest)
        return self._memo("region_map", load)

    @property
    def regions(self) -> tuple[str, ...]:
        rm = self.region_map
        return tuple(r for r in rm.order if rm.members(r, self.states))

    @property
    def scheme(self):
        def load():
            if self.adjacency:
                if self.cfg.borders is not None:
                    self.inputs.update(_need(self.cfg, "borders"))
                    borders = parse_borders(self.cfg.borders, self.cfg.ingest)
                else:
                    borders = geography.BORDERS
                return adjacency_weights(borders, self.states, self.cfg.fallback)
            self.inputs.update(_need(self.cfg, "trade_flows"))
            table = parse_trade_flows(self.cfg.trade_flows, self.cfg.ingest)
            return trade_weights(table, self.states, ignore_unknown=True)
        return self._memo("scheme", load)

    @property
    def specs(self) -> list[ArxSpec]:
        def build():
            cfg = self.cfg
            if cfg.lags != "bic":
                lag = int(cfg.lags)
                return [ArxSpec(lag, lag, cfg.constant, max_lag=max(12, lag))] * len(self.states)
            y, s = self.data.y, self.data.s
            ystar = foreign_series(y, self.scheme)
            out = []
            for i in range(len(self.states)):
                sel = select_lag_bic(y[:, i], ystar[:, i], s[:, i], cfg.max_lags, cfg.constant)
                out.append(ArxSpec(sel.p_dom, sel.p_star, cfg.constant, max_lag=max(12, cfg.max_lags)))
            return out
        return self._memo("specs", build)

    @property
    def lag_order(self) -> int:
        return max(sp.max_order for sp in self.specs)

    @property
    def estimates(self):
        return self._memo("estimates", lambda: estimate_system(self.data.y, self.data.s, self.scheme, self.specs))

    @property
    def system(self):
        def build():
            system = solve_reduced_form(assemble(self.estimates, self.scheme))
            rep = stability(system)
            if not rep.stable:
                scale = "levels" if not self.cfg.difference else "differences"
                warnings.warn(f"estimated system in {scale} has spectral radius {rep.radius:.4f} >= 1")
            return system
        return self._memo("system", build)

    @property
    def boot_config(self) -> BootstrapConfig:
        cfg, a = self.cfg, self.args
        return BootstrapConfig(
            replications=getattr(a, "replications", None) or cfg.replications,
            percentiles=cfg.percentiles,
            seed=cfg.seed if getattr(a, "seed", None) is None else a.seed,
            horizon=self.horizon,
            allow_unstable=cfg.allow_unstable,
            n_jobs=getattr(a, "n_jobs", None) or cfg.n_jobs,
        )

    @property
    def horizon(self) -> int:
        h = getattr(self.args, "horizon", None)
        return self.cfg.horizon if h is None else h

    def origins(self) -> list[tuple[str, object]]:
        """Scenarios requested with ``--region``/``--state`` (all regions by default)."""
        a = self.args
        out = []
        for st in getattr(a, "state", None) or ():
            if st not in self.states:
                raise UnknownState(f"state {st!r} not in the panel")
            out.append((st, make_state_scenario(st, self.states, a.intensity)))
        regions = getattr(a, "region", None) or ([] if out else list(self.regions))
        for reg in regions:
            if reg not in self.region_map.order:
                raise UnknownRegion(f"unknown region {reg!r}")
            out.append((reg, make_region_scenario(reg, self.region_map, self.states, a.intensity)))
        return out


@dataclass
class Outputs:
    out_dir: Path
    files: list[Path]

    def add(self, name: str) -> Path:
        path = self.out_dir / name
        self.files.append(path)
        return path


def _write_rows(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def write_manifest(run: Run | None, command: str, outputs: Outputs, extra: dict | None = None) -> Path:
    info = {
        "command": command,
        "tool_version": __version__,
        "kernel_backend": BACKEND,
        "created": dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"),
        "outputs": {p.name: _sha256(p) for p in sorted(outputs.files)},
    }
    if run is not None:
        cfg = run.cfg
        info.update(
            config_hash=cfg.digest,
            inputs={k: {"path": str(p), "sha256": _sha256(p)} for k, p in sorted(run.inputs.items())},
            sample_window=[str(w) for w in cfg.ingest.window],
            event_groups=list(run.groups),
            weight_scheme="adjacency" if run.adjacency else "trade",
            seed=run.boot_config.seed,
        )
        if "specs" in run._cache:
            info["lag_order"] = run.lag_order
    info.update(extra or {})
    path = outputs.out_dir / "manifest.json"
    path.write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# commands


def cmd_shocks(run: Run, out: Outputs) -> None:
    panel = run.shocks
    write_shock_panel(panel, out.add("shocks_state.csv"))
    write_national_shock(panel, out.add("shocks_national.csv"))


def cmd_summarize(run: Run, out: Outputs) -> None:
    summary = summarize_declarations(run.declarations.records, groups=run.groups)
    out.files.extend(write_summary(summary, out.out_dir))


def cmd_estimate(run: Run, out: Outputs) -> None:
    ests, data = run.estimates, run.data
    write_coefficients(ests, run.states, out.add("coefficients.csv"))
    p = max(run.lag_order, 1)
    ystar = foreign_series(data.y, run.scheme)
    levels = run.activity.values
    first_month = int(str(data.dates[0])[5:7])
    rows = []
    for i, st in enumerate(run.states):
        adf_lv = adf_test(levels[:, i], p)
        adf_df = adf_test(data.y[:, i], p)
        seas = seasonality_ftest(data.y[:, i], p, first_month)
        gr = granger_test(data.y[:, i], ystar[:, i], p)
        rows.append([st, ests[i].spec.p_dom, ests[i].spec.p_star, ests[i].nobs,
                     adf_lv.statistic, int(adf_lv.reject), adf_df.statistic, int(adf_df.reject),
                     seas[0], seas[1], gr.y_to_ystar[0], gr.y_to_ystar[1], gr.ystar_to_y[0], gr.ystar_to_y[1]])
    _write_rows(out.add("diagnostics.csv"),
                ["state", "p_dom", "p_star", "nobs", "adf_levels", "adf_levels_reject", "adf_diff",
                 "adf_diff_reject", "seasonal_F", "seasonal_p", "granger_y_to_ystar_F",
                 "granger_y_to_ystar_p", "granger_ystar_to_y_F", "granger_ystar_to_y_p"], rows)


def cmd_gvar(run: Run, out: Outputs) -> None:
    system = run.system
    sysdir = out.out_dir / "system"
    out.files.extend(write_system(system, sysdir))
    write_weights(run.scheme, out.add("weights.csv"))
    rep = stability(system)
    _write_rows(out.add("stability.csv"), ["spectral_radius", "stable", "lags", "states"],
                [[rep.radius, int(rep.stable), system.p, system.N]])


def cmd_irf(run: Run, out: Outputs) -> None:
    H = run.horizon
    for name, sc in run.origins():
        res = compute_irf(run.system, sc, H)
        write_long(out.add(f"irf_{name}_states.csv"), run.states,
                   {"response": res.responses, "cumulated": res.cumulated})
        reg = aggregate_to_regions(res, run.region_map, regions=run.regions)
        write_long(out.add(f"irf_{name}_regions.csv"), run.regions, {"cumulated": reg}, "region")


def cmd_bootstrap(run: Run, out: Outputs) -> None:
    bc = run.boot_config
    rows = []
    for name, sc in run.origins():
        band = bootstrap_irf(run.data.y, run.data.s, run.scheme, run.specs, sc, bc, run.region_map, run.regions)
        write_long(out.add(f"bootstrap_{name}_states.csv"), run.states,
                   {**band.table(), "point": band.point.cumulated})
        point_reg = aggregate_to_regions(band.point, run.region_map, regions=run.regions)
        write_long(out.add(f"bootstrap_{name}_regions.csv"), run.regions,
                   {**band.table(regional=True), "point": point_reg}, "region")
        rows.append([name, bc.replications, band.n_discarded])
    _write_rows(out.add("bootstrap_replications.csv"), ["origin", "replications", "discarded"], rows)


def _national_activity(run: Run) -> tuple[np.ndarray, np.ndarray]:
    """US activity levels on the activity panel's dates (cross-state mean if no file)."""
    panel = run.activity
    if run.cfg.national_activity is None:
        return panel.dates, panel.values.mean(axis=1)
    run.inputs.update(_need(run.cfg, "national_activity"))
    with run.cfg.national_activity.open(newline="") as fh:
        values = {np.datetime64(parse_date(r["date"]).strftime("%Y-%m"), "M"): float(r["value"])
                  for r in csv.DictReader(fh)}
    missing = [d for d in panel.dates if d not in values]
    if missing:
        raise InputMissing(f"national activity has no value for {missing[0]}")
    return panel.dates, np.array([values[d] for d in panel.dates])


def cmd_compare(run: Run, out: Outputs) -> None:
    cfg, data = run.cfg, run.data
    sdpm = estimate_sdpm(data.y, run.scheme, data.s)
    if not run.args.no_bias_correction:
        sdpm = bias_correct(sdpm, data.y, run.scheme, data.s, cfg.bias_iterations,
                            cfg.bias_simulations, cfg.seed)
    dates, us = _national_activity(run)
    pos = {d: k for k, d in enumerate(run.shocks.dates)}
    s_us = run.shocks.national[[pos[d] for d in dates]]
    lags = run.lag_order if cfg.lags == "bic" else int(cfg.lags)
    ardl = estimate_ardl_us(us, s_us, lags, cfg.difference)
    theta = theta_summary(run.estimates, run.states)
    out.add("table1.txt").write_text(render_table(sdpm, ardl, theta))
    _write_rows(out.add("sdpm.csv"), ["parameter", "estimate", "std_error"],
                [[k, getattr(sdpm, k), sdpm.se[k]] for k in ("p", "gamma", "rho", "beta")])
    _write_rows(out.add("ardl.csv"), ["parameter", "estimate", "std_error"],
                zip(ardl.names, ardl.params, ardl.se))
    _write_rows(out.add("theta.csv"), ["state", "theta"], [[st, e.theta] for st, e in zip(run.states, run.estimates)])


def cmd_second_round(run: Run, out: Outputs) -> None:
    hl = run.cfg.headline
    H = max(run.horizon, hl)
    rows = []
    for i, st in enumerate(run.states):
        sr = second_round(run.system, run.estimates, make_state_scenario(st, run.states, run.args.intensity), H, hl)
        rows.append([st, sr.gvar_cumulated[hl], sr.muted_cumulated[hl], sr.headline])
    header = ["state", "gvar", "muted", "second_round"]
    if run.args.bootstrap:
        band = bootstrap_second_round(run.data.y, run.data.s, run.scheme, run.specs, run.boot_config, hl)
        summ = band.summary()
        keys = sorted(summ)
        header += keys
        rows = [row + [summ[k][i] for k in keys] for i, row in enumerate(rows)]
    _write_rows(out.add("second_round.csv"), header, rows)


def cmd_simulate(args: argparse.Namespace, out: Outputs) -> dict:
    spec = DgpSpec(N=args.n_states, T=args.periods, p=args.lags, seed=args.seed, start_month=args.start)
    data = simulate_gvar(spec)
    paths = write_ingest_files(data, out.out_dir)
    out.files.extend(paths.values())
    end = data.dates[-1]
    states = ", ".join(f'"{s}"' for s in data.states)
    config = (
        "[data]\n"
        'declarations = "declarations.csv"\n'
        'trade_flows = "trade_flows.csv"\n'
        'activity = "activity.csv"\n\n'
        "[sample]\n"
        f'start = "{args.start}"\nend = "{end}"\nstates = [{states}]\n\n'
        "[model]\n"
        f"lags = {args.lags}\n\n"
        "[bootstrap]\n"
        f"seed = {args.seed}\n"
    )
    path = out.add("config.toml")
    path.write_text(config)
    out.files.extend(write_system(data.system, out.out_dir / "truth"))
    return {"seed": args.seed, "states": list(data.states), "periods": args.periods, "lag_order": args.lags,
            "config_hash": _sha256(path)}


COMMANDS = {
    "shocks": cmd_shocks,
    "summarize": cmd_summarize,
    "estimate": cmd_estimate,
    "gvar": cmd_gvar,
    "irf": cmd_irf,
    "bootstrap": cmd_bootstrap,
    "compare": cmd_compare,
    "second-round": cmd_second_round,
}


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gvarspill", description="Weather-shock GVAR toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", type=Path, required=True, help="TOML run configuration")
    common.add_argument("-o", "--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--event-group", action="append", choices=EVENT_GROUPS,
                        help="restrict shocks to this event group (repeatable)")
    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--adjacency", action="store_true", help="use border-adjacency weights")
    scen = argparse.ArgumentParser(add_help=False)
    scen.add_argument("--region", action="append", help="origin region of the shock (repeatable)")
    scen.add_argument("--state", action="append", help="origin state of the shock (repeatable)")
    scen.add_argument("--horizon", type=int, help="months ahead")
    scen.add_argument("--intensity", type=float, default=1.0, help="shock intensity in [0, 1]")
    boot = argparse.ArgumentParser(add_help=False)
    boot.add_argument("--replications", type=int)
    boot.add_argument("--seed", type=int)
    boot.add_argument("--n-jobs", type=int)

    sub.add_parser("shocks", parents=[common], help="build state and national shock panels")
    sub.add_parser("summarize", parents=[common], help="declaration counts by group, season and state")
    sub.add_parser("estimate", parents=[common, model], help="ARX* coefficients and diagnostics")
    sub.add_parser("gvar", parents=[common, model], help="system matrices and stability report")
    sub.add_parser("irf", parents=[common, model, scen], help="impulse responses for shock scenarios")
    sub.add_parser("bootstrap", parents=[common, model, scen, boot], help="bootstrap bands for responses")
    p = sub.add_parser("compare", parents=[common, model], help="spatial panel, aggregate ARDL, theta spread")
    p.add_argument("--no-bias-correction", action="store_true")
    p = sub.add_parser("second-round", parents=[common, model, boot], help="GVAR vs muted own-shock responses")
    p.add_argument("--horizon", type=int)
    p.add_argument("--intensity", type=float, default=1.0)
    p.add_argument("--bootstrap", action="store_true", help="add bootstrap means and bands")

    p = sub.add_parser("simulate", help="write synthetic input files and a matching config")
    p.add_argument("-o", "--out", type=Path, default=Path("synthetic"))
    p.add_argument("--n-states", type=int, default=5)
    p.add_argument("--periods", type=int, default=240)
    p.add_argument("--lags", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", default="1990-01")
    return parser


def _error_record(exc: BaseException, command: str | None) -> str:
    return json.dumps({"error": type(exc).__name__, "message": str(exc), "command": command}, sort_keys=True)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        out = Outputs(args.out, [])
        if args.command == "simulate":
            extra = cmd_simulate(args, out)
            write_manifest(None, args.command, out, extra)
            return 0
        cfg = load_config(args.config)
        run = Run(cfg, args)
        COMMANDS[args.command](run, out)
        write_manifest(run, args.command, out)
    except (GvarError, ValueError, OSError, KeyError) as exc:
        print(_error_record(exc, args.command), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

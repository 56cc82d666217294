"""Run configuration loaded from a TOML file.

Relative paths are resolved against the directory holding the config file.
Every section is optional; see ``README.md`` for the full list of keys.
"""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from . import geography
from .errors import ConfigError
from .ingest import DEFAULT_TAXONOMY, EVENT_GROUPS, IngestConfig


@dataclass(frozen=True)
class RunConfig:
    path: Path | None
    digest: str
    ingest: IngestConfig
    declarations: Path | None = None
    trade_flows: Path | None = None
    activity: Path | None = None
    national_activity: Path | None = None
    region_map: Path | None = None
    borders: Path | None = None
    counties: Path | None = None
    groups: tuple[str, ...] = EVENT_GROUPS
    n_counties: int | None = None
    lags: int | str = 2
    max_lags: int = 2
    difference: bool = True
    constant: bool = True
    scheme: str = "trade"
    fallback: dict[str, str] = field(default_factory=lambda: dict(geography.ISLAND_FALLBACK))
    horizon: int = 48
    headline: int = 12
    replications: int = 1000
    percentiles: tuple[float, ...] = (10.0, 90.0)
    seed: int = 0
    allow_unstable: bool = False
    n_jobs: int = 1
    bias_iterations: int = 1000
    bias_simulations: int = 50
    raw: dict = field(default_factory=dict, repr=False)


def _section(raw: dict, name: str) -> dict:
    value = raw.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"[{name}] must be a table")
    return value


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = tomllib.loads(text.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(raw, base=path.parent, digest=hashlib.sha256(text).hexdigest(), path=path)


def config_from_dict(raw: dict[str, Any], base: Path = Path("."), digest: str = "", path: Path | None = None) -> RunConfig:
    data = _section(raw, "data")
    cols = _section(raw, "columns")
    sample = _section(raw, "sample")
    shocks = _section(raw, "shocks")
    model = _section(raw, "model")
    weights = _section(raw, "weights")
    irf = _section(raw, "irf")
    boot = _section(raw, "bootstrap")
    sdpm = _section(raw, "sdpm")

    def resolve(key):
        value = data.get(key)
        return (base / value) if value else None

    defaults = IngestConfig()
    taxonomy = dict(DEFAULT_TAXONOMY)
    taxonomy.update({k.casefold(): v for k, v in _section(raw, "taxonomy").items()})
    states = tuple(sorted(sample.get("states") or geography.STATES))
    try:
        window = (
            np.datetime64(sample.get("start", "1990-01"), "M"),
            np.datetime64(sample.get("end", "2019-12"), "M"),
        )
    except ValueError as exc:
        raise ConfigError(f"bad sample window: {exc}") from exc
    ingest = IngestConfig(
        delimiter=data.get("delimiter", ","),
        declaration_columns={**defaults.declaration_columns, **cols.get("declarations", {})},
        trade_columns={**defaults.trade_columns, **cols.get("trade_flows", {})},
        activity_layout=data.get("activity_layout", "wide"),
        activity_columns={**defaults.activity_columns, **cols.get("activity", {})},
        taxonomy=taxonomy,
        states=states,
        window=window,
    )
    groups = tuple(shocks.get("groups", EVENT_GROUPS))
    bad = set(groups) - set(EVENT_GROUPS)
    if bad:
        raise ConfigError(f"unknown event group(s) {sorted(bad)}")
    lags = model.get("lags", 2)
    if not (lags == "bic" or isinstance(lags, int) and lags >= 0):
        raise ConfigError("model.lags must be a non-negative integer or 'bic'")
    scheme = weights.get("scheme", "trade")
    if scheme not in ("trade", "adjacency"):
        raise ConfigError("weights.scheme must be 'trade' or 'adjacency'")
    return RunConfig(
        path=path,
        digest=digest,
        ingest=ingest,
        declarations=resolve("declarations"),
        trade_flows=resolve("trade_flows"),
        activity=resolve("activity"),
        national_activity=resolve("national_activity"),
        region_map=resolve("region_map"),
        borders=resolve("borders"),
        counties=resolve("counties"),
        groups=groups,
        n_counties=shocks.get("n_counties"),
        lags=lags,
        max_lags=int(model.get("max_lags", 2 if lags == "bic" else lags or 1)),
        difference=bool(model.get("difference", True)),
        constant=bool(model.get("constant", True)),
        scheme=scheme,
        fallback=dict(weights.get("fallback", geography.ISLAND_FALLBACK)),
        horizon=int(irf.get("horizon", 48)),
        headline=int(irf.get("headline", 12)),
        replications=int(boot.get("replications", 1000)),
        percentiles=tuple(float(q) for q in boot.get("percentiles", (10, 90))),
        seed=int(boot.get("seed", 0)),
        allow_unstable=bool(boot.get("allow_unstable", False)),
        n_jobs=int(boot.get("n_jobs", 1)),
        bias_iterations=int(sdpm.get("bias_iterations", 1000)),
        bias_simulations=int(sdpm.get("bias_simulations", 50)),
        raw=raw,
    )

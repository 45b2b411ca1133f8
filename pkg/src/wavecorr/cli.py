"""Command-line front end.

Every command reads a returns panel (from ``--input`` CSV or ``--synthetic``),
validates the whole configuration, computes, and only then creates the output
directory and writes CSV/SVG files. Settings may come from a flat
``key = value`` file given with ``--config``; command-line flags win.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import analysis, ingest, modwt, plotting, portfolio, windows
from .errors import ConfigError, DataError, WavecorrError
from .windows import scale_label

log = logging.getLogger("wavecorr")

COMMANDS = ("synth", "decompose", "dynamics", "epps", "partition", "optimize")


@dataclass
class RunConfig:
    command: str = ""
    input: str | None = None
    input_kind: str = "prices"
    synthetic: str | None = None
    returns: str = "log"
    ffill: bool = False
    filter: str = "la8"
    levels: int | None = None  # None -> max_level for the window
    window: int | None = None  # None -> command default
    stride: int | None = None
    window_start: int = 0
    min_unbiased: int = 32
    scales: str | None = None
    sdu_reference: str = "full"
    eigen_rank: int = 1
    weights: str | None = None
    index_input: str | None = None
    mu: str | None = None
    vols: str | None = None
    targets: str = "21"
    skip_failures: bool = False
    workers: int = 1
    dump_matrices: bool = False
    out: str = "out"
    seed: int = 0

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is not None:
                lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls(**_coerce(parse_config_text(text)))


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def parse_config_text(text: str) -> dict:
    out = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {n}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise ConfigError(f"config line {n}: unknown key {key!r}")
        out[key] = value
    return out


def _coerce(values: dict) -> dict:
    out = {}
    for key, value in values.items():
        kind = _TYPES[key]
        if not isinstance(value, str):
            out[key] = value
        elif "bool" in kind:
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"{key}: expected a boolean, got {value!r}")
            out[key] = low in ("true", "1", "yes")
        elif "int" in kind:
            if value.lower() == "none" and "None" in kind:
                out[key] = None
                continue
            try:
                out[key] = int(value)
            except ValueError:
                raise ConfigError(f"{key}: expected an integer, got {value!r}") from None
        else:
            out[key] = None if value.lower() == "none" and "None" in kind else value
    return out


def _floats(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(s) for s in text.split(",") if s.strip()])
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def parse_synthetic(text: str, seed: int) -> ingest.SyntheticSpec:
    """``model=equicorrelated,n_assets=10,n_obs=2000,rho=0.4`` -> SyntheticSpec."""
    kw: dict = {"seed": seed}
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise ConfigError(f"synthetic: expected key=value, got {part!r}")
        k, v = (s.strip() for s in part.split("=", 1))
        k = k.replace("-", "_")
        try:
            if k in ("n_assets", "n_obs", "seed"):
                kw[k] = int(v)
            elif k in ("rho", "tick_prob", "sigma"):
                kw[k] = float(v)
            elif k == "model":
                kw[k] = v
            else:
                raise ConfigError(f"synthetic: unknown key {k!r}")
        except ValueError:
            raise ConfigError(f"synthetic: bad value for {k}: {v!r}") from None
    for req in ("n_assets", "n_obs"):
        if req not in kw:
            raise ConfigError(f"synthetic: missing {req}")
    return ingest.SyntheticSpec(**kw)


def validate(cfg: RunConfig) -> None:
    """Checks that need no data."""
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg.command == "synth":
        if not cfg.synthetic:
            raise ConfigError("synth needs --synthetic")
    elif bool(cfg.input) == bool(cfg.synthetic):
        raise ConfigError("give exactly one of --input or --synthetic")
    if cfg.synthetic:
        parse_synthetic(cfg.synthetic, cfg.seed)
    if cfg.input_kind not in ("prices", "returns"):
        raise ConfigError("input_kind must be 'prices' or 'returns'")
    if cfg.returns not in ("log", "simple"):
        raise ConfigError("returns must be 'log' or 'simple'")
    modwt.make_filter(cfg.filter)
    if cfg.levels is not None and cfg.levels < 1:
        raise ConfigError("levels must be >= 1")
    if cfg.window is not None and cfg.window < 2:
        raise ConfigError("window must be >= 2")
    if cfg.stride is not None and cfg.stride < 1:
        raise ConfigError("stride must be >= 1")
    if cfg.window_start < 0:
        raise ConfigError("window_start must be >= 0")
    if cfg.min_unbiased < 1:
        raise ConfigError("min_unbiased must be >= 1")
    if cfg.eigen_rank < 1:
        raise ConfigError("eigen_rank must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.scales:
        windows.parse_scales(cfg.scales)
    _sdu_reference(cfg.sdu_reference)
    for name in ("weights", "mu", "vols"):
        if getattr(cfg, name):
            _floats(getattr(cfg, name), name)
    _targets_spec(cfg.targets)


def _sdu_reference(text: str):
    if text.strip().lower() == "full":
        return None
    try:
        a, b = (int(s) for s in text.split(":"))
    except ValueError:
        raise ConfigError(f"sdu_reference must be 'full' or 'start:stop', got {text!r}") from None
    if not 0 <= a < b:
        raise ConfigError(f"sdu_reference range {text!r} is empty")
    return (a, b)


def _targets_spec(text: str):
    text = str(text).strip()
    if "," in text:
        return _floats(text, "targets")
    try:
        n = int(text)
    except ValueError:
        raise ConfigError(f"targets must be a count or comma-separated list, got {text!r}") from None
    if n < 1:
        raise ConfigError("targets count must be >= 1")
    return n


def load_panel(cfg: RunConfig) -> ingest.ReturnsPanel:
    if cfg.synthetic:
        return ingest.generate_synthetic(parse_synthetic(cfg.synthetic, cfg.seed))
    if cfg.input_kind == "returns":
        return ingest.load_returns(cfg.input)
    prices = ingest.load_prices(cfg.input, ffill=cfg.ffill)
    if prices.n_filled:
        log.info("forward-filled %d missing cells", prices.n_filled)
    return ingest.to_returns(prices, cfg.returns)


def _vector(text, n: int, what: str):
    if not text:
        return None
    v = _floats(text, what)
    if v.size != n:
        raise ConfigError(f"{what}: {v.size} values for {n} assets")
    return v


def _resolve_levels(cfg: RunConfig, length: int, filt) -> int:
    if length < filt.width:
        raise ConfigError(f"window length {length} shorter than filter width {filt.width}")
    limit = modwt.max_level(length, filt, cfg.min_unbiased)
    if cfg.levels is None:
        if limit < 1:
            raise ConfigError(f"window length {length} too short for any level (max_level=0)")
        return limit
    if cfg.levels > limit:
        raise ConfigError(
            f"levels={cfg.levels} exceeds max_level={limit} for length {length}, "
            f"filter {filt.name}, min_unbiased={cfg.min_unbiased}"
        )
    return cfg.levels


def _plan(cfg: RunConfig, panel, filt) -> windows.WindowPlan:
    length = cfg.window if cfg.window is not None else min(100, panel.n_obs)
    if length > panel.n_obs:
        raise ConfigError(f"window {length} longer than panel ({panel.n_obs} observations)")
    levels = _resolve_levels(cfg, length, filt)
    scales = tuple(windows.parse_scales(cfg.scales)) if cfg.scales else None
    plan = windows.WindowPlan(length, levels, cfg.stride, cfg.min_unbiased, scales)
    plan.validate(filt, panel.n_obs)
    return plan


# Each command returns a list of (relative path, writer) pairs; writing happens
# only after every computation has succeeded.

def _cmd_synth(cfg, panel, filt):
    prices = ingest.returns_to_prices(panel.returns)
    stamps = [0, *panel.timestamps]
    return [
        ("prices.csv", lambda p: ingest.write_panel_csv(p, panel.asset_ids, stamps, prices)),
        ("returns.csv", lambda p: ingest.write_panel_csv(p, panel.asset_ids, panel.timestamps, panel.returns)),
    ]


def _cmd_decompose(cfg, panel, filt):
    levels = _resolve_levels(cfg, panel.n_obs, filt)
    dec = modwt.decompose(panel.returns, filt, levels)
    outputs = []
    for i, name in enumerate(panel.asset_ids):
        single = modwt.WaveletDecomposition(dec.details[:, i], dec.smooth[i], dec.boundary_width, dec.filter_name)
        outputs.append((f"crystals_{name}.csv", lambda p, d=single: modwt.write_crystals_csv(p, d)))
    return outputs


def _write_eigen_csv(path, dyn: windows.DynamicsResult) -> None:
    import csv

    n = len(dyn.asset_ids)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["window_start", "scale", *(f"lambda_{k}" for k in range(1, n + 1))])
        for s in dyn.scales:
            for i, start in enumerate(dyn.window_starts):
                w.writerow([int(start), scale_label(s), *(repr(float(v)) for v in dyn.eigenvalues[s][i])])


def _matrix_dumps(cfg, panel, filt, plan):
    from .wavestats import raw_correlation, wavelet_correlation_matrix, write_matrix_csv

    outputs = []
    for i in range(plan.n_windows(panel.n_obs)):
        s0 = i * plan.step
        block = panel.returns[:, s0:s0 + plan.window_length]
        dec = modwt.decompose(block, filt, plan.levels) if plan.levels else None
        for s in plan.requested:
            if s == "raw":
                m = raw_correlation(block, panel.asset_ids).correlation
            else:
                m = wavelet_correlation_matrix(dec, s, panel.asset_ids).correlation
            outputs.append((f"matrices/corr_w{s0:06d}_{scale_label(s)}.csv",
                            lambda p, m=m: write_matrix_csv(p, m, panel.asset_ids)))
    return outputs


def _cmd_dynamics(cfg, panel, filt):
    plan = _plan(cfg, panel, filt)
    dyn = windows.run_dynamics(panel, plan, filt, skip_failures=cfg.skip_failures, workers=cfg.workers)
    outputs = [
        ("dynamics_long.csv", dyn.write_long_csv),
        ("eigenvalues.csv", lambda p: _write_eigen_csv(p, dyn)),
        ("dynamics.svg", lambda p: plotting.plot_dynamics(dyn, p)),
    ]
    for s in dyn.scales:
        outputs.append((f"dynamics_{scale_label(s)}.csv", lambda p, s=s: dyn.write_wide_csv(p, s)))
    if dyn.failures:
        outputs.append(("failures.csv", lambda p: Path(p).write_text(
            "window_index,message\n" + "".join(f'{i},"{m}"\n' for i, m in dyn.failures))))
    if cfg.dump_matrices:
        outputs.extend(_matrix_dumps(cfg, panel, filt, plan))
    return outputs


def _cmd_epps(cfg, panel, filt):
    levels = _resolve_levels(cfg, panel.n_obs, filt)
    rows = windows.epps_summary(panel, filt, levels, cfg.min_unbiased)
    return [
        ("epps.csv", lambda p: windows.write_epps_csv(p, rows)),
        ("epps.svg", lambda p: plotting.plot_epps(rows, p)),
    ]


def _index_series(cfg, panel) -> np.ndarray:
    if cfg.index_input:
        idx = ingest.load_prices_single(cfg.index_input)
        if list(idx.timestamps[1:]) != list(panel.timestamps):
            raise DataError("index series timestamps do not match the panel")
        return ingest.compute_returns(idx.values, cfg.returns)
    return analysis.index_returns(panel, _vector(cfg.weights, panel.n_assets, "weights"))


def _cmd_partition(cfg, panel, filt):
    plan = _plan(cfg, panel, filt)
    index = _index_series(cfg, panel)
    dyn = windows.run_dynamics(panel, plan, filt, skip_failures=cfg.skip_failures, workers=cfg.workers)
    if cfg.eigen_rank > panel.n_assets:
        raise ConfigError(f"eigen_rank {cfg.eigen_rank} exceeds number of assets {panel.n_assets}")
    rets = analysis.window_returns(index, dyn.window_starts, plan.window_length, cfg.returns)
    rows = analysis.partition_report(dyn, rets, cfg.eigen_rank, _sdu_reference(cfg.sdu_reference))
    return [("partition.csv", lambda p: analysis.write_partition_csv(p, rows))]


def _cmd_optimize(cfg, panel, filt):
    length = cfg.window if cfg.window is not None else panel.n_obs - cfg.window_start
    if cfg.window_start + length > panel.n_obs:
        raise ConfigError(f"window ({cfg.window_start}, {length}) outside panel of {panel.n_obs}")
    levels = _resolve_levels(cfg, length, filt)
    scales = windows.parse_scales(cfg.scales) if cfg.scales else None
    mu = _vector(cfg.mu, panel.n_assets, "mu")
    vols = _vector(cfg.vols, panel.n_assets, "vols")
    spec = _targets_spec(cfg.targets)
    if isinstance(spec, int):
        targets = portfolio.default_targets(mu if mu is not None else panel.returns.mean(axis=1), spec)
    else:
        targets = spec
    frontiers = portfolio.frontier_by_scale(
        panel, (cfg.window_start, length), filt, levels, mu, vols, targets, scales, cfg.min_unbiased,
    )
    return [
        ("frontier.csv", lambda p: portfolio.write_frontier_csv(p, frontiers, panel.asset_ids)),
        ("gmv.csv", lambda p: portfolio.write_gmv_csv(p, frontiers, panel.asset_ids)),
        ("frontiers.svg", lambda p: plotting.plot_frontiers(frontiers, p)),
    ]


_HANDLERS = {
    "synth": _cmd_synth,
    "decompose": _cmd_decompose,
    "dynamics": _cmd_dynamics,
    "epps": _cmd_epps,
    "partition": _cmd_partition,
    "optimize": _cmd_optimize,
}


def run(cfg: RunConfig) -> list[Path]:
    """Execute a validated config and return the written files."""
    validate(cfg)
    filt = modwt.make_filter(cfg.filter)
    panel = load_panel(cfg)
    outputs = _HANDLERS[cfg.command](cfg, panel, filt)
    out = Path(cfg.out)
    written = []
    for rel, writer in outputs:
        path = out / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        writer(path)
        written.append(path)
    (out / "run.cfg").write_text(cfg.to_text(), encoding="utf-8")
    return written


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--input", help="wide CSV: timestamp column then one column per asset")
    common.add_argument("--input-kind", choices=["prices", "returns"])
    common.add_argument("--synthetic", help="e.g. model=equicorrelated,n_assets=10,n_obs=5000,rho=0.4")
    common.add_argument("--returns", choices=["log", "simple"])
    common.add_argument("--ffill", action="store_true", help="forward-fill missing prices")
    common.add_argument("--filter", help="haar or la8")
    common.add_argument("--levels", type=int)
    common.add_argument("--window", type=int, help="window length in return observations")
    common.add_argument("--stride", type=int)
    common.add_argument("--window-start", type=int)
    common.add_argument("--min-unbiased", type=int)
    common.add_argument("--scales", help="comma list, e.g. raw,1,2,3")
    common.add_argument("--sdu-reference", help="'full' or start:stop window indices")
    common.add_argument("--eigen-rank", type=int, help="1 = largest eigenvalue")
    common.add_argument("--weights", help="comma list of index weights")
    common.add_argument("--index-input", help="single-column price CSV for the index")
    common.add_argument("--mu", help="comma list of expected returns")
    common.add_argument("--vols", help="comma list of per-asset standard deviations")
    common.add_argument("--targets", help="count or comma list of target returns")
    common.add_argument("--skip-failures", action="store_true")
    common.add_argument("--workers", type=int)
    common.add_argument("--dump-matrices", action="store_true")
    common.add_argument("--out")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="wavecorr", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "synth": "write a synthetic panel to CSV",
        "decompose": "MODWT crystals per asset",
        "dynamics": "sliding-window eigenvalue series per scale",
        "epps": "full-sample average correlation and top eigenvalues per scale",
        "partition": "index returns when an eigenvalue is beyond +/-1 SDU",
        "optimize": "mean-variance frontiers per scale",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def config_from_args(argv=None) -> tuple[RunConfig, bool]:
    ns = vars(build_parser().parse_args(argv))
    verbose = ns.pop("verbose", False)
    values: dict = {}
    cfg_path = ns.pop("config", None)
    if cfg_path:
        path = Path(cfg_path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        values.update(parse_config_text(path.read_text(encoding="utf-8")))
    values.update(ns)
    return RunConfig(**_coerce(values)), verbose


def main(argv=None) -> int:
    try:
        cfg, verbose = config_from_args(argv)
        logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        written = run(cfg)
    except WavecorrError as exc:
        print(f"wavecorr: error: {exc}", file=sys.stderr)
        return exc.exit_code
    for path in written:
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

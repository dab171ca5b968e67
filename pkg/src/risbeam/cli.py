"""Command-line experiment runner writing detail and summary CSVs.

Configuration files are flat ``key = value`` text; ``#`` starts a comment and
lists are comma-separated. Command-line flags override file values.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from risbeam.baselines import AoParams, CodebookParams
from risbeam.channel_model import SystemDims
from risbeam.complexity import METHODS, analytic_cost, loglog_slope
from risbeam.evaluation import McExperiment, monte_carlo, summarize
from risbeam.ms_tao import MsTaoParams

log = logging.getLogger("risbeam")

EXPERIMENTS = ("snr_sweep", "user_sweep", "complexity_sweep")

DETAIL_HEADER = (
    "experiment,method,seed,realization,channel_digest,M_R,K,M_Tk,R_UE,N,"
    "snr_db,se_bits,surrogate,iterations,op_units,wall_ms"
).split(",")
SUMMARY_HEADER = "experiment,method,sweep_param,sweep_value,realizations,se_mean,se_std".split(",")
COST_HEADER = "method,N,R,analytic_cost,measured_units".split(",")

_DEFAULT_SNR = {"snr_sweep": (-10.0, -5.0, 0.0, 5.0, 10.0)}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "snr_sweep"
    m_r: int = 16
    m_tk: int = 4
    n: int = 64
    k: int = 2
    r_ue: int = 2
    snr_db: tuple = ()
    k_values: tuple = (1, 2, 3)
    r_ue_values: tuple = (1, 2)
    n_values: tuple = (32, 64, 128, 256)
    realizations: int = 100
    master_seed: int = 0
    methods: tuple = METHODS
    i_max: int = 30
    eps: float = 1e-6
    n_starts: int = 20
    i_outer: int = 30
    i_ris_inner: int = 25
    n_codewords: int | None = None
    i_refine: int = 10
    out: str = "results"
    timing: bool = False
    workers: int = 1

    def __post_init__(self):
        if not self.snr_db:
            object.__setattr__(self, "snr_db", _DEFAULT_SNR.get(self.experiment, (10.0,)))
        validate(self)

    @property
    def tao(self) -> MsTaoParams:
        return MsTaoParams(self.i_max, self.eps)

    @property
    def ao(self) -> AoParams:
        return AoParams(self.n_starts, self.i_outer, self.i_ris_inner)

    @property
    def codebook(self) -> CodebookParams:
        return CodebookParams(self.n_codewords, self.i_refine)

    def points(self) -> list:
        """``(sweep_value_label, SystemDims)`` per sweep point, in output order."""
        if self.experiment == "snr_sweep":
            return [("", SystemDims.uniform(self.m_r, self.k, self.m_tk, self.r_ue, self.n))]
        if self.experiment == "user_sweep":
            return [
                (f"{k}/{r}", SystemDims.uniform(self.m_r, k, self.m_tk, r, self.n))
                for r in self.r_ue_values
                for k in self.k_values
            ]
        return [
            (str(n), SystemDims.uniform(self.m_r, self.k, self.m_tk, self.r_ue, n))
            for n in self.n_values
        ]


def validate(cfg: ExperimentConfig) -> None:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {cfg.experiment!r}")
    if cfg.realizations < 1:
        raise ConfigError("realizations must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.master_seed < 0:
        raise ConfigError("master_seed must be a nonnegative integer")
    bad = [m for m in cfg.methods if m not in METHODS]
    if bad or not cfg.methods:
        raise ConfigError(f"unknown methods {bad}; choose from {METHODS}")
    for name in ("k_values", "r_ue_values", "n_values", "snr_db"):
        if not getattr(cfg, name):
            raise ConfigError(f"{name} must not be empty")
    ks = cfg.k_values if cfg.experiment == "user_sweep" else (cfg.k,)
    rs = cfg.r_ue_values if cfg.experiment == "user_sweep" else (cfg.r_ue,)
    ns = cfg.n_values if cfg.experiment == "complexity_sweep" else (cfg.n,)
    for r in rs:
        if r > cfg.m_tk:
            raise ConfigError(f"R_k exceeds M_{{T,k}}: R_UE={r} > M_Tk={cfg.m_tk}")
    try:
        for k in ks:
            for r in rs:
                for n in ns:
                    SystemDims.uniform(cfg.m_r, k, cfg.m_tk, r, n)
        cfg.tao, cfg.ao, cfg.codebook
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.n_codewords is not None and cfg.n_codewords > min(ns):
        raise ConfigError(f"n_codewords={cfg.n_codewords} exceeds N={min(ns)}")


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}
_INT_LISTS = {"k_values", "r_ue_values", "n_values"}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    default = _FIELDS[key].default
    if key == "snr_db":
        return tuple(float(v) for v in raw.split(","))
    if key in _INT_LISTS:
        return tuple(int(v) for v in raw.split(","))
    if key == "methods":
        return tuple(v.strip() for v in raw.split(",") if v.strip())
    if key == "n_codewords":
        return None if raw.upper() == "N" else int(raw)
    if key == "timing":
        if raw.lower() not in ("true", "false", "on", "off", "1", "0"):
            raise ValueError(f"expected a boolean, got {raw!r}")
        return raw.lower() in ("true", "on", "1")
    if isinstance(default, bool):
        raise AssertionError(key)
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if not raw:
        raise ValueError("empty value")
    return raw


def parse_config_text(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse flat ``key = value`` text, then apply ``overrides`` (already typed)."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _parse_value(key, raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: invalid value for {key!r}: {exc}") from exc
    values.update(overrides or {})
    return ExperimentConfig(**values)


def parse_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    text = ""
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, overrides)


def _fmt(v) -> str:
    if v is None:
        return "N"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def emit_config(cfg: ExperimentConfig) -> str:
    """Every field, defaults included, as re-parseable text."""
    return "".join(f"{name} = {_fmt(getattr(cfg, name))}\n" for name in _FIELDS)


def _detail_row(rec) -> list:
    d = rec.dims
    return [
        rec.experiment, rec.method, rec.seed, rec.realization, rec.channel_digest,
        d.m_r, d.k, d.m_tk[0], d.r_k[0], d.n, _fmt(rec.snr_db),
        _fmt(rec.se), _fmt(rec.surrogate), rec.iterations, rec.op_units, _fmt(rec.wall_ms),
    ]


def output_paths(cfg: ExperimentConfig) -> dict:
    out = Path(cfg.out)
    paths = {
        "detail": out / f"{cfg.experiment}_detail.csv",
        "summary": out / f"{cfg.experiment}_summary.csv",
        "config": out / f"{cfg.experiment}_config.txt",
    }
    if cfg.experiment == "complexity_sweep":
        paths["costs"] = out / f"{cfg.experiment}_costs.csv"
    return paths


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run every sweep point and write the CSV outputs; returns the output paths."""
    paths = output_paths(cfg)
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    method_rank = {m: i for i, m in enumerate(cfg.methods)}
    detail, summary, costs = [], [], []
    try:
        for label, dims in cfg.points():
            exp = McExperiment(
                dims=dims,
                snr_db=cfg.snr_db,
                realizations=cfg.realizations,
                methods=cfg.methods,
                tao=cfg.tao,
                ao=cfg.ao,
                codebook=cfg.codebook,
                experiment=cfg.experiment,
                timing=cfg.timing,
            )
            log.info("%s: point %s dims=%s", cfg.experiment, label or "-", dims)
            records, _ = monte_carlo(exp, cfg.master_seed, workers=cfg.workers)
            snrs = list(cfg.snr_db)
            records.sort(key=lambda r: (snrs.index(r.snr_db), r.realization, method_rank[r.method]))
            detail.extend(_detail_row(r) for r in records)
            stats = sorted(summarize(records), key=lambda s: (snrs.index(s.snr_db), method_rank[s.method]))
            for st in stats:
                if cfg.experiment == "snr_sweep":
                    param, value = "snr_db", _fmt(st.snr_db)
                elif cfg.experiment == "user_sweep":
                    param, value = "K/R_UE", label
                else:
                    param, value = "N", label
                summary.append(
                    [cfg.experiment, st.method, param, value, st.count, _fmt(st.mean), _fmt(st.std)]
                )
            if cfg.experiment == "complexity_sweep":
                first_snr = snrs[0]
                for method in cfg.methods:
                    units = [r.op_units for r in records if r.method == method and r.snr_db == first_snr]
                    params = {"ms_tao": cfg.tao, "multistart_ao": cfg.ao, "codebook": cfg.codebook}[method]
                    costs.append(
                        [method, dims.n, dims.r, _fmt(analytic_cost(method, params, dims.n, dims.r)),
                         _fmt(float(np.mean(units)))]
                    )
        _write_csv(paths["detail"], DETAIL_HEADER, detail)
        _write_csv(paths["summary"], SUMMARY_HEADER, summary)
        paths["config"].write_text(emit_config(cfg))
        if "costs" in paths:
            _write_csv(paths["costs"], COST_HEADER, costs)
    except BaseException:
        for p in paths.values():
            p.unlink(missing_ok=True)
        raise
    if costs and len(cfg.n_values) >= 3:
        for method in cfg.methods:
            rows = [c for c in costs if c[0] == method]
            ns = [c[1] for c in rows]
            log.info(
                "%s log-log slope: analytic %.3f, measured %.3f",
                method,
                loglog_slope(ns, [float(c[3]) for c in rows]),
                loglog_slope(ns, [float(c[4]) for c in rows]),
            )
    return paths


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="risbeam", description=__doc__.splitlines()[0])
    p.add_argument("--experiment", choices=EXPERIMENTS, help="which sweep to run")
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--seed", type=int, help="master seed (u64)")
    p.add_argument("--realizations", type=int, help="channel realizations per sweep point")
    p.add_argument("--out", help="output directory")
    p.add_argument("--methods", help="comma list from " + ",".join(METHODS))
    p.add_argument("--echo-config", action="store_true", help="print the effective config and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    overrides = {}
    if args.experiment is not None:
        overrides["experiment"] = args.experiment
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.realizations is not None:
        overrides["realizations"] = args.realizations
    if args.out is not None:
        overrides["out"] = args.out
    if args.methods is not None:
        overrides["methods"] = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    try:
        cfg = parse_config(args.config, overrides)
    except (ConfigError, TypeError) as exc:
        print(f"risbeam: config error: {exc}", file=sys.stderr)
        return 2
    if args.echo_config:
        sys.stdout.write(emit_config(cfg))
        return 0
    try:
        paths = run_experiment(cfg)
    except Exception as exc:  # noqa: BLE001 - reported as a nonzero exit
        print(f"risbeam: {cfg.experiment} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for p in paths.values():
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())

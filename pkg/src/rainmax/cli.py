"""Batch CLI wiring ingestion, fitting, testing, diagnostics, clustering and
independence analysis into seeded, reproducible runs with file outputs.

Every subcommand writes only inside the output directory; re-running with
the same configuration and inputs reproduces the outputs byte for byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import cluster as cl
from . import diagnose, gof, ingest, recurrence
from .demo import demo_dataset
from .estimate import FitResult, fit_mle, profile_ci_xi
from .ingest import AnnualMaximaSeries
from .seeding import derive_seed


@dataclass
class RunConfig:
    input: str | None = None
    out: str = "out"
    seed: int = 0
    alpha: float = 0.05
    delta: float = 0.05
    bootstrap: int = 999
    permutations: int = 999
    min_coverage: float = 0.8
    min_overlap: int = 10
    standardize: bool = True
    kmax: int = 7
    method: str = "params"
    demo: bool = False
    target: str | None = None
    ci_level: float = 0.95

    def validate(self) -> None:
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")
        if not 0.0 <= self.delta < 0.5:
            raise ValueError("delta must lie in [0, 0.5)")
        if self.bootstrap < 99:
            raise ValueError("bootstrap count must be at least 99")
        if self.permutations < 99:
            raise ValueError("permutations must be at least 99")
        if not 0.0 < self.min_coverage <= 1.0:
            raise ValueError("min_coverage must lie in (0, 1]")
        if self.min_overlap < 2:
            raise ValueError("min_overlap must be at least 2")
        if self.kmax < 2:
            raise ValueError("kmax must be at least 2")
        if self.method not in ("params", "fmadogram"):
            raise ValueError("method must be 'params' or 'fmadogram'")


def slugify(name: str) -> str:
    ascii_name = unicodedata.normalize("NFKD", name).encode("ascii", "ignore").decode()
    cleaned = "".join(c.lower() if c.isalnum() else "_" for c in ascii_name)
    collapsed = "_".join(filter(None, cleaned.split("_")))
    return collapsed or "station"


def _dump_json(payload: object, path: Path) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _fit_payload(fit: FitResult) -> dict:
    return {
        "mu": fit.params.mu,
        "sigma": fit.params.sigma,
        "xi": fit.params.xi,
        "method": fit.method,
        "constraint": fit.constraint,
        "loglik": fit.loglik,
        "std_errors": list(fit.std_errors) if fit.std_errors is not None else None,
        "converged": fit.converged,
        "iterations": fit.iterations,
    }


def _load_series(cfg: RunConfig) -> list[AnnualMaximaSeries]:
    if cfg.demo:
        return demo_dataset(seed=cfg.seed)
    if cfg.input is None:
        raise ValueError("no input given: pass --input or --demo")
    path = Path(cfg.input)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    with path.open("r", encoding="utf-8", newline="") as fh:
        return ingest.read_series_csv(fh)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_ingest(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    if cfg.demo:
        series: list[AnnualMaximaSeries] = demo_dataset(seed=cfg.seed)
        skips: list[ingest.SkipEntry] = []
    else:
        if cfg.input is None:
            raise ValueError("no input given: pass --input or --demo")
        path = Path(cfg.input)
        if not path.exists():
            raise FileNotFoundError(f"input file not found: {path}")
        with path.open("rb") as fh:
            records = ingest.parse_daily_csv(fh)
        series, skips = ingest.block_maxima(records, min_coverage=cfg.min_coverage)
    with (out / "series.csv").open("w", encoding="utf-8", newline="") as fh:
        ingest.write_series_csv(series, fh)
    with (out / "skip_log.jsonl").open("w", encoding="utf-8") as fh:
        ingest.write_skip_log(skips, fh)
    return 0


def _fit_all(series: Sequence[AnnualMaximaSeries], ci_level: float) -> dict[str, dict]:
    results: dict[str, dict] = {}
    for s in series:
        fit = fit_mle(s.values, "free")
        ci = profile_ci_xi(s.values, level=ci_level)
        payload = _fit_payload(fit)
        payload["ci_lo"] = ci.lower
        payload["ci_hi"] = ci.upper
        payload["ci_level"] = ci.level
        results[s.station_id] = payload
    return results


def _write_station_params_csv(fits: dict[str, dict], path: Path) -> None:
    lines = ["station,mu,sigma,xi,ci_lo,ci_hi"]
    for station, row in fits.items():
        fields = [
            station,
            format(row["mu"], ".10g"),
            format(row["sigma"], ".10g"),
            format(row["xi"], ".10g"),
            format(row["ci_lo"], ".10g"),
            format(row["ci_hi"], ".10g"),
        ]
        lines.append(",".join(fields))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_fit(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    series = _load_series(cfg)
    fits = _fit_all(series, cfg.ci_level)
    _dump_json(fits, out / "fits.json")
    _write_station_params_csv(fits, out / "station_params.csv")
    return 0


def _gof_all(series: Sequence[AnnualMaximaSeries], cfg: RunConfig) -> dict[str, dict]:
    results: dict[str, dict] = {}
    for s in series:
        decision = gof.select_family(
            s.values,
            alpha=cfg.alpha,
            delta=cfg.delta,
            B=cfg.bootstrap,
            seed=derive_seed(cfg.seed, "gof", s.station_id),
        )
        lrt = gof.lrt_gumbel_vs_gev(s.values)
        results[s.station_id] = {
            "family": decision.chosen,
            "p_gumbel": decision.gumbel_p,
            "p_second": decision.second_p,
            "alpha": decision.alpha,
            "lrt_statistic": lrt.statistic,
            "lrt_p": lrt.p_value,
        }
    return results


def _write_families_csv(results: dict[str, dict], path: Path) -> None:
    lines = ["station,family,p_gumbel,p_second"]
    for station, row in results.items():
        second = "" if row["p_second"] is None else format(row["p_second"], ".10g")
        lines.append(
            ",".join([station, row["family"], format(row["p_gumbel"], ".10g"), second])
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_gof(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    series = _load_series(cfg)
    results = _gof_all(series, cfg)
    _dump_json(results, out / "gof.json")
    _write_families_csv(results, out / "families.csv")
    return 0


def _write_diagnostics(
    series: Sequence[AnnualMaximaSeries],
    fits: dict[str, FitResult],
    out: Path,
) -> None:
    root = out / "diagnostics"
    for s in series:
        fit = fits[s.station_id]
        station_dir = root / slugify(s.station_id)
        station_dir.mkdir(parents=True, exist_ok=True)
        for plot in diagnose.station_diagnostics(s.values, fit.params):
            with (station_dir / f"{plot.kind}.csv").open("w", encoding="utf-8", newline="") as fh:
                diagnose.write_plot_series(plot, fh)
            (station_dir / f"{plot.kind}.json").write_text(
                diagnose.plot_series_sidecar(plot, s.station_id, fit.params), encoding="utf-8"
            )


def cmd_diagnose(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    series = _load_series(cfg)
    fits = {s.station_id: fit_mle(s.values, "free") for s in series}
    _write_diagnostics(series, fits, out)
    return 0


def _cluster_params(
    series: Sequence[AnnualMaximaSeries], cfg: RunConfig, out: Path
) -> cl.Partition:
    """Parameter-space clustering outputs; returns the Ward 2-group cut."""
    cluster_dir = out / "cluster"
    cluster_dir.mkdir(parents=True, exist_ok=True)
    fits = {s.station_id: fit_mle(s.values, "free") for s in series}
    features = cl.param_features(fits, standardize=cfg.standardize)
    dm = cl.euclidean_dm(features)
    with (cluster_dir / "params_distance.tsv").open("w", encoding="utf-8", newline="") as fh:
        cl.write_distance_tsv(dm, fh)

    dendrogram = cl.ward_cluster(features)
    cuts = {k: cl.partition_payload(dendrogram.cut(k)) for k in range(2, cfg.kmax + 1)}
    _dump_json(
        {"merges": [[a, b, h] for a, b, h in dendrogram.merges], "cuts": cuts},
        cluster_dir / "params_dendrogram.json",
    )

    chosen = cl.select_k(dm=dm, method="silhouette", kmax=cfg.kmax)
    with (cluster_dir / "params_silhouette.csv").open("w", encoding="utf-8", newline="") as fh:
        cl.write_score_table(chosen.scores, fh)
    _dump_json(
        {str(k): cl.partition_payload(p) for k, p in chosen.partitions.items()},
        cluster_dir / "params_pam.json",
    )

    pf = cl.select_k(features=features, method="pseudo_f", kmax=cfg.kmax)
    with (cluster_dir / "params_pseudo_f.csv").open("w", encoding="utf-8", newline="") as fh:
        cl.write_score_table(pf.scores, fh)
    return dendrogram.cut(2)


def _cluster_fmadogram(
    series: Sequence[AnnualMaximaSeries], cfg: RunConfig, out: Path
) -> None:
    cluster_dir = out / "cluster"
    cluster_dir.mkdir(parents=True, exist_ok=True)
    dm = cl.fmadogram_dm(series, min_overlap=cfg.min_overlap)
    with (cluster_dir / "fmadogram_distance.tsv").open("w", encoding="utf-8", newline="") as fh:
        cl.write_distance_tsv(dm, fh)
    chosen = cl.select_k(dm=dm, method="silhouette", kmax=cfg.kmax)
    with (cluster_dir / "fmadogram_silhouette.csv").open("w", encoding="utf-8", newline="") as fh:
        cl.write_score_table(chosen.scores, fh)
    _dump_json(
        {str(k): cl.partition_payload(p) for k, p in chosen.partitions.items()},
        cluster_dir / "fmadogram_pam.json",
    )
    lines = ["station_a,station_b,fmadogram,theta,theta_raw"]
    for i in range(dm.n):
        for j in range(i + 1, dm.n):
            coef = cl.extremal_coefficient(float(dm.values[i, j]))
            lines.append(
                ",".join(
                    [
                        dm.labels[i],
                        dm.labels[j],
                        format(dm.values[i, j], ".10g"),
                        format(coef.theta, ".10g"),
                        format(coef.raw, ".10g"),
                    ]
                )
            )
    (cluster_dir / "fmadogram_extremal.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_cluster(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    series = _load_series(cfg)
    if cfg.method == "params":
        _cluster_params(series, cfg, out)
    else:
        _cluster_fmadogram(series, cfg, out)
    return 0


def _independence_report(
    series: Sequence[AnnualMaximaSeries], target: str, cfg: RunConfig, out: Path
) -> None:
    indep_dir = out / "independence"
    indep_dir.mkdir(parents=True, exist_ok=True)
    config = recurrence.RecurrenceConfig(permutations=cfg.permutations, seed=cfg.seed)
    rows = recurrence.pairwise_independence_report(series, target, config)
    slug = slugify(target)
    with (indep_dir / f"{slug}.csv").open("w", encoding="utf-8", newline="") as fh:
        recurrence.write_pair_report_csv(rows, fh)
    _dump_json(recurrence.pair_report_payload(rows), indep_dir / f"{slug}.json")


def cmd_indep(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    series = _load_series(cfg)
    if cfg.target is None:
        raise ValueError("--target is required for the independence report")
    _independence_report(series, cfg.target, cfg, out)
    return 0


def cmd_report(cfg: RunConfig) -> int:
    """Full pipeline: fits, family selection, diagnostics, both clusterings,
    and an independence report for each singleton in the 2-group parameter
    clustering."""
    out = _out_dir(cfg)
    series = _load_series(cfg)

    with (out / "series.csv").open("w", encoding="utf-8", newline="") as fh:
        ingest.write_series_csv(series, fh)

    fit_rows = _fit_all(series, cfg.ci_level)
    _dump_json(fit_rows, out / "fits.json")
    _write_station_params_csv(fit_rows, out / "station_params.csv")

    gof_rows = _gof_all(series, cfg)
    _dump_json(gof_rows, out / "gof.json")
    _write_families_csv(gof_rows, out / "families.csv")

    family_fits = {
        s.station_id: gof.fit_family(s.values, gof_rows[s.station_id]["family"])
        for s in series
    }
    _write_diagnostics(series, family_fits, out)

    two_group = _cluster_params(series, cfg, out)
    _cluster_fmadogram(series, cfg, out)

    for station in cl.singleton_stations(two_group):
        _independence_report(series, station, cfg, out)

    _dump_json(dataclasses.asdict(cfg), out / "run_config.json")
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "fit": cmd_fit,
    "gof": cmd_gof,
    "diagnose": cmd_diagnose,
    "cluster": cmd_cluster,
    "indep": cmd_indep,
    "report": cmd_report,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rainmax",
        description="Annual-maximum rainfall analysis pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("ingest", "parse daily records into annual maxima"),
        ("fit", "fit GEV parameters with profile intervals"),
        ("gof", "goodness-of-fit family selection"),
        ("diagnose", "emit diagnostic plot data"),
        ("cluster", "station clustering and scores"),
        ("indep", "pairwise independence report for a target station"),
        ("report", "run the full pipeline"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=str, default=None, help="JSON config file")
        p.add_argument("--input", type=str, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--bootstrap", type=int, default=None)
        p.add_argument("--permutations", type=int, default=None)
        p.add_argument("--min-coverage", dest="min_coverage", type=float, default=None)
        p.add_argument("--min-overlap", dest="min_overlap", type=int, default=None)
        p.add_argument(
            "--standardize",
            action=argparse.BooleanOptionalAction,
            default=None,
            help="z-score parameter features before clustering",
        )
        p.add_argument("--kmax", type=int, default=None)
        p.add_argument("--method", choices=["params", "fmadogram"], default=None)
        p.add_argument("--demo", action="store_true", default=None, help="use the bundled dataset")
        p.add_argument("--target", type=str, default=None)
    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config is not None:
        path = Path(args.config)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        loaded = json.loads(path.read_text(encoding="utf-8"))
        known = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = set(loaded) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = dataclasses.replace(cfg, **loaded)
    overrides = {
        f.name: getattr(args, f.name)
        for f in dataclasses.fields(RunConfig)
        if hasattr(args, f.name) and getattr(args, f.name) is not None
    }
    cfg = dataclasses.replace(cfg, **overrides)
    cfg.validate()
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return _COMMANDS[args.command](cfg)
    except Exception as exc:  # noqa: BLE001 - CLI boundary emits an error envelope
        envelope = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        sys.stderr.write(json.dumps(envelope, sort_keys=True) + "\n")
        out = getattr(args, "out", None)
        if out is not None and Path(out).is_dir():
            _dump_json(envelope, Path(out) / "error.json")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

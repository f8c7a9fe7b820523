"""Command-line front end: ``heightlab <subcommand> [flags]``.

Exit codes: 0 success or agreement, 1 configuration error, 2 unsupported or
inconclusive result, 3 exact and empirical verdicts disagree, 4 canonical
height did not converge.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from . import __version__
from .elliptic import (DEFAULT_TOL as CANONICAL_TOL, EllipticCurve, format_curve_point,
                       load_curve_config, parse_curve_point)
from .errors import ConfigError, ConvergenceFailure, HeightlabError, Inconclusive
from .estimator import (DEFAULT_MIN_THRESHOLD, DEFAULT_TOL, DEFAULT_WINDOWS, Region,
                        SampleSchedule, boundedness_probe, classify, count_points, default_bound,
                        enumerate_points, flim, label_from_trace, mu_estimate,
                        numeric_equiv_empirical)
from .geometry import DivisorClass, EllipticModel, ModelVariety, get_map, get_model
from .report import to_csv, to_json

COMMANDS = ("classify", "flim", "equiv", "probe", "mu", "canonical", "enumerate")
CANONICAL_DEFAULT_TOL = 1e-8

EXIT_OK, EXIT_CONFIG, EXIT_UNSUPPORTED, EXIT_DISAGREE, EXIT_CONVERGENCE = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    """Fully resolved run parameters; serializes canonically."""

    command: str
    model: Optional[str] = None
    divisor: Optional[str] = None
    point: Optional[str] = None
    ample: Optional[str] = None
    other: Optional[str] = None
    other_point: Optional[str] = None
    exclude: list[str] = field(default_factory=list)
    bound: Optional[int] = None
    windows: int = DEFAULT_WINDOWS
    min_threshold: float = DEFAULT_MIN_THRESHOLD
    height_bound: Optional[float] = None
    tol: Optional[float] = None
    curve: Optional[str] = None
    map: Optional[str] = None
    format: str = "json"
    out: Optional[str] = None
    seedless: bool = True
    count_only: bool = False
    emit_plot_data: Optional[str] = None

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}

    def canonical(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "command" not in data:
            raise ConfigError("config needs a command")
        return cls(**data)


# ---------------------------------------------------------------------------
# parsing


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config; explicit flags override it")
    common.add_argument("--model", help="p1, p2, p3, p1xp1, blowup_p2 or elliptic")
    common.add_argument("--divisor", help="class vector, e.g. 3,-1 (elliptic: the degree)")
    common.add_argument("--point", help="elliptic point component x,y or O; for canonical the point")
    common.add_argument("--ample", help="reference ample class (elliptic: d,O or d,x,y)")
    common.add_argument("--other", help="second class for equiv")
    common.add_argument("--other-point", dest="other_point", help="point component of --other")
    common.add_argument("--exclude", action="append", help="named curve to remove from the region")
    common.add_argument("--bound", type=int, help="coordinate bound (elliptic: box radius)")
    common.add_argument("--windows", type=int)
    common.add_argument("--min-threshold", dest="min_threshold", type=float)
    common.add_argument("--height-bound", dest="height_bound", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--curve", help="curve config file")
    common.add_argument("--map", help="segre, proj1, blowdown or identity")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seedless", action=argparse.BooleanOptionalAction, default=None)
    common.add_argument("--count-only", dest="count_only", action="store_true", default=None)
    common.add_argument("--emit-plot-data", dest="emit_plot_data", metavar="PATH")
    parser = argparse.ArgumentParser(prog="heightlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"heightlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve_config(argv: list[str]) -> RunConfig:
    args = _parser().parse_args(argv)
    data: dict[str, Any] = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    data["command"] = args.command
    for key, value in vars(args).items():
        if key in ("config", "command") or value is None:
            continue
        data[key] = value
    cfg = RunConfig.from_dict(data)
    if cfg.model is None and cfg.curve is not None:
        cfg.model = "elliptic"
    if cfg.tol is None:
        cfg.tol = CANONICAL_DEFAULT_TOL if cfg.command == "canonical" else DEFAULT_TOL
    cfg.exclude = sorted(set(cfg.exclude))
    if cfg.format not in ("json", "csv"):
        raise ConfigError(f"unknown format {cfg.format!r}")
    if cfg.seedless is False:
        raise ConfigError("no randomized code path exists; --no-seedless is not supported")
    return cfg


def _find_curve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    shipped = resources.files("heightlab") / "curves" / p.name
    if shipped.is_file():
        return Path(str(shipped))
    raise ConfigError(f"curve config {path} not found")


def _curve(cfg: RunConfig) -> EllipticCurve:
    if cfg.curve is None:
        raise ConfigError("this run needs --curve")
    return load_curve_config(_find_curve(cfg.curve))


def _model(cfg: RunConfig) -> ModelVariety:
    if cfg.model is None:
        raise ConfigError("--model is required")
    curve = _curve(cfg) if cfg.model == "elliptic" else None
    return get_model(cfg.model, curve)


def _numbers(text: str) -> list:
    try:
        return [Fraction(s.strip()) for s in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse class vector {text!r}") from exc


def parse_divisor(model: ModelVariety, text: Optional[str], point: Optional[str] = None,
                  what: str = "--divisor") -> DivisorClass:
    if text is None:
        raise ConfigError(f"{what} is required")
    if isinstance(model, EllipticModel):
        head, _, rest = text.partition(",")
        if rest and point is not None:
            raise ConfigError(f"give the point of {what} once")
        p0 = model.parse_point(rest if rest else (point or "O"))
        return model.divisor(_numbers(head), p0)
    if point is not None:
        raise ConfigError("point components exist only on the elliptic model")
    vec = _numbers(text)
    if len(vec) != model.picard_rank:
        raise ConfigError(f"{model.id} classes have {model.picard_rank} coordinates "
                          f"({', '.join(model.basis_names)})")
    return model.divisor(vec)


def _default_ample(model: ModelVariety) -> str:
    return {"p1xp1": "1,1", "blowup_p2": "3,-1"}.get(model.id, "1")


# ---------------------------------------------------------------------------
# reports


def _fmt(model: ModelVariety, p) -> Optional[str]:
    return None if p is None else model.format_point(p)


def _trace_rows(thresholds, mins, maxs, counts):
    return [(i + 1, t, lo, hi, n) for i, (t, lo, hi, n) in enumerate(zip(thresholds, mins, maxs, counts))]


TRACE_HEADER = ("window", "threshold", "min_ratio", "max_ratio", "samples")


def _flim_block(model, est) -> dict:
    return {
        "height_bound": est.height_bound,
        "thresholds": est.thresholds,
        "per_window_min": est.per_window_min,
        "per_window_max": est.per_window_max,
        "per_window_count": est.per_window_count,
        "estimate": est.estimate,
        "sample_count": est.sample_count,
        "supported": est.supported,
        "witness": _fmt(model, est.witness),
    }


def _schedule(cfg: RunConfig) -> SampleSchedule:
    return SampleSchedule(cfg.height_bound, cfg.windows, cfg.min_threshold)


def _bound(cfg: RunConfig, model: ModelVariety) -> int:
    return default_bound(model) if cfg.bound is None else cfg.bound


def _write_plot(cfg: RunConfig, est) -> None:
    if cfg.emit_plot_data and est.plot_data is not None:
        Path(cfg.emit_plot_data).write_text(
            to_csv(("h_D", "ratio", "weight"), est.plot_data))


def run(cfg: RunConfig) -> tuple[int, dict, Optional[tuple]]:
    """Execute one command; returns (exit code, report, csv table or None)."""
    cmd = cfg.command
    if cmd == "canonical":
        return _run_canonical(cfg)
    model = _model(cfg)
    bound = _bound(cfg, model)
    region = Region(model, tuple(cfg.exclude))
    schedule = _schedule(cfg)
    report: dict[str, Any] = {"model": model.id}
    if cmd == "enumerate":
        if cfg.count_only:
            report["count"] = count_points(region, bound)
        else:
            pts = [model.format_point(p) for p in enumerate_points(region, bound)]
            report["count"] = len(pts)
            report["points"] = pts
        table = (("point",), [(p,) for p in report.get("points", [])]) if not cfg.count_only \
            else (("count",), [(report["count"],)])
        return EXIT_OK, report, table

    if cmd == "mu":
        if cfg.map is None:
            raise ConfigError("mu needs --map")
        phi = get_map(cfg.map, model)
        d_w = parse_divisor(phi.source, cfg.ample or _default_ample(phi.source), what="--ample")
        d_v = parse_divisor(phi.target, cfg.divisor or "1")
        region = Region(phi.source, tuple(cfg.exclude))
        res = mu_estimate(cfg.map, d_w, d_v, region, schedule, bound, model)
        report.update({"map": res.map_name, "D_W": str(d_w), "D_V": str(d_v),
                       "value": res.value, "exact_upper_bound": res.exact_upper_bound,
                       "within_bound": (res.exact_upper_bound is not None
                                        and res.value <= float(res.exact_upper_bound) + cfg.tol),
                       "flim": _flim_block(model, res.flim)})
        f = res.flim
        code = EXIT_OK if f.supported else EXIT_UNSUPPORTED
        return code, report, (TRACE_HEADER, _trace_rows(f.thresholds, f.per_window_min,
                                                        f.per_window_max, f.per_window_count))

    d_ample = parse_divisor(model, cfg.ample or _default_ample(model), what="--ample")
    e = parse_divisor(model, cfg.divisor, cfg.point)
    report.update({"E": str(e), "D": str(d_ample), "region": list(region.excluded),
                   "bound": bound})

    if cmd in ("classify", "flim"):
        if cmd == "flim":
            est = flim(e, d_ample, region, schedule, bound, plot=bool(cfg.emit_plot_data))
            label = label_from_trace(est, cfg.tol)
            report.update(_flim_block(model, est))
            report["verdict"] = label
            code = EXIT_OK if est.supported else EXIT_UNSUPPORTED
        else:
            res = classify(e, d_ample, region, schedule, bound, cfg.tol)
            est = res.flim
            report["exact"] = res.exact
            report["empirical"] = dict(label=res.empirical_label, **_flim_block(model, est))
            report["criterion"] = res.criterion
            report["agree"] = res.agree
            code = (EXIT_UNSUPPORTED if res.agree is None
                    else EXIT_OK if res.agree else EXIT_DISAGREE)
            if cfg.emit_plot_data:
                est = flim(e, d_ample, region, schedule, bound, plot=True)
        _write_plot(cfg, est)
        return code, report, (TRACE_HEADER, _trace_rows(est.thresholds, est.per_window_min,
                                                        est.per_window_max, est.per_window_count))

    if cmd == "equiv":
        other = parse_divisor(model, cfg.other, cfg.other_point, what="--other")
        res = numeric_equiv_empirical(e, other, d_ample, region, schedule, bound, cfg.tol)
        report.update({"other": str(other), "height_bound": res.height_bound,
                       "thresholds": res.thresholds, "ratio_trace": res.ratio_trace,
                       "per_window_count": res.per_window_count, "verdict": res.verdict,
                       "exact_equivalent": res.exact, "agree": res.agree})
        code = EXIT_OK if res.supported else EXIT_UNSUPPORTED
        return code, report, (("window", "threshold", "max_abs_ratio", "samples"),
                              [(i + 1, t, r, n) for i, (t, r, n) in
                               enumerate(zip(res.thresholds, res.ratio_trace, res.per_window_count))])

    if cmd == "probe":
        res = boundedness_probe(e, d_ample, region, schedule, bound, cfg.tol)
        report.update({"label": res.label, "height_bound": res.height_bound,
                       "thresholds": res.thresholds, "per_ball_max": res.per_ball_max,
                       "per_ball_min": res.per_ball_min, "per_ball_count": res.per_ball_count,
                       "slope": res.slope, "range": res.range,
                       "witness_high": _fmt(model, res.witness_high),
                       "witness_high_value": res.witness_high_value,
                       "witness_low": _fmt(model, res.witness_low),
                       "witness_low_value": res.witness_low_value})
        code = EXIT_UNSUPPORTED if res.label == "inconclusive" else EXIT_OK
        return code, report, (("ball", "threshold", "min_height", "max_height", "samples"),
                              _trace_rows(res.thresholds, res.per_ball_min, res.per_ball_max,
                                          res.per_ball_count))
    raise ConfigError(f"unknown command {cmd!r}")


def _run_canonical(cfg: RunConfig):
    curve = _curve(cfg)
    if cfg.point is None:
        raise ConfigError("canonical needs --point")
    p = parse_curve_point(cfg.point)
    if not curve.contains(p):
        raise ConfigError(f"{cfg.point} is not on {curve}")
    value = curve.canonical_height(p, cfg.tol)
    order = curve.torsion_order(p)
    report = {"curve": str(curve), "point": format_curve_point(p), "value": value.value,
              "error_radius": value.error_radius, "iterations": value.iterations,
              "naive_height": curve.naive_height(p).value, "torsion_order": order}
    return EXIT_OK, report, (("key", "value"), list(report.items()))


def main(argv: Optional[list[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = resolve_config(argv)
    except HeightlabError as exc:
        print(f"heightlab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        code, body, table = run(cfg)
    except ConvergenceFailure as exc:
        print(f"heightlab: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except Inconclusive as exc:
        print(f"heightlab: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (HeightlabError, ValueError, KeyError) as exc:
        print(f"heightlab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.format == "csv":
        text = to_csv(*table)
    else:
        text = to_json({"version": __version__, "command": cfg.command,
                        "config": cfg.to_dict(), "exit_code": code, "result": body})
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

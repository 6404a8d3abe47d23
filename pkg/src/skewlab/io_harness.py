"""Experiment harness: config parsing (TOML), dataset ingestion (IDX
image files, generic numeric CSV), deterministic sweep execution, and
CSV / SVG report emission.

All artifact writes format floats with repr() and iterate sweep grids in
a fixed order, so reruns with the same config are byte-identical.
"""

from __future__ import annotations

import concurrent.futures
import math
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any, Callable, Mapping, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import dynamics, maxmargin, skews, taskgen
from .core import Dataset, read_dataset_csv, write_dataset_csv

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

KINDS = ("gen", "maxmargin", "skews", "normcurve", "dynamics", "verify", "report")


class BadMagicError(ValueError):
    """IDX file magic number mismatch."""


class TruncatedFileError(ValueError):
    """IDX payload shorter than the header claims."""


class CountMismatchError(ValueError):
    """Image and label counts disagree."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class RawImageSet:
    """Decoded IDX pair: byte images and their digit labels."""

    images: np.ndarray  # (n, rows, cols) uint8
    labels: np.ndarray  # (n,) uint8

    def __post_init__(self) -> None:
        if self.images.shape[0] != self.labels.shape[0]:
            raise CountMismatchError(
                f"{self.images.shape[0]} images vs {self.labels.shape[0]} labels"
            )


def _read_exact(data: bytes, offset: int, count: int, path: Path) -> bytes:
    if offset + count > len(data):
        raise TruncatedFileError(
            f"{path}: needed {offset + count} bytes, file has {len(data)}"
        )
    return data[offset:offset + count]


def _check_magic(data: bytes, expected: int, path: Path) -> None:
    (magic,) = struct.unpack(">I", _read_exact(data, 0, 4, path))
    if magic != expected:
        raise BadMagicError(f"{path}: magic 0x{magic:08x}, expected 0x{expected:08x}")


def parse_idx(images_path: Path | str, labels_path: Path | str) -> RawImageSet:
    """Parse a big-endian IDX image/label file pair."""
    images_path, labels_path = Path(images_path), Path(labels_path)

    data = images_path.read_bytes()
    _check_magic(data, IDX_IMAGES_MAGIC, images_path)
    n, rows, cols = struct.unpack(">III", _read_exact(data, 4, 12, images_path))
    payload = _read_exact(data, 16, n * rows * cols, images_path)
    images = np.frombuffer(payload, dtype=np.uint8).reshape(n, rows, cols)

    data = labels_path.read_bytes()
    _check_magic(data, IDX_LABELS_MAGIC, labels_path)
    (m,) = struct.unpack(">I", _read_exact(data, 4, 4, labels_path))
    labels = np.frombuffer(_read_exact(data, 8, m, labels_path), dtype=np.uint8)
    return RawImageSet(images=images, labels=labels)


def binarize_labels(raw: RawImageSet) -> list[tuple[tuple[float, ...], int]]:
    """Digits 0-4 become class +1, digits 5-9 class -1; pixels are
    flattened row-major and scaled to [0, 1]."""
    out = []
    for img, label in zip(raw.images, raw.labels):
        if not 0 <= int(label) <= 9:
            raise ValueError(f"label {int(label)} outside 0-9")
        y = 1 if int(label) <= 4 else -1
        out.append((tuple((img.reshape(-1) / 255.0).tolist()), y))
    return out


def load_csv_tabular(path: Path | str, label_column: int,
                     scale_to_unit: bool = True
                     ) -> tuple[list[tuple[tuple[float, ...], int]], dict[str, str]]:
    """Load a rectangular numeric CSV as labeled feature vectors.

    The designated column supplies the +-1 label; the remaining columns
    are features, optionally rescaled per-column to [-1, 1] (observed
    min/max recorded in the returned metadata; constant columns map to 0
    with a warning).
    """
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError as exc:
            raise ValueError(f"non-numeric cell in {path}: {exc}") from exc
    if not rows:
        raise ValueError(f"{path} is empty")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path} is not rectangular")
    if not 0 <= label_column < width:
        raise ValueError(f"label column {label_column} out of range")
    data = np.array(rows)
    labels = data[:, label_column]
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise ValueError("label column must contain only +-1")
    feats = np.delete(data, label_column, axis=1)
    meta: dict[str, str] = {"scaled": str(scale_to_unit).lower()}
    if scale_to_unit:
        lo = feats.min(axis=0)
        hi = feats.max(axis=0)
        span = hi - lo
        constant = span == 0
        if np.any(constant):
            warnings.warn(
                f"{int(np.count_nonzero(constant))} constant feature column(s) mapped to 0"
            )
        safe = np.where(constant, 1.0, span)
        feats = np.where(constant, 0.0, 2.0 * (feats - lo) / safe - 1.0)
        meta["feature_min"] = ",".join(repr(v) for v in lo.tolist())
        meta["feature_max"] = ",".join(repr(v) for v in hi.tolist())
    return (
        [(tuple(f.tolist()), int(y)) for f, y in zip(feats, labels)],
        meta,
    )


# ---------------------------------------------------------------------------
# Minimal SVG line charts
# ---------------------------------------------------------------------------

_PALETTE = ("#1f6fb2", "#d1495b", "#3a9e5f", "#8a5bb8", "#c98a1f", "#4f4f4f")


def write_line_chart(path: Path | str, series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
                     title: str = "", x_label: str = "", y_label: str = "",
                     log_x: bool = False, width: int = 640, height: int = 420) -> None:
    """Write an SVG 1.1 chart with one polyline per (name, xs, ys) series."""
    margin_l, margin_r, margin_t, margin_b = 60, 140, 30, 45
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b

    xs_all: list[float] = []
    ys_all: list[float] = []
    for _, xs, ys in series:
        for x, y in zip(xs, ys):
            if math.isfinite(x) and math.isfinite(y) and (not log_x or x > 0):
                xs_all.append(math.log10(x) if log_x else x)
                ys_all.append(y)
    if not xs_all:
        raise ValueError("no finite data to plot")
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def px(x: float) -> float:
        return margin_l + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return margin_t + (y_hi - y) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{margin_l}" y="{margin_t}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#999"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
            f'font-size="14">{title}</text>'
        )
    for k in range(5):
        fx = x_lo + (x_hi - x_lo) * k / 4
        fy = y_lo + (y_hi - y_lo) * k / 4
        gx, gy = px(fx), py(fy)
        x_text = f"1e{fx:.2g}" if log_x else f"{fx:.4g}"
        parts.append(
            f'<line x1="{gx:.1f}" y1="{margin_t + plot_h}" x2="{gx:.1f}" '
            f'y2="{margin_t + plot_h + 5}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{gx:.1f}" y="{margin_t + plot_h + 18}" '
            f'text-anchor="middle" font-size="11">{x_text}</text>'
        )
        parts.append(
            f'<line x1="{margin_l - 5}" y1="{gy:.1f}" x2="{margin_l}" '
            f'y2="{gy:.1f}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{margin_l - 8}" y="{gy + 4:.1f}" text-anchor="end" '
            f'font-size="11">{fy:.4g}</text>'
        )
    if x_label:
        parts.append(
            f'<text x="{margin_l + plot_w / 2:.1f}" y="{height - 8}" '
            f'text-anchor="middle" font-size="12">{x_label}</text>'
        )
    if y_label:
        parts.append(
            f'<text x="15" y="{margin_t + plot_h / 2:.1f}" font-size="12" '
            f'transform="rotate(-90 15 {margin_t + plot_h / 2:.1f})" '
            f'text-anchor="middle">{y_label}</text>'
        )
    for k, (name, xs, ys) in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        pts = []
        for x, y in zip(xs, ys):
            if not (math.isfinite(x) and math.isfinite(y)):
                continue
            if log_x:
                if x <= 0:
                    continue
                x = math.log10(x)
            pts.append(f"{px(x):.2f},{py(y):.2f}")
        if pts:
            parts.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                f'points="{" ".join(pts)}"/>'
            )
        ly = margin_t + 15 + 16 * k
        parts.append(
            f'<line x1="{width - margin_r + 10}" y1="{ly - 4}" '
            f'x2="{width - margin_r + 30}" y2="{ly - 4}" stroke="{color}" '
            'stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{width - margin_r + 35}" y="{ly}" font-size="11">{name}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# Experiment configs and sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed experiment description (one TOML table per module)."""

    kind: str
    out_dir: Path
    emit_svg: bool = False
    jobs: int = 1
    seed: int = 0
    sections: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sections", MappingProxyType(dict(self.sections)))
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")

    def section(self, name: str) -> dict[str, Any]:
        value = self.sections.get(name, {})
        if not isinstance(value, dict):
            raise ConfigError(f"[{name}] must be a table")
        return dict(value)


def load_config(path: Path | str, kind: str | None = None,
                out_dir: Path | str | None = None, seed: int | None = None,
                jobs: int | None = None) -> ExperimentConfig:
    """Read a TOML experiment config; CLI-level overrides win."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    cfg_kind = kind or raw.get("kind")
    if not cfg_kind:
        raise ConfigError("config needs a top-level kind")
    output = raw.get("output", {})
    return ExperimentConfig(
        kind=str(cfg_kind),
        out_dir=Path(out_dir if out_dir is not None else output.get("dir", "out")),
        emit_svg=bool(output.get("emit_svg", False)),
        jobs=int(jobs if jobs is not None else raw.get("jobs", 1)),
        seed=int(seed if seed is not None else raw.get("seed", 0)),
        sections={k: v for k, v in raw.items() if isinstance(v, dict)},
    )


def _sweep_axes(cfg: ExperimentConfig) -> tuple[list[float], list[int]]:
    sweep = cfg.section("sweep")
    ps = [float(v) for v in sweep.get("p", [0.9])]
    seeds = [int(v) for v in sweep.get("seeds", [cfg.seed])]
    if not ps or not seeds:
        raise ConfigError("sweep axes must be non-empty")
    return ps, seeds


def _build_dataset(cfg: ExperimentConfig, p: float, seed: int) -> Dataset:
    section = cfg.section("dataset")
    path = section.get("path")
    if path:
        return read_dataset_csv(path)
    generator = section.get("generator", "gen_2dim")
    n = int(section.get("n", 64))
    B = float(section.get("B", 1.0))
    spec = taskgen.GenSpec(
        n=n, p=p, B=B, seed=seed,
        exact_counts=bool(section.get("exact_counts", False)),
        pairing=bool(section.get("pairing", False)),
    )
    if generator == "gen_2dim":
        d = taskgen.gen_2dim(spec)
    elif generator == "gen_geometric_2d":
        d = taskgen.gen_geometric_2d(
            float(section.get("maj_margin", 0.1)),
            float(section.get("min_margin", 2.0)),
            int(section.get("n_maj", n // 2 * 2)),
            int(section.get("n_min", 2)),
            B=B,
        )
    elif generator == "gen_highdim_spurious":
        d = taskgen.gen_highdim_spurious(
            n, int(section.get("D", 100)), p,
            inv_margin=float(section.get("inv_margin", 1.0)), seed=seed,
        )
    else:
        raise ConfigError(f"unknown generator {generator!r}")
    ratio = section.get("duplicate_ratio")
    if ratio is not None:
        d = taskgen.duplicate_majority(d, float(ratio), seed=seed)
    return d


def _fmt(value: float) -> str:
    return repr(float(value))


def _cell_tag(p: float, seed: int) -> str:
    return f"p{p:g}_seed{seed}"


def _run_cells(cfg: ExperimentConfig,
               work: Sequence[tuple[str, Callable[[], Any]]]
               ) -> tuple[dict[str, Any], list[tuple[str, str]]]:
    """Execute sweep cells (optionally in parallel) and collect results in
    submission order; failures are gathered, not raised."""
    results: dict[str, Any] = {}
    failures: list[tuple[str, str]] = []
    if cfg.jobs > 1 and len(work) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [(tag, pool.submit(fn)) for tag, fn in work]
        for tag, fut in futures:
            try:
                results[tag] = fut.result()
            except Exception as exc:  # noqa: BLE001 - reported in manifest
                failures.append((tag, f"{type(exc).__name__}: {exc}"))
    else:
        for tag, fn in work:
            try:
                results[tag] = fn()
            except Exception as exc:  # noqa: BLE001 - reported in manifest
                failures.append((tag, f"{type(exc).__name__}: {exc}"))
    return results, failures


def _write_failures(cfg: ExperimentConfig, failures: list[tuple[str, str]]) -> None:
    if failures:
        lines = [f"{tag}: {msg}" for tag, msg in failures]
        (cfg.out_dir / "failures.txt").write_text("\n".join(lines) + "\n")


def write_trajectory_csv(path: Path | str, traj: dynamics.Trajectory) -> None:
    lines = ["t,loss,w_inv_norm,w_sp,beta,beta_2d,residual_norm"]
    for r in traj.records:
        w_inv_norm = math.sqrt(sum(v * v for v in r.w_inv))
        lines.append(",".join([
            _fmt(r.t), _fmt(r.loss), _fmt(w_inv_norm), _fmt(r.w_sp),
            _fmt(r.beta), _fmt(r.beta_2d), _fmt(r.residual_norm),
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trajectory_csv(path: Path | str) -> list[dict[str, float]]:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    return [
        dict(zip(header, (float(v) for v in line.split(","))))
        for line in lines[1:] if line.strip()
    ]


def _dyn_spec(cfg: ExperimentConfig, seed: int) -> dynamics.DynSpec:
    section = cfg.section("dynamics")
    batch = section.get("batch", "full")
    batch_size = None if batch in ("full", None) else int(batch)
    return dynamics.DynSpec(
        loss=str(section.get("loss", "exponential")),
        mode=str(section.get("mode", "flow")),
        t_checkpoints=tuple(float(t) for t in section.get("checkpoints", [1.0, 10.0, 100.0])),
        lr=float(section.get("lr", 1e-3)),
        weight_decay=float(section.get("weight_decay", 0.0)),
        batch_size=batch_size,
        seed=seed,
        rel_tol=float(section.get("rel_tol", 1e-8)),
    )


def run_experiment(cfg: ExperimentConfig) -> int:
    """Execute one experiment; returns 0 iff every grid cell succeeded."""
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.kind == "gen":
        return _run_gen(cfg)
    if cfg.kind == "dynamics":
        return _run_dynamics(cfg)
    if cfg.kind == "skews":
        return _run_skews(cfg)
    if cfg.kind == "normcurve":
        return _run_normcurve(cfg)
    if cfg.kind == "maxmargin":
        return _run_maxmargin(cfg)
    if cfg.kind == "report":
        return _run_report(cfg)
    if cfg.kind == "verify":
        from . import verification

        selection = cfg.section("verify").get("only")
        return verification.run(selection)
    raise ConfigError(f"unhandled kind {cfg.kind}")


def _run_gen(cfg: ExperimentConfig) -> int:
    ps, seeds = _sweep_axes(cfg)
    work = [
        (_cell_tag(p, s), (lambda p=p, s=s: _build_dataset(cfg, p, s)))
        for p in ps for s in seeds
    ]
    results, failures = _run_cells(cfg, work)
    for tag, dataset in results.items():
        write_dataset_csv(dataset, cfg.out_dir / f"dataset_{tag}.csv")
    _write_failures(cfg, failures)
    return 1 if failures else 0


def _run_dynamics(cfg: ExperimentConfig) -> int:
    ps, seeds = _sweep_axes(cfg)
    verify_bounds = bool(cfg.section("dynamics").get("verify_bounds", False))

    def cell(p: float, s: int) -> dynamics.Trajectory:
        dataset = _build_dataset(cfg, p, s)
        return dynamics.simulate(dataset, _dyn_spec(cfg, s))

    work = [
        (_cell_tag(p, s), (lambda p=p, s=s: cell(p, s)))
        for p in ps for s in seeds
    ]
    results, failures = _run_cells(cfg, work)
    for tag, traj in results.items():
        write_trajectory_csv(cfg.out_dir / f"traj_{tag}.csv", traj)
    if verify_bounds:
        for (p, s) in [(p, s) for p in ps for s in seeds]:
            tag = _cell_tag(p, s)
            traj = results.get(tag)
            if traj is None:
                continue
            lines = ["t,lower,upper,beta"]
            for r in traj.records:
                if traj.spec.loss == "logistic":
                    lo, hi = dynamics.thm_b4_bounds(p, r.t)
                else:
                    lo, hi = dynamics.thm_b2_bounds(p, 1.0, 1.0, r.t)
                lines.append(",".join([_fmt(r.t), _fmt(lo), _fmt(hi), _fmt(r.beta)]))
            (cfg.out_dir / f"bounds_{tag}.csv").write_text("\n".join(lines) + "\n")
    if cfg.emit_svg and results:
        series = []
        for tag, traj in results.items():
            xs = [r.t for r in traj.records]
            ys = [r.beta for r in traj.records]
            series.append((tag, xs, ys))
        write_line_chart(
            cfg.out_dir / "beta.svg", series,
            title="spurious/invariant weight ratio",
            x_label="t", y_label="beta", log_x=True,
        )
    _write_failures(cfg, failures)
    return 1 if failures else 0


def _run_skews(cfg: ExperimentConfig) -> int:
    ps, seeds = _sweep_axes(cfg)

    def cell(p: float, s: int) -> skews.SkewReport:
        return skews.compute_skew_report(_build_dataset(cfg, p, s))

    work = [
        (_cell_tag(p, s), (lambda p=p, s=s: cell(p, s)))
        for p in ps for s in seeds
    ]
    results, failures = _run_cells(cfg, work)
    columns = [
        "cell", "kappa1", "kappa2", "kappa1_tilde", "kappa2_tilde",
        "c1", "c2", "lower_bound", "upper_bound", "measured_b_wsp",
        "sandwich_holds",
    ]
    lines = [",".join(columns)]
    for tag, rep in results.items():
        lines.append(",".join([
            tag, _fmt(rep.kappa1), _fmt(rep.kappa2), _fmt(rep.kappa1_tilde),
            _fmt(rep.kappa2_tilde), _fmt(rep.c1), _fmt(rep.c2),
            _fmt(rep.lower_bound), _fmt(rep.upper_bound),
            _fmt(rep.measured_b_wsp), str(rep.sandwich_holds).lower(),
        ]))
    (cfg.out_dir / "skews.csv").write_text("\n".join(lines) + "\n")
    _write_failures(cfg, failures)
    return 1 if failures else 0


def _run_normcurve(cfg: ExperimentConfig) -> int:
    section = cfg.section("normcurve")
    margins = [float(v) for v in section.get("margins", [])]
    if not margins:
        count = int(section.get("harmonic_n", 12))
        margins = [1.0 / i for i in range(1, count + 1)]
    sizes = [int(v) for v in section.get("sizes", range(2, len(margins) + 1, 2))]
    inv_points = []
    for k, m in enumerate(margins):
        y = 1 if k % 2 == 0 else -1
        inv_points.append(((y * m,), y))
    try:
        rows = skews.norm_growth_curve(inv_points, sizes)
    except Exception as exc:  # noqa: BLE001 - reported in manifest
        _write_failures(cfg, [("normcurve", f"{type(exc).__name__}: {exc}")])
        return 1
    lines = ["n,v_norm,v_tilde_norm"]
    for n, v, vt in rows:
        lines.append(",".join([str(n), _fmt(v), _fmt(vt)]))
    (cfg.out_dir / "normcurve.csv").write_text("\n".join(lines) + "\n")
    if cfg.emit_svg:
        write_line_chart(
            cfg.out_dir / "normcurve.svg",
            [
                ("v_norm", [r[0] for r in rows], [r[1] for r in rows]),
                ("v_tilde_norm", [r[0] for r in rows], [r[2] for r in rows]),
            ],
            title="prefix least-norm growth", x_label="n", y_label="norm",
        )
    return 0


def _run_maxmargin(cfg: ExperimentConfig) -> int:
    section = cfg.section("maxmargin")
    dataset = _build_dataset(cfg, float(section.get("p", 0.9)), cfg.seed)
    mask = str(section.get("mask", "full"))
    subset = str(section.get("subset", "all"))
    targets_kind = str(section.get("targets", "default"))
    from .core import split_groups

    if subset != "all":
        split = split_groups(dataset)
        idx = split.majority if subset == "maj" else split.minority
        if not idx:
            _write_failures(cfg, [("maxmargin", f"{subset} group is empty")])
            return 1
        dataset = Dataset(
            tuple(dataset.points[k] for k in idx), dataset.sp_scale,
            dataset.sp_two_valued, dataset.meta,
        )
    try:
        if targets_kind.startswith("balanced:"):
            sol = maxmargin.balanced_max_margin(dataset, float(targets_kind.split(":", 1)[1]))
        else:
            problem = maxmargin.MarginProblem(
                dataset, (1.0,) * len(dataset),
                "inv_only" if mask == "inv" else "full", True,
            )
            sol = maxmargin.solve_least_norm(problem)
    except maxmargin.NotSeparableError as exc:
        _write_failures(cfg, [("maxmargin", f"NotSeparable: {exc}")])
        return 1
    lines = [
        f"w_inv={','.join(_fmt(v) for v in sol.model.w_inv)}",
        f"w_sp={','.join(_fmt(v) for v in sol.model.w_sp)}",
        f"bias={_fmt(sol.model.bias)}",
        f"objective={_fmt(sol.objective)}",
        f"kkt_residual={_fmt(sol.kkt_residual)}",
        f"iterations={sol.iterations}",
        f"converged={str(sol.converged).lower()}",
        f"backend={maxmargin.KERNEL_BACKEND}",
    ]
    (cfg.out_dir / "model.txt").write_text("\n".join(lines) + "\n")
    duals = ["index,alpha"]
    duals += [f"{k},{_fmt(a)}" for k, a in enumerate(sol.duals)]
    (cfg.out_dir / "duals.csv").write_text("\n".join(duals) + "\n")
    return 0 if sol.converged else 1


def _run_report(cfg: ExperimentConfig) -> int:
    section = cfg.section("report")
    inputs = [Path(p) for p in section.get("trajectories", [])]
    if not inputs:
        inputs = sorted(cfg.out_dir.glob("traj_*.csv"))
    if not inputs:
        _write_failures(cfg, [("report", "no trajectory CSVs found")])
        return 1
    series = []
    for path in inputs:
        rows = read_trajectory_csv(path)
        xs = [r["t"] for r in rows]
        # alignment of the weight vector with the spurious axis
        ys = [
            r["w_sp"] / math.sqrt(r["w_inv_norm"] ** 2 + r["w_sp"] ** 2)
            if (r["w_inv_norm"] or r["w_sp"]) else 0.0
            for r in rows
        ]
        series.append((path.stem, xs, ys))
    write_line_chart(
        cfg.out_dir / "alignment.svg", series,
        title="spurious alignment of the weight vector",
        x_label="t", y_label="w_sp / ||w||", log_x=True,
    )
    return 0

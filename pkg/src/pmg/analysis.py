"""Per-class complexity profiles, Pearson correlation, and bias reports.

A class's embedded point cloud is summarized by three complexity measures:
global intrinsic dimension (TLE), mean curvature proxy, and significant-
hole metrics from H1 persistence. build_bias_report joins per-class
profiles with a class-accuracy table and correlates accuracy against each
measure.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import topology
from .curvature import curvature_profile, default_neighbor_count, resolve_tangent_dim
from .errors import (
    ParameterError,
    PmgError,
    UndefinedCorrelationError,
    ValidationError,
)
from .intrinsic_dim import DEFAULT_K, global_id, local_id_tle
from .pointcloud import PointCloud, knn, load_point_cloud, diameter

CLOUD_SUFFIXES = (".csv", ".pmg", ".bin")


@dataclass(frozen=True)
class ProfileConfig:
    """Parameters that fully determine a complexity profile."""

    k: int = DEFAULT_K
    m: Union[int, str] = "auto"
    tau: Union[float, str] = "auto"
    epsilon_max: Union[float, str] = "auto"
    max_points: int = topology.DEFAULT_MAX_POINTS
    seed: int = topology.DEFAULT_SEED
    curvature_measure: str = "abs"  # "abs" or "signed", used for correlation

    def validate(self):
        if self.k < 2:
            raise ParameterError(f"k must be >= 2, got {self.k}")
        if self.m != "auto" and int(self.m) < 1:
            raise ParameterError(f"m must be >= 1 or 'auto', got {self.m}")
        if self.tau != "auto" and float(self.tau) < 0:
            raise ParameterError(f"tau must be >= 0, got {self.tau}")
        if self.epsilon_max != "auto" and float(self.epsilon_max) < 0:
            raise ParameterError(f"epsilon_max must be >= 0, got {self.epsilon_max}")
        if self.max_points < 1:
            raise ParameterError(f"max_points must be >= 1, got {self.max_points}")
        if self.curvature_measure not in ("abs", "signed"):
            raise ParameterError(
                f"curvature_measure must be 'abs' or 'signed', got {self.curvature_measure}"
            )


@dataclass(frozen=True)
class ComplexityProfile:
    """Geometric complexity summary of one class's point cloud."""

    label: str
    n_points: int
    ambient_dim: int
    global_id: Optional[float]
    mean_curvature: Optional[float]
    mean_abs_curvature: Optional[float]
    holes: Optional[topology.HoleMetrics]
    essential_h1: int
    parameters: dict
    warnings: tuple = ()


@dataclass(frozen=True)
class BiasReport:
    """Per-class accuracies and profiles plus accuracy/complexity PCCs."""

    classes: tuple  # of (label, accuracy, ComplexityProfile)
    correlations: dict  # measure name -> Pearson r or None
    warnings: tuple
    config: dict


def worker_count() -> int:
    """Thread cap from PMG_THREADS (0 or unset = auto)."""
    raw = os.environ.get("PMG_THREADS", "0")
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value <= 0:
        return os.cpu_count() or 1
    return value


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ParameterError("pearson needs two equal-length 1-D sequences")
    if xa.size < 3:
        raise ParameterError(f"pearson needs at least 3 samples, got {xa.size}")
    xc = xa - xa.mean()
    yc = ya - ya.mean()
    sx = float(xc @ xc)
    sy = float(yc @ yc)
    if sx == 0.0:
        raise UndefinedCorrelationError("first sequence has zero variance")
    if sy == 0.0:
        raise UndefinedCorrelationError("second sequence has zero variance")
    return float((xc @ yc) / math.sqrt(sx * sy))


def _random_orthonormal(rng, ambient: int, rows: int) -> np.ndarray:
    mat = rng.normal(size=(ambient, ambient))
    q, r = np.linalg.qr(mat)
    q = q * np.sign(np.diag(r))  # make the map deterministic in the seed
    return q[:, :rows]


def sample_manifold(
    kind: str,
    n: int,
    params: Optional[dict] = None,
    seed: int = 0,
) -> PointCloud:
    """Seeded samples from reference manifolds for validation and demos.

    kinds: circle (radius), sphere (radius), torus (major/minor), hypercube
    (dim), gaussian_blob (dim, sigma), line (length). Common params:
    ambient (embed into higher dimension via a random orthonormal map) and
    noise (isotropic Gaussian sigma added after construction).
    """
    params = dict(params or {})
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    noise = float(params.pop("noise", 0.0))
    if noise < 0:
        raise ParameterError(f"noise must be >= 0, got {noise}")
    ambient = params.pop("ambient", None)

    if kind == "circle":
        radius = float(params.pop("radius", 1.0))
        theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
        pts = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    elif kind == "sphere":
        radius = float(params.pop("radius", 1.0))
        v = rng.normal(size=(n, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        pts = radius * v
    elif kind == "torus":
        major = float(params.pop("major", 2.0))
        minor = float(params.pop("minor", 0.5))
        u = rng.uniform(0.0, 2.0 * np.pi, size=n)
        v = rng.uniform(0.0, 2.0 * np.pi, size=n)
        pts = np.column_stack(
            [
                (major + minor * np.cos(u)) * np.cos(v),
                (major + minor * np.cos(u)) * np.sin(v),
                minor * np.sin(u),
            ]
        )
    elif kind == "hypercube":
        dim = int(params.pop("dim", 2))
        if dim < 1:
            raise ParameterError(f"hypercube dim must be >= 1, got {dim}")
        pts = rng.uniform(0.0, 1.0, size=(n, dim))
    elif kind == "gaussian_blob":
        dim = int(params.pop("dim", 2))
        sigma = float(params.pop("sigma", 1.0))
        if dim < 1:
            raise ParameterError(f"gaussian_blob dim must be >= 1, got {dim}")
        pts = rng.normal(0.0, sigma, size=(n, dim))
    elif kind == "line":
        length = float(params.pop("length", 1.0))
        pts = rng.uniform(0.0, length, size=(n, 1))
    else:
        raise ParameterError(f"unknown manifold kind {kind!r}")

    if params:
        raise ParameterError(f"unknown parameters for kind {kind!r}: {sorted(params)}")

    if ambient is not None:
        ambient = int(ambient)
        if ambient < pts.shape[1]:
            raise ParameterError(
                f"ambient dimension {ambient} is below intrinsic construction "
                f"dimension {pts.shape[1]}"
            )
        if ambient > pts.shape[1]:
            basis = _random_orthonormal(rng, ambient, pts.shape[1])
            pts = pts @ basis.T
    if noise > 0:
        pts = pts + rng.normal(0.0, noise, size=pts.shape)
    return PointCloud(pts, label=kind)


def profile_class(cloud: PointCloud, config: ProfileConfig) -> ComplexityProfile:
    """All three complexity measures for one class.

    Sub-computation failures are recorded as warnings and leave that
    measure None; a profile with at least one defined measure is returned.
    """
    config.validate()
    warnings: list[str] = []
    k = config.k
    if k > cloud.n - 1:
        k = cloud.n - 1
        warnings.append(f"k clamped to n-1 = {k}")
    if k < 2:
        raise ValidationError(f"class {cloud.label!r}: too few points (n={cloud.n})")
    graph = knn(cloud, k)

    gid: Optional[float] = None
    try:
        gid = global_id(local_id_tle(cloud, graph))
    except PmgError as exc:
        warnings.append(f"intrinsic dimension failed: {exc}")

    mean_curv: Optional[float] = None
    mean_abs: Optional[float] = None
    m_used: Union[int, str] = config.m
    try:
        m_used = resolve_tangent_dim(cloud, graph, config.m)
        curv_k = max(k, default_neighbor_count(m_used))
        curv_graph = graph
        if curv_k > k and curv_k <= cloud.n - 1:
            curv_graph = knn(cloud, curv_k)
        estimates, curv_warning = curvature_profile(cloud, curv_graph, m_used)
        mean_curv = estimates.mean_curvature
        mean_abs = estimates.mean_abs_curvature
        if curv_warning:
            warnings.append(curv_warning)
    except PmgError as exc:
        warnings.append(f"curvature failed: {exc}")

    holes: Optional[topology.HoleMetrics] = None
    essential = 0
    eps: Union[float, str] = config.epsilon_max
    try:
        sub = topology.subsample_cloud(cloud, config.max_points, config.seed)
        if sub.n < cloud.n:
            warnings.append(f"subsampled {cloud.n} -> {sub.n} points for persistence")
        diam = diameter(sub)
        eps = diam if config.epsilon_max == "auto" else float(config.epsilon_max)
        filtration = topology.build_filtration(sub, eps)
        _, h1 = topology.persistence(filtration)
        essential = h1.essential_count
        holes = topology.hole_metrics(h1, config.tau, diam, eps)
    except PmgError as exc:
        warnings.append(f"hole metrics failed: {exc}")

    if gid is None and mean_curv is None and holes is None:
        raise ValidationError(
            f"class {cloud.label!r}: every complexity measure failed: {warnings}"
        )
    return ComplexityProfile(
        label=cloud.label or "",
        n_points=cloud.n,
        ambient_dim=cloud.p,
        global_id=gid,
        mean_curvature=mean_curv,
        mean_abs_curvature=mean_abs,
        holes=holes,
        essential_h1=essential,
        parameters={
            "k": k,
            "m": m_used,
            "tau": holes.tau if holes is not None else config.tau,
            "epsilon_max": eps if holes is not None else config.epsilon_max,
            "max_points": config.max_points,
            "seed": config.seed,
        },
        warnings=tuple(warnings),
    )


def read_accuracy_table(path) -> tuple[dict, list[str]]:
    """CSV of "label,accuracy" rows; accuracies > 1 are read as percentages."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"accuracy table not found: {path}")
    table: dict[str, float] = {}
    warnings: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 2:
                raise ValidationError(
                    f"{path}: line {lineno}: expected 'label,accuracy'"
                )
            label, raw = parts
            try:
                value = float(raw)
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise ValidationError(f"{path}: line {lineno}: bad accuracy {raw!r}")
            if value > 1.0:
                warnings.append(
                    f"accuracy for {label!r} is {value}; treating as a percentage"
                )
                value /= 100.0
            if not 0.0 <= value <= 1.0:
                raise ValidationError(
                    f"{path}: line {lineno}: accuracy {value} outside [0, 1]"
                )
            if label in table:
                raise ValidationError(f"{path}: duplicate label {label!r}")
            table[label] = value
    if not table:
        raise ValidationError(f"{path}: no accuracy rows")
    return table, warnings


def discover_class_files(embeddings_dir) -> dict:
    """One cloud file per class; the filename stem is the class label."""
    root = Path(embeddings_dir)
    if not root.is_dir():
        raise ValidationError(f"embeddings directory not found: {root}")
    files = {}
    for entry in sorted(root.iterdir()):
        if entry.is_file() and entry.suffix.lower() in CLOUD_SUFFIXES:
            if entry.stem in files:
                raise ValidationError(f"duplicate class files for label {entry.stem!r}")
            files[entry.stem] = entry
    if not files:
        raise ValidationError(f"no class files (*.csv, *.pmg, *.bin) in {root}")
    return files


MEASURES = ("global_id", "mean_abs_curvature", "n_holes")


def _measure_value(profile: ComplexityProfile, measure: str, curvature_measure: str):
    if measure == "global_id":
        return profile.global_id
    if measure == "mean_abs_curvature":
        if curvature_measure == "signed":
            return profile.mean_curvature
        return profile.mean_abs_curvature
    if measure == "n_holes":
        return None if profile.holes is None else float(profile.holes.n_holes)
    raise ParameterError(f"unknown measure {measure!r}")


def build_bias_report(
    embeddings_dir,
    accuracy_table,
    config: Optional[ProfileConfig] = None,
) -> BiasReport:
    """Join per-class profiles with accuracies and correlate.

    Classes present in only one source are skipped with a warning. Needs
    at least 3 matched classes, otherwise every correlation is undefined.
    """
    config = config or ProfileConfig()
    config.validate()
    accuracies, warnings = read_accuracy_table(accuracy_table)
    files = discover_class_files(embeddings_dir)

    matched = sorted(set(accuracies) & set(files))
    for label in sorted(set(files) - set(accuracies)):
        warnings.append(f"class {label!r} has embeddings but no accuracy; skipped")
    for label in sorted(set(accuracies) - set(files)):
        warnings.append(f"class {label!r} has accuracy but no embeddings; skipped")
    if len(matched) < 3:
        raise ParameterError(
            f"need >= 3 matched classes for correlations, got {len(matched)}"
        )

    def load_and_profile(label: str):
        cloud = load_point_cloud(files[label], label=label)
        return profile_class(cloud, config)

    profiles: dict[str, ComplexityProfile] = {}
    with ThreadPoolExecutor(max_workers=min(worker_count(), len(matched))) as pool:
        futures = {label: pool.submit(load_and_profile, label) for label in matched}
        for label in matched:
            try:
                profiles[label] = futures[label].result()
            except PmgError as exc:
                warnings.append(f"class {label!r} failed: {exc}; omitted")

    usable = [label for label in matched if label in profiles]
    if len(usable) < 3:
        raise ParameterError(
            f"need >= 3 profiled classes for correlations, got {len(usable)}"
        )

    correlations: dict[str, Optional[float]] = {}
    for measure in MEASURES:
        xs, ys = [], []
        for label in usable:
            value = _measure_value(profiles[label], measure, config.curvature_measure)
            if value is not None:
                xs.append(accuracies[label])
                ys.append(value)
        try:
            if len(xs) < 3:
                raise UndefinedCorrelationError(
                    f"measure {measure!r} defined for only {len(xs)} classes"
                )
            correlations[measure] = pearson(xs, ys)
        except UndefinedCorrelationError as exc:
            correlations[measure] = None
            warnings.append(f"correlation for {measure!r} undefined: {exc}")

    classes = tuple(
        (label, accuracies[label], profiles[label]) for label in usable
    )
    cfg_record = {
        "k": config.k,
        "m": config.m,
        "tau": config.tau,
        "epsilon_max": config.epsilon_max,
        "max_points": config.max_points,
        "seed": config.seed,
        "curvature_measure": config.curvature_measure,
    }
    return BiasReport(
        classes=classes,
        correlations=correlations,
        warnings=tuple(warnings),
        config=cfg_record,
    )


def _holes_dict(profile: ComplexityProfile) -> Optional[dict]:
    if profile.holes is None:
        return None
    h = profile.holes
    return {
        "n_holes": h.n_holes,
        "tau": h.tau,
        "total_persistence": h.total_persistence,
        "avg_persistence": h.avg_persistence,
        "persistence_density": h.persistence_density,
        "essential_h1": profile.essential_h1,
    }


def report_to_dict(report: BiasReport) -> dict:
    """JSON-ready dict with a stable key order (reports are reproducible)."""
    return {
        "config": report.config,
        "classes": [
            {
                "label": label,
                "accuracy": accuracy,
                "n_points": profile.n_points,
                "ambient_dim": profile.ambient_dim,
                "global_id": profile.global_id,
                "mean_curvature": profile.mean_curvature,
                "mean_abs_curvature": profile.mean_abs_curvature,
                "holes": _holes_dict(profile),
                "parameters": {
                    key: profile.parameters[key]
                    for key in ("k", "m", "tau", "epsilon_max", "max_points", "seed")
                },
                "warnings": list(profile.warnings),
            }
            for label, accuracy, profile in report.classes
        ],
        "correlations": dict(report.correlations),
        "warnings": list(report.warnings),
    }


def report_to_json(report: BiasReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, allow_nan=True)


def report_to_csv(report: BiasReport) -> str:
    """One row per class for spreadsheet use."""
    header = (
        "label,accuracy,n_points,global_id,mean_curvature,mean_abs_curvature,"
        "n_holes,tau,total_persistence,avg_persistence,persistence_density"
    )
    rows = [header]
    for label, accuracy, profile in report.classes:
        h = profile.holes
        cells = [
            label,
            repr(accuracy),
            str(profile.n_points),
            "" if profile.global_id is None else repr(profile.global_id),
            "" if profile.mean_curvature is None else repr(profile.mean_curvature),
            "" if profile.mean_abs_curvature is None else repr(profile.mean_abs_curvature),
            "" if h is None else str(h.n_holes),
            "" if h is None else repr(h.tau),
            "" if h is None else repr(h.total_persistence),
            "" if h is None else repr(h.avg_persistence),
            "" if h is None else repr(h.persistence_density),
        ]
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"

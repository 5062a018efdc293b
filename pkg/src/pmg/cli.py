"""Command-line interface: id, curvature, holes, report, sample.

Every command writes a JSON document (to stdout or --output), prints
errors to stderr as single-line JSON, and uses the exit-code contract
0 = success, 1 = input/validation error, 2 = parameter error,
3 = internal error. An optional --config file holds flat key=value lines
mirroring the flags; explicit flags win over the file.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import topology
from .analysis import (
    ProfileConfig,
    build_bias_report,
    report_to_csv,
    report_to_json,
    sample_manifold,
)
from .curvature import curvature_profile, default_neighbor_count, resolve_tangent_dim
from .errors import ParameterError, PmgError, ValidationError
from .intrinsic_dim import DEFAULT_K, global_id, local_id_mle, local_id_tle
from .pointcloud import diameter, knn, load_point_cloud, save_point_cloud


def _fail(exc: Exception) -> int:
    code = exc.exit_code if isinstance(exc, PmgError) else 3
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(payload), file=sys.stderr)
    return code


def _emit(document: dict, output: str | None) -> None:
    text = json.dumps(document, indent=2)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _load_config_file(path: str | None) -> dict:
    """Flat key=value lines; '#' starts a comment."""
    if not path:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"config file not found: {p}")
    values: dict[str, str] = {}
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{p}: line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _merge(ctx: click.Context, config_path: str | None, **flags):
    """Apply config-file values where the flag was left at its default."""
    file_values = _load_config_file(config_path)
    merged = dict(flags)
    for name, value in file_values.items():
        if name not in merged:
            raise ParameterError(f"unknown config key {name!r}")
        source = ctx.get_parameter_source(name)
        if source == click.core.ParameterSource.COMMANDLINE:
            continue  # explicit flag wins
        merged[name] = value
    return merged


def _int_or_auto(value, name: str):
    if value in ("auto", None):
        return "auto"
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be an integer or 'auto', got {value!r}")


def _float_or_auto(value, name: str):
    if value in ("auto", None):
        return "auto"
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be a number or 'auto', got {value!r}")


def _positive_int(value, name: str) -> int:
    try:
        ivalue = int(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    if ivalue < 1:
        raise ParameterError(f"{name} must be >= 1, got {ivalue}")
    return ivalue


class JsonDiagnosticsGroup(click.Group):
    """Route click's own usage errors through the JSON diagnostic contract."""

    def main(self, *args, **kwargs):
        kwargs.setdefault("standalone_mode", False)
        try:
            # non-standalone mode: ctx.exit(code) comes back as a return value
            result = super().main(*args, **kwargs)
        except click.UsageError as exc:
            payload = {
                "error": type(exc).__name__,
                "message": exc.format_message(),
                "exit_code": 2,
            }
            print(json.dumps(payload), file=sys.stderr)
            sys.exit(2)
        except click.Abort:
            sys.exit(130)
        sys.exit(result if isinstance(result, int) else 0)


@click.group(cls=JsonDiagnosticsGroup)
@click.version_option(package_name="pmg")
def main():
    """Geometric complexity of embedded point clouds."""


@main.command("id")
@click.option("--input", "input_path", required=True, help="Point-cloud file (CSV or PMG1 binary).")
@click.option("--format", "fmt", default="auto", show_default=True, type=click.Choice(["auto", "csv", "binary"]))
@click.option("--k", default=str(DEFAULT_K), show_default=True, help="Neighbor count (clamped to n-1).")
@click.option("--method", default="tle", show_default=True, type=click.Choice(["tle", "mle"]))
@click.option("--local", is_flag=True, help="Include per-point estimates in the output.")
@click.option("--output", default=None, help="Write JSON here instead of stdout.")
@click.option("--config", "config_path", default=None, help="key=value config file.")
@click.pass_context
def cmd_id(ctx, input_path, fmt, k, method, local, output, config_path):
    """Global intrinsic dimension of a cloud."""
    try:
        merged = _merge(ctx, config_path, k=k, method=method)
        k_val = _positive_int(merged["k"], "k")
        if k_val < 2:
            raise ParameterError(f"k must be >= 2, got {k_val}")
        cloud = load_point_cloud(input_path, format=fmt)
        warnings = []
        if k_val > cloud.n - 1:
            k_val_clamped = cloud.n - 1
            warnings.append(f"k clamped from {k_val} to n-1 = {k_val_clamped}")
            k_val = k_val_clamped
            if k_val < 2:
                raise ValidationError(f"too few points for estimation (n={cloud.n})")
        graph = knn(cloud, k_val)
        estimator = local_id_tle if merged["method"] == "tle" else local_id_mle
        estimates = estimator(cloud, graph)
        document = {
            "method": estimates.method,
            "k": k_val,
            "n": cloud.n,
            "p": cloud.p,
            "global_id": global_id(estimates),
            "skipped": estimates.skipped,
            "warnings": warnings,
        }
        if local:
            document["local"] = estimates.values.tolist()
        _emit(document, output)
    except Exception as exc:  # noqa: BLE001 - single exit point maps codes
        ctx.exit(_fail(exc))


@main.command("curvature")
@click.option("--input", "input_path", required=True)
@click.option("--format", "fmt", default="auto", show_default=True, type=click.Choice(["auto", "csv", "binary"]))
@click.option("--k", default=None, help="Neighbor count [default: max(20, m^2+5)].")
@click.option("--m", default="auto", show_default=True, help="Tangent dimension or 'auto'.")
@click.option("--local", is_flag=True, help="Include per-point curvatures in the output.")
@click.option("--output", default=None)
@click.option("--config", "config_path", default=None)
@click.pass_context
def cmd_curvature(ctx, input_path, fmt, k, m, local, output, config_path):
    """Mean curvature proxy of a cloud."""
    try:
        merged = _merge(ctx, config_path, k=k, m=m)
        m_opt = _int_or_auto(merged["m"], "m")
        if m_opt != "auto" and m_opt < 1:
            raise ParameterError(f"m must be >= 1, got {m_opt}")
        cloud = load_point_cloud(input_path, format=fmt)
        warnings = []
        # resolve m first (auto needs a provisional graph), then pick k
        if m_opt == "auto":
            k_probe = min(DEFAULT_K, cloud.n - 1)
            if k_probe < 2:
                raise ValidationError(f"too few points for estimation (n={cloud.n})")
            m_val = resolve_tangent_dim(cloud, knn(cloud, k_probe), "auto")
        else:
            m_val = m_opt
        k_val = (
            default_neighbor_count(m_val)
            if merged["k"] is None
            else _positive_int(merged["k"], "k")
        )
        if k_val > cloud.n - 1:
            warnings.append(f"k clamped from {k_val} to n-1 = {cloud.n - 1}")
            k_val = cloud.n - 1
        if k_val < m_val + 1:
            raise ParameterError(
                f"k={k_val} too small for tangent dimension m={m_val} (need k >= m+1)"
            )
        graph = knn(cloud, k_val)
        estimates, warning = curvature_profile(cloud, graph, m_val)
        if warning:
            warnings.append(warning)
        document = {
            "m": estimates.m,
            "k": estimates.k,
            "n": cloud.n,
            "p": cloud.p,
            "mean_curvature": estimates.mean_curvature,
            "mean_abs_curvature": estimates.mean_abs_curvature,
            "skipped": estimates.skipped,
            "warnings": warnings,
        }
        if local:
            document["local"] = estimates.values.tolist()
        _emit(document, output)
    except Exception as exc:
        ctx.exit(_fail(exc))


@main.command("holes")
@click.option("--input", "input_path", required=True)
@click.option("--format", "fmt", default="auto", show_default=True, type=click.Choice(["auto", "csv", "binary"]))
@click.option("--tau", default="auto", show_default=True, help="Significance threshold or 'auto' (0.1 * diameter).")
@click.option("--epsilon-max", default="auto", show_default=True, help="Filtration cap or 'auto' (diameter).")
@click.option("--max-points", default=str(topology.DEFAULT_MAX_POINTS), show_default=True)
@click.option("--seed", default=str(topology.DEFAULT_SEED), show_default=True)
@click.option("--pairs", is_flag=True, help="Include finite H1 pairs in the output.")
@click.option("--density-span", default="significant", show_default=True,
              type=click.Choice(["significant", "filtration"]),
              help="Denominator for persistence density.")
@click.option("--diagram", default=None, help="Also write the diagrams as CSV 'dim,birth,death'.")
@click.option("--output", default=None)
@click.option("--config", "config_path", default=None)
@click.pass_context
def cmd_holes(ctx, input_path, fmt, tau, epsilon_max, max_points, seed, pairs,
              density_span, diagram, output, config_path):
    """Significant-hole metrics from H1 persistence."""
    try:
        merged = _merge(
            ctx, config_path,
            tau=tau, epsilon_max=epsilon_max, max_points=max_points, seed=seed,
        )
        tau_opt = _float_or_auto(merged["tau"], "tau")
        if tau_opt != "auto" and tau_opt < 0:
            raise ParameterError(f"tau must be >= 0, got {tau_opt}")
        eps_opt = _float_or_auto(merged["epsilon_max"], "epsilon_max")
        max_points_val = _positive_int(merged["max_points"], "max_points")
        seed_val = int(merged["seed"])
        cloud = load_point_cloud(input_path, format=fmt)
        warnings = []
        sub = topology.subsample_cloud(cloud, max_points_val, seed_val)
        if sub.n < cloud.n:
            warnings.append(f"subsampled {cloud.n} -> {sub.n} points")
        diam = diameter(sub)
        eps_val = diam if eps_opt == "auto" else eps_opt
        filtration = topology.build_filtration(sub, eps_val)
        dgm0, dgm1 = topology.persistence(filtration)
        metrics = topology.hole_metrics(dgm1, tau_opt, diam, eps_val)
        density = (
            metrics.persistence_density
            if density_span == "significant"
            else metrics.persistence_density_filtration
        )
        document = {
            "tau": metrics.tau,
            "epsilon_max": eps_val,
            "max_points": max_points_val,
            "seed": seed_val,
            "n": cloud.n,
            "n_used": sub.n,
            "n_holes": metrics.n_holes,
            "total_persistence": metrics.total_persistence,
            "avg_persistence": metrics.avg_persistence,
            "persistence_density": density,
            "density_span": density_span,
            "essential_h1": dgm1.essential_count,
            "warnings": warnings,
        }
        if pairs:
            document["pairs"] = dgm1.finite_pairs.tolist()
        if diagram:
            lines = ["dim,birth,death"]
            for dgm in (dgm0, dgm1):
                for b, d in dgm.pairs:
                    death = "inf" if not np.isfinite(d) else repr(float(d))
                    lines.append(f"{dgm.dimension},{float(b)!r},{death}")
            Path(diagram).write_text("\n".join(lines) + "\n", encoding="utf-8")
        _emit(document, output)
    except Exception as exc:
        ctx.exit(_fail(exc))


@main.command("report")
@click.option("--embeddings", "embeddings_dir", required=True, help="Directory of per-class cloud files.")
@click.option("--accuracy", "accuracy_path", required=True, help="CSV of 'label,accuracy' rows.")
@click.option("--k", default=str(DEFAULT_K), show_default=True)
@click.option("--m", default="auto", show_default=True)
@click.option("--tau", default="auto", show_default=True)
@click.option("--epsilon-max", default="auto", show_default=True)
@click.option("--max-points", default=str(topology.DEFAULT_MAX_POINTS), show_default=True)
@click.option("--seed", default=str(topology.DEFAULT_SEED), show_default=True)
@click.option("--curvature-measure", default="abs", show_default=True,
              type=click.Choice(["abs", "signed"]),
              help="Curvature statistic used in the correlation.")
@click.option("--output", default=None, help="Write the JSON report here.")
@click.option("--csv", "csv_path", default=None, help="Also write a per-class CSV summary.")
@click.option("--config", "config_path", default=None)
@click.pass_context
def cmd_report(ctx, embeddings_dir, accuracy_path, k, m, tau, epsilon_max,
               max_points, seed, curvature_measure, output, csv_path, config_path):
    """End-to-end bias report over a directory of class embeddings."""
    try:
        merged = _merge(
            ctx, config_path,
            k=k, m=m, tau=tau, epsilon_max=epsilon_max,
            max_points=max_points, seed=seed, curvature_measure=curvature_measure,
        )
        config = ProfileConfig(
            k=_positive_int(merged["k"], "k"),
            m=_int_or_auto(merged["m"], "m"),
            tau=_float_or_auto(merged["tau"], "tau"),
            epsilon_max=_float_or_auto(merged["epsilon_max"], "epsilon_max"),
            max_points=_positive_int(merged["max_points"], "max_points"),
            seed=int(merged["seed"]),
            curvature_measure=str(merged["curvature_measure"]),
        )
        report = build_bias_report(embeddings_dir, accuracy_path, config)
        text = report_to_json(report)
        if output:
            Path(output).write_text(text + "\n", encoding="utf-8")
        else:
            print(text)
        if csv_path:
            Path(csv_path).write_text(report_to_csv(report), encoding="utf-8")
    except Exception as exc:
        ctx.exit(_fail(exc))


@main.command("sample")
@click.option("--kind", required=True,
              type=click.Choice(["circle", "sphere", "torus", "hypercube", "gaussian_blob", "line"]))
@click.option("--n", default="300", show_default=True)
@click.option("--radius", default=None, help="circle/sphere radius.")
@click.option("--dim", default=None, help="hypercube/gaussian_blob dimension.")
@click.option("--sigma", default=None, help="gaussian_blob scale.")
@click.option("--major", default=None, help="torus major radius.")
@click.option("--minor", default=None, help="torus minor radius.")
@click.option("--length", default=None, help="line length.")
@click.option("--ambient", default=None, help="Embed into this ambient dimension.")
@click.option("--noise", default=None, help="Isotropic Gaussian noise sigma.")
@click.option("--seed", default=str(topology.DEFAULT_SEED), show_default=True)
@click.option("--output", required=True, help="Destination file.")
@click.option("--format", "fmt", default="csv", show_default=True, type=click.Choice(["csv", "binary"]))
@click.pass_context
def cmd_sample(ctx, kind, n, radius, dim, sigma, major, minor, length,
               ambient, noise, seed, output, fmt):
    """Generate a reference-manifold sample for testing and demos."""
    try:
        params = {}
        if radius is not None:
            params["radius"] = float(radius)
        if dim is not None:
            params["dim"] = int(dim)
        if sigma is not None:
            params["sigma"] = float(sigma)
        if major is not None:
            params["major"] = float(major)
        if minor is not None:
            params["minor"] = float(minor)
        if length is not None:
            params["length"] = float(length)
        if ambient is not None:
            params["ambient"] = int(ambient)
        if noise is not None:
            params["noise"] = float(noise)
        cloud = sample_manifold(kind, _positive_int(n, "n"), params, seed=int(seed))
        save_point_cloud(cloud, output, format=fmt)
        _emit({"kind": kind, "n": cloud.n, "p": cloud.p, "output": output}, None)
    except Exception as exc:
        ctx.exit(_fail(exc))


if __name__ == "__main__":
    main()

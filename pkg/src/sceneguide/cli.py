"""Command-line entry point for data generation, training, sampling,
evaluation, and settling.

Exit codes: 0 ok, 2 config error, 3 IO error, 4 training divergence,
5 sampler failure.  Every command is deterministic under a fixed config
seed; artifacts are byte-reproducible.
"""

from __future__ import annotations

import dataclasses
import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from .config import RunConfig, default_config_yaml, load_config
from .denoiser import (
    analytic_score_denoiser,
    load_checkpoint,
    make_scene_denoiser,
    save_checkpoint,
    train as train_model,
)
from .diffusion import SamplerConfig, make_schedule, sample_scene
from .errors import (
    CheckpointError,
    ConfigError,
    DivergedTraining,
    NonFiniteState,
    PlacementFailure,
)
from .metrics import evaluate
from .scene import Scene, flatten_scene, scene_from_json, scene_to_json
from .settle import settle
from .synthdata import gen_dataset

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DIVERGED = 4
EXIT_SAMPLER = 5

_ANALYTIC_VARIANCE = 0.04


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_run_config(path: str) -> RunConfig:
    try:
        return load_config(path)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))


def _load_scenes(path: str | Path) -> list[tuple[str, Scene]]:
    """Scenes from a manifest, a directory of scene JSONs, or one file.

    Returns (name, scene) pairs in sorted name order for determinism.
    """
    p = Path(path)
    if p.is_dir():
        files = sorted(
            f for f in p.glob("*.json")
            if f.name != "manifest.json" and not f.name.startswith("trace_")
        )
    elif p.name == "manifest.json":
        manifest = json.loads(p.read_text())
        files = [p.parent / name for name in manifest["train"] + manifest["test"]]
    else:
        files = [p]
    if not files:
        raise OSError(f"no scene files under {path}")
    return [(f.name, scene_from_json(f.read_text())) for f in files]


@click.group()
def main():
    """Physics-guided diffusion for 3D indoor scene layouts."""


@main.command("init-config")
@click.option("--out", "-o", type=click.Path(), default="config.yaml", show_default=True)
def init_config(out):
    """Write a config file with every key at its default value."""
    try:
        Path(out).write_text(default_config_yaml())
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    click.echo(out)


@main.command("gen-data")
@click.option("--config", "-c", "config_path", required=True, type=click.Path())
@click.option("--count", type=int, default=None, help="Number of scenes (default 100).")
@click.option("--split", type=float, default=0.8, show_default=True)
@click.option("--out", "-o", required=True, type=click.Path())
def gen_data(config_path, count, split, out):
    """Generate a synthetic scene corpus plus a train/test manifest."""
    cfg = _load_run_config(config_path)
    n = 100 if count is None else count
    try:
        manifest = gen_dataset(cfg.data, n, split, out)
    except (ValueError, PlacementFailure) as exc:
        _fail(EXIT_CONFIG, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    click.echo(str(manifest))


@main.command("train")
@click.option("--config", "-c", "config_path", required=True, type=click.Path())
@click.option("--data", "-d", "data_path", required=True, type=click.Path(exists=True))
@click.option("--out", "-o", required=True, type=click.Path())
@click.option("--resume", type=click.Path(exists=True), default=None,
              help="Checkpoint to continue from; architecture must match.")
def train_cmd(config_path, data_path, out, resume):
    """Train the denoiser and write a checkpoint plus a loss CSV."""
    cfg = _load_run_config(config_path)
    tcfg = dataclasses.replace(cfg.train, T=cfg.schedule.T)
    model = None
    if resume is not None:
        try:
            model, old_cfg = load_checkpoint(resume)
        except CheckpointError as exc:
            _fail(EXIT_CONFIG, str(exc))
        arch = ("d", "layers", "heads", "n_geo", "n_shape_tokens", "d_edge",
                "pos_enc_dim", "time_enc_dim", "desc_dim", "T")
        for name in arch:
            if getattr(old_cfg, name) != getattr(tcfg, name):
                _fail(EXIT_CONFIG, f"checkpoint {name}={getattr(old_cfg, name)} "
                                   f"differs from config {name}={getattr(tcfg, name)}")
        model.cfg = tcfg
    try:
        if Path(data_path).name == "manifest.json":
            from .synthdata import load_dataset

            scenes, _ = load_dataset(data_path)
        else:
            scenes = [s for _, s in _load_scenes(data_path)]
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    schedule = make_schedule(cfg.schedule.T, cfg.schedule.kind, cfg.schedule.s)
    try:
        model, losses = train_model(scenes, tcfg, schedule=schedule, model=model)
    except DivergedTraining as exc:
        _fail(EXIT_DIVERGED, str(exc))
    out_dir = Path(out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        save_checkpoint(model, tcfg, out_dir / "checkpoint.json")
        lines = ["step,loss"] + [f"{i},{v!r}" for i, v in enumerate(losses)]
        (out_dir / "loss.csv").write_text("\n".join(lines) + "\n")
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    click.echo(f"final loss {losses[-1]:.6f}")


@main.command("sample")
@click.option("--config", "-c", "config_path", required=True, type=click.Path())
@click.option("--ckpt", type=click.Path(exists=True), default=None)
@click.option("--analytic", is_flag=True, help="Use the closed-form Gaussian denoiser.")
@click.option("--templates", "-t", required=True, type=click.Path(exists=True))
@click.option("--out", "-o", required=True, type=click.Path())
@click.option("--no-guidance", is_flag=True)
@click.option("--count", type=int, default=None, help="Limit the number of templates.")
def sample_cmd(config_path, ckpt, analytic, templates, out, no_guidance, count):
    """Sample scene layouts from templates; writes scenes and energy traces."""
    cfg = _load_run_config(config_path)
    if analytic == (ckpt is not None):
        _fail(EXIT_CONFIG, "pass exactly one of --ckpt or --analytic")
    schedule = make_schedule(cfg.schedule.T, cfg.schedule.kind, cfg.schedule.s)
    model = None
    if ckpt is not None:
        try:
            model, mcfg = load_checkpoint(ckpt)
        except CheckpointError as exc:
            _fail(EXIT_CONFIG, str(exc))
        if mcfg.T != schedule.T:
            _fail(EXIT_CONFIG, f"checkpoint T={mcfg.T} differs from schedule T={schedule.T}")
    try:
        pairs = _load_scenes(templates)
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    if count is not None:
        pairs = pairs[:count]
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for k, (_, template) in enumerate(pairs):
        scfg = SamplerConfig(
            schedule=schedule,
            guidance=cfg.guidance,
            seed=cfg.sampler.seed + k,
            room_half_extent=cfg.sampler.room_half_extent,
            use_guidance=cfg.sampler.use_guidance and not no_guidance,
            clip_x0=cfg.sampler.clip_x0,
        )
        if model is not None:
            denoiser = make_scene_denoiser(model, template, schedule)
        else:
            mu = flatten_scene(template)
            mu[:, :3] /= scfg.room_half_extent
            denoiser = analytic_score_denoiser(mu, _ANALYTIC_VARIANCE, schedule)
        try:
            scene, trace = sample_scene(template, denoiser, scfg)
        except NonFiniteState as exc:
            _fail(EXIT_SAMPLER, str(exc))
        try:
            (out_dir / f"sample_{k:04d}.json").write_text(scene_to_json(scene))
            trace_doc = [dataclasses.asdict(r) for r in trace]
            (out_dir / f"trace_{k:04d}.json").write_text(
                json.dumps(trace_doc, sort_keys=True)
            )
        except OSError as exc:
            _fail(EXIT_IO, str(exc))
    click.echo(f"wrote {len(pairs)} scenes to {out_dir}")


@main.command("eval")
@click.option("--scenes", "-s", required=True, type=click.Path(exists=True))
@click.option("--truth", type=click.Path(exists=True), default=None,
              help="Scenes carrying ground-truth graphs; defaults to --scenes.")
@click.option("--out", "-o", required=True, type=click.Path())
@click.option("--runs", type=int, default=10, show_default=True)
def eval_cmd(scenes, truth, out, runs):
    """Compute the metric suite and write a JSON report."""
    try:
        gen_pairs = _load_scenes(scenes)
        truth_pairs = _load_scenes(truth) if truth else gen_pairs
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    if len(gen_pairs) != len(truth_pairs):
        _fail(EXIT_CONFIG,
              f"{len(gen_pairs)} scenes but {len(truth_pairs)} truth scenes")
    gen = [s for _, s in gen_pairs]
    graphs = [s.graphs for _, s in truth_pairs]
    start = time.perf_counter()
    report = evaluate(gen, graphs, runs=runs)
    elapsed = time.perf_counter() - start
    try:
        Path(out).write_text(report.to_json())
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    asd_text = "n/a" if report.asd is None else f"{report.asd:.4f}"
    click.echo("Col_mesh  GRecall  ASD     Stability")
    click.echo(
        f"{report.col_mesh:<9.4f} {report.grecall:<8.4f} {asd_text:<7} "
        f"{report.stability:.4f}"
    )
    click.echo(f"({elapsed / len(gen):.2f} s/scene)", err=True)


@main.command("simulate")
@click.option("--scenes", "-s", required=True, type=click.Path(exists=True))
@click.option("--runs", type=int, default=10, show_default=True)
@click.option("--out", "-o", required=True, type=click.Path())
def simulate_cmd(scenes, runs, out):
    """Settle scenes quasi-statically and report per-scene stability."""
    from .metrics import stability

    try:
        pairs = _load_scenes(scenes)
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    out_dir = Path(out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        scores = {}
        for name, scene in pairs:
            settled = settle(scene).scene
            (out_dir / f"settled_{name}").write_text(scene_to_json(settled))
            scores[name] = stability([scene], runs=runs)
        (out_dir / "stability.json").write_text(json.dumps(scores, sort_keys=True, indent=2))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    overall = float(np.mean(list(scores.values())))
    click.echo(f"stability {overall:.4f}")


@main.command("export-obj")
@click.option("--scenes", "-s", required=True, type=click.Path(exists=True))
@click.option("--out", "-o", required=True, type=click.Path())
def export_obj(scenes, out):
    """Write posed scene meshes as Wavefront OBJ files."""
    try:
        pairs = _load_scenes(scenes)
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    out_dir = Path(out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, scene in pairs:
            lines = []
            offset = 1
            for obj, mesh in zip(scene.objects, scene.posed_meshes()):
                lines.append(f"o {obj.category}_{obj.id}")
                for v in mesh.vertices:
                    lines.append(f"v {v[0]!r} {v[1]!r} {v[2]!r}")
                for f in mesh.faces:
                    lines.append(f"f {f[0] + offset} {f[1] + offset} {f[2] + offset}")
                offset += len(mesh.vertices)
            (out_dir / f"{Path(name).stem}.obj").write_text("\n".join(lines) + "\n")
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    click.echo(f"wrote {len(pairs)} OBJ files to {out_dir}")


if __name__ == "__main__":
    main()

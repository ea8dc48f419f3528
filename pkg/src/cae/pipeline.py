"""End-to-end orchestration: files in, clustered assignments and report out.

Wraps the :class:`~cae.estimator.CAE` estimator with file loading,
configuration validation, stage timing, metric computation, JSON
reporting, and the ablation sweep driver. Everything here is
deterministic given (input files, config); the only nondeterministic
report field is wall-clock timing.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .errors import CAEError, ConfigError, DataFormatError
from .estimator import CAE, MODES
from .metrics import NMI_VARIANTS, MetricReport, evaluate
from .store import (
    EmbeddingMatrix,
    load_embeddings,
    load_labels,
    save_embeddings,
    save_labels,
)
from .synthetic import SynthSpec, generate_synthetic

_TEXT_FREE_MODES = {"image_only"}
_BOOL_FIELDS = {"normalize_counterparts", "renormalize_fused", "log_domain"}
_INT_FIELDS = {
    "clusters",
    "topk",
    "centers_divisor",
    "seed",
    "restarts",
    "max_iter",
    "sinkhorn_max_iter",
    "threads",
}
_FLOAT_FIELDS = {"epsilon", "gamma", "softmax_temperature", "rel_tol", "marginal_tol"}


@dataclass(frozen=True)
class PipelineConfig:
    images: str
    nouns: str | None = None
    captions: str | None = None
    labels: str | None = None
    clusters: int | None = None
    topk: int = 10
    centers_divisor: int = 300
    epsilon: float = 0.05
    gamma: float = 0.01
    softmax_temperature: float = 1.0
    seed: int = 42
    mode: str = "cae"
    normalize_counterparts: bool = True
    renormalize_fused: bool = True
    restarts: int = 10
    max_iter: int = 300
    rel_tol: float = 1e-4
    sinkhorn_max_iter: int = 1000
    marginal_tol: float = 1e-6
    log_domain: bool = True
    nmi_average: str = "arithmetic"
    threads: int = 1
    out: str | None = None

    def validate(self) -> None:
        """Reject bad configurations before any file is touched."""
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode not in _TEXT_FREE_MODES:
            if self.mode != "caption_only" and self.nouns is None:
                raise ConfigError(f"mode {self.mode!r} requires --nouns")
            if self.mode != "noun_only" and self.captions is None:
                raise ConfigError(f"mode {self.mode!r} requires --captions")
        if self.labels is None and self.clusters is None:
            raise ConfigError("--clusters is mandatory when no label file is supplied")
        if self.clusters is not None and self.clusters < 1:
            raise ConfigError(f"clusters must be >= 1, got {self.clusters}")
        for name in ("topk", "centers_divisor", "restarts", "max_iter", "sinkhorn_max_iter"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("epsilon", "gamma", "softmax_temperature", "rel_tol", "marginal_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.nmi_average not in NMI_VARIANTS:
            raise ConfigError(f"nmi_average must be one of {NMI_VARIANTS}")
        for name in ("images", "nouns", "captions", "labels"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"{name} file not found: {path}")


@dataclass(frozen=True)
class ClusteringResult:
    assignments: np.ndarray
    metrics: MetricReport | None
    config: PipelineConfig
    timing: dict
    diagnostics: dict


def _load_inputs(cfg: PipelineConfig):
    images = load_embeddings(cfg.images)
    nouns = load_embeddings(cfg.nouns) if cfg.nouns is not None else None
    captions = load_embeddings(cfg.captions) if cfg.captions is not None else None
    labels = load_labels(cfg.labels) if cfg.labels is not None else None
    if labels is not None and labels.size != images.rows:
        raise DataFormatError(
            f"label count {labels.size} does not match image count {images.rows}"
        )
    for name, bank in (("nouns", nouns), ("captions", captions)):
        if bank is not None and bank.dim != images.dim:
            raise DataFormatError(
                f"{name} dim {bank.dim} does not match image dim {images.dim}"
            )
    return images, nouns, captions, labels


def run_pipeline(cfg: PipelineConfig) -> ClusteringResult:
    """Execute load -> semantic selection -> transport -> fusion -> k-means.

    Metrics appear in the result only when a label file is supplied.
    Stage failures carry a ``[stage]`` tag in their message.
    """
    cfg.validate()
    timing = {}
    started = time.perf_counter()
    try:
        images, nouns, captions, labels = _load_inputs(cfg)
    except CAEError as exc:
        raise type(exc)(f"[load] {exc}") from exc
    timing["load"] = time.perf_counter() - started

    if cfg.clusters is not None:
        k = cfg.clusters
    else:
        k = int(np.unique(labels).size)
    if k < 2 and labels is not None:
        raise ConfigError(f"metric-bearing runs need k >= 2, got k={k}")

    model = CAE(
        n_clusters=k,
        mode=cfg.mode,
        topk=cfg.topk,
        centers_divisor=cfg.centers_divisor,
        epsilon=cfg.epsilon,
        gamma=cfg.gamma,
        softmax_temperature=cfg.softmax_temperature,
        normalize_counterparts=cfg.normalize_counterparts,
        renormalize_fused=cfg.renormalize_fused,
        restarts=cfg.restarts,
        max_iter=cfg.max_iter,
        rel_tol=cfg.rel_tol,
        sinkhorn_max_iter=cfg.sinkhorn_max_iter,
        marginal_tol=cfg.marginal_tol,
        log_domain=cfg.log_domain,
        random_state=cfg.seed,
    )
    try:
        with threadpool_limits(limits=cfg.threads):
            model.fit(
                images.data,
                nouns=None if nouns is None else nouns.data,
                captions=None if captions is None else captions.data,
            )
    except CAEError as exc:
        raise type(exc)(f"[pipeline] {exc}") from exc
    timing.update(model.timings_)

    metrics = None
    if labels is not None:
        started = time.perf_counter()
        metrics = evaluate(labels, model.labels_, nmi_average=cfg.nmi_average)
        timing["metrics"] = time.perf_counter() - started
    timing["total"] = sum(timing.values())

    return ClusteringResult(
        assignments=model.labels_,
        metrics=metrics,
        config=cfg,
        timing=timing,
        diagnostics=model.diagnostics_,
    )


def write_report(result: ClusteringResult, path) -> Path:
    """Write the JSON report; assignments go to an LBL1 file beside it.

    Keys appear in a fixed order so two reports from identical runs differ
    only where their values differ.
    """
    path = Path(path)
    assignments_path = path.with_name(path.stem + ".assignments.lbl1")
    save_labels(result.assignments, assignments_path)
    document = {
        "config": asdict(result.config),
        "metrics": None if result.metrics is None else result.metrics.as_dict(),
        "diagnostics": result.diagnostics,
        "timings": result.timing,
        "assignments_path": assignments_path.name,
    }
    with open(path, "w") as fh:
        json.dump(document, fh, indent=2)
        fh.write("\n")
    return path


def save_fusion_weights_csv(weights, path) -> None:
    """Per-instance modality weights as CSV for offline analysis."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance_id", "beta_image", "beta_noun", "beta_caption"])
        for i, row in enumerate(weights.beta):
            writer.writerow([i, f"{row[0]:.9f}", f"{row[1]:.9f}", f"{row[2]:.9f}"])


def save_semantic_space(space, out_dir) -> None:
    """Serialize a SemanticSpace: two EMB1 files plus u32 index sidecars."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_embeddings(EmbeddingMatrix(space.noun_embeddings, "noun"), out_dir / "nouns_selected.emb1")
    save_embeddings(
        EmbeddingMatrix(space.caption_embeddings, "caption"), out_dir / "captions_selected.emb1"
    )
    for name, indices in (("noun", space.noun_indices), ("caption", space.caption_indices)):
        payload = np.asarray(indices, dtype="<u4")
        with open(out_dir / f"{name}_indices.u32", "wb") as fh:
            fh.write(np.asarray([payload.size], dtype="<u4").tobytes())
            fh.write(payload.tobytes())


def parse_kv_file(path) -> dict:
    """Flat key-value text: one ``key = value`` per line, ``#`` comments."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        values[key.strip()] = value.strip()
    return values


def _coerce(key: str, raw: str):
    if key in _BOOL_FIELDS:
        lowered = raw.lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"cannot parse boolean {key} = {raw!r}")
    if key in _INT_FIELDS:
        return int(raw)
    if key in _FLOAT_FIELDS:
        return float(raw)
    return raw


def config_from_kv(values: dict) -> PipelineConfig:
    known = set(PipelineConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "images" not in values:
        raise ConfigError("config must set 'images'")
    kwargs = {key: _coerce(key, raw) for key, raw in values.items()}
    return PipelineConfig(**kwargs)


def parse_sweep_file(path) -> dict:
    """Sweep grid: ``key = v1,v2,...`` lines; cartesian product over keys."""
    raw = parse_kv_file(path)
    if not raw:
        raise ConfigError(f"{path}: sweep grid is empty")
    grid = {}
    for key, value in raw.items():
        items = [item.strip() for item in value.split(",") if item.strip()]
        if not items:
            raise ConfigError(f"{path}: sweep key {key!r} has no values")
        grid[key] = [_coerce(key, item) for item in items]
    return grid


def run_ablation_suite(base: PipelineConfig, sweep: dict, out_csv) -> list[dict]:
    """Run every (mode x grid point); one CSV row per run.

    A failing run records its error in the row and the suite continues.
    Rows are sorted by (mode, grid order).
    """
    if not sweep:
        raise ConfigError("sweep grid is empty")
    unknown = set(sweep) - set(PipelineConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown sweep keys: {sorted(unknown)}")
    sweep = dict(sweep)
    modes = sweep.pop("mode", [base.mode])
    if isinstance(modes, str):
        modes = [modes]
    swept_keys = list(sweep.keys())

    def grid_points():
        if not swept_keys:
            yield {}
            return
        counts = [len(sweep[key]) for key in swept_keys]
        total = int(np.prod(counts))
        for flat in range(total):
            point = {}
            remainder = flat
            for key in reversed(swept_keys):
                remainder, pos = divmod(remainder, len(sweep[key]))
                point[key] = sweep[key][pos]
            yield {key: point[key] for key in swept_keys}

    rows = []
    for mode in sorted(modes):
        for point in grid_points():
            row = {"mode": mode, **{key: point[key] for key in swept_keys}}
            overrides = dict(point)
            overrides["mode"] = mode
            started = time.perf_counter()
            try:
                result = run_pipeline(replace(base, **overrides))
                report = result.metrics
                row.update(
                    nmi="" if report is None else f"{report.nmi:.6f}",
                    acc="" if report is None else f"{report.acc:.6f}",
                    ari="" if report is None else f"{report.ari:.6f}",
                    elapsed_seconds=f"{time.perf_counter() - started:.3f}",
                    error="",
                )
            except Exception as exc:  # noqa: BLE001 - suite must keep going
                row.update(
                    nmi="", acc="", ari="",
                    elapsed_seconds=f"{time.perf_counter() - started:.3f}",
                    error=str(exc),
                )
            rows.append(row)

    fieldnames = ["mode", *swept_keys, "nmi", "acc", "ari", "elapsed_seconds", "error"]
    out_csv = Path(out_csv)
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    with open(out_csv, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    return rows


def write_synthetic(spec: SynthSpec, out_dir) -> dict:
    """Generate one synthetic benchmark and write its four files."""
    data = generate_synthetic(spec)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "images": out_dir / "images.emb1",
        "nouns": out_dir / "nouns.emb1",
        "captions": out_dir / "captions.emb1",
        "labels": out_dir / "labels.lbl1",
    }
    save_embeddings(EmbeddingMatrix(data.images, "image"), paths["images"])
    save_embeddings(EmbeddingMatrix(data.noun_bank, "noun"), paths["nouns"])
    save_embeddings(EmbeddingMatrix(data.caption_bank, "caption"), paths["captions"])
    save_labels(data.labels, paths["labels"])
    return {name: str(path) for name, path in paths.items()}

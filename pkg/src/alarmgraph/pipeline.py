"""File-based pipeline stages.

Every stage reads the artifacts of the previous one from the output
directory and writes its own, so ``run_pipeline`` and the per-stage CLI
subcommands share a single code path.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import cluster, graph, ingest, preprocess, project, report, synth
from .config import PipelineConfig
from .embed import similarity, skipgram, walks
from .errors import AlarmGraphError, EmptyPresence, TooFewPoints

logger = logging.getLogger(__name__)

ARTIFACTS = {
    "cleaned_log": "cleaned_log.csv",
    "vocabulary": "vocabulary.csv",
    "sequences": "sequences.jsonl",
    "edges": "graph_edges.csv",
    "nodes": "graph_nodes.csv",
    "corpus": "walks.txt",
    "embeddings": "embeddings.csv",
    "training": "training.json",
    "similarity": "similarity.csv",
    "consensus": "consensus_D.csv",
    "newick": "dendrogram.nwk",
    "merges": "dendrogram_merges.csv",
    "assignments": "assignments.csv",
    "selection": "k_selection.json",
    "projection": "projection.csv",
    "heatmap": "heatmap.svg",
    "dendrogram_svg": "dendrogram.svg",
    "scatter": "scatter.svg",
    "manifest": "manifest.json",
}

STAGES = ("preprocess", "graph", "embed", "cluster", "project", "report")


class MissingInput(AlarmGraphError, FileNotFoundError):
    pass


class StageError(AlarmGraphError):
    """A stage failed; the message is prefixed with the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


def _read(out: Path, key: str) -> str:
    path = out / ARTIFACTS[key]
    if not path.exists():
        raise MissingInput(f"expected input {path} is missing")
    return path.read_text(encoding="utf-8")


def _write(out: Path, key: str, text: str) -> Path:
    path = out / ARTIFACTS[key]
    path.write_text(text, encoding="utf-8", newline="\n")
    return path


def stage_synth(out: Path, cfg: PipelineConfig) -> list[Path]:
    spec = synth.planted_scenario(
        cfg.seed,
        burst_rate=cfg["synth.burst_rate"],
        noise_rate=cfg["synth.noise_rate"],
        spread=cfg["synth.spread"],
        chatter_prob=cfg["synth.chatter_prob"],
        fault_interval=cfg["synth.fault_interval"],
        total_alarms=cfg["synth.total_alarms"],
    )
    log, truth = synth.generate(spec)
    files = {
        "synthetic_log.csv": ingest.format_log(log),
        "ground_truth.csv": synth.format_ground_truth(truth),
        "scenario.json": synth.scenario_manifest(spec, truth),
    }
    paths = []
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8", newline="\n")
        paths.append(out / name)
    return paths


def stage_preprocess(out: Path, cfg: PipelineConfig, log_path: Path) -> list[Path]:
    if not Path(log_path).exists():
        raise MissingInput(f"expected input {log_path} is missing")
    log, diagnostics = ingest.parse_log(Path(log_path).read_bytes())
    for d in diagnostics:
        logger.warning("row %d skipped (%s): %s", d.row, d.kind, d.message)
    pc = cfg.preprocess()
    clean = preprocess.dechatter(log, pc.chatter_window)
    vocab = ingest.build_vocabulary(clean)
    seqs = preprocess.segment(clean, pc.gap_threshold, pc.min_len, vocab)
    logger.info("%d events -> %d after dechatter -> %d sequences", len(log), len(clean), len(seqs))
    return [
        _write(out, "cleaned_log", ingest.format_log(clean)),
        _write(out, "vocabulary", ingest.format_vocabulary(vocab)),
        _write(out, "sequences", preprocess.format_sequences(seqs, vocab)),
    ]


def stage_graph(out: Path, cfg: PipelineConfig) -> list[Path]:
    vocab = ingest.parse_vocabulary(_read(out, "vocabulary"))
    seqs = preprocess.parse_sequences(_read(out, "sequences"), vocab)
    if not seqs:
        raise EmptyPresence("no alarm sequences survived preprocessing")
    g = graph.build_graph(graph.presence_matrix(seqs, vocab), vocab.tags)
    isolated = [vocab.tag(v) for v in np.flatnonzero(g.isolated)]
    if isolated:
        logger.warning("isolated alarms (not embedded): %s", ", ".join(isolated))
    return [_write(out, "edges", graph.format_edges(g)), _write(out, "nodes", graph.format_nodes(g))]


def stage_embed(out: Path, cfg: PipelineConfig) -> list[Path]:
    g = graph.parse_graph(_read(out, "nodes"), _read(out, "edges"))
    corpus = walks.generate_corpus(g, cfg.walk())
    paths = []
    if cfg["walk.save_corpus"]:
        paths.append(_write(out, "corpus", walks.format_corpus(corpus)))
    E = skipgram.train_skipgram(corpus, cfg.skipgram())
    S = similarity.cosine_similarity_matrix(E)
    paths.append(_write(out, "embeddings", similarity.format_embeddings(E)))
    paths.append(_write(out, "similarity", similarity.format_square(S, E.labels)))
    training = {"epoch_mean_loss": E.loss_history, "n_walks": len(corpus)}
    paths.append(_write(out, "training", json.dumps(training, indent=2) + "\n"))
    return paths


def _choose_k(X: np.ndarray, cfg: PipelineConfig) -> tuple[int, np.ndarray, dict]:
    """Number of clusters and the consensus dissimilarity for it."""
    H = len(X)
    mode, runs, seed = cfg["cluster.k"], cfg["cluster.runs"], cfg.seed
    kw = {"init": cfg["cluster.init"]}
    if mode == "epsilon":
        k_cap = min(cfg["cluster.k_max"], H)
        sel = cluster.select_kmax(X, cfg["cluster.k_min"], runs, cfg["cluster.eps_tol"], k_cap, seed, **kw)
        info = {
            "mode": "epsilon",
            "k": sel.k_max,
            "converged": sel.converged,
            "pooled_runs": sel.n_pooled,
            "eps_curve": [[k, e] for k, e in sel.eps_curve],
        }
        return sel.k_max, sel.D, info
    info: dict = {"mode": "fixed" if isinstance(mode, int) else "elbow"}
    if mode == "elbow":
        ks = [k for k in range(cfg["cluster.k_min"], cfg["cluster.k_max"] + 1) if k <= H]
        res = cluster.elbow(X, ks, seed)
        k = res.suggested_k if res.suggested_k is not None else ks[0]
        info.update(k_range=res.ks, inertia=res.inertia, suggested=res.suggested_k)
        if res.suggested_k is None:
            logger.warning("elbow curve too short for a suggestion; using k=%d", k)
    else:
        k = mode
    if k > H:
        raise TooFewPoints(f"k={k} exceeds the {H} embedded alarms")
    D = cluster.consensus(cluster.ensemble(X, k, runs, seed, **kw))
    info.update(k=k, pooled_runs=runs)
    return k, D, info


def stage_cluster(out: Path, cfg: PipelineConfig) -> list[Path]:
    E = similarity.parse_embeddings(_read(out, "embeddings"))
    labels = E.labels
    k, D, info = _choose_k(E.vectors, cfg)
    dendro = cluster.ahc(D, cfg["cluster.linkage"])
    assign = cluster.cut(dendro, k=k)
    return [
        _write(out, "consensus", similarity.format_square(D, labels)),
        _write(out, "newick", cluster.to_newick(dendro, labels)),
        _write(out, "merges", cluster.format_merges(dendro)),
        _write(out, "assignments", cluster.format_assignments(labels, assign)),
        _write(out, "selection", json.dumps(info, indent=2) + "\n"),
    ]


def stage_project(out: Path, cfg: PipelineConfig) -> list[Path]:
    E = similarity.parse_embeddings(_read(out, "embeddings"))
    assign = cluster.parse_assignments(_read(out, "assignments"))
    model = project.pca_fit(E.vectors, cfg["pca_k"])
    Y = project.pca_transform(model, E.vectors)
    clusters = [assign.get(t) for t in E.labels]
    return [_write(out, "projection", project.format_projection(E.labels, Y, clusters))]


def stage_report(out: Path, cfg: PipelineConfig) -> list[Path]:
    S, s_labels = similarity.parse_square(_read(out, "similarity"))
    _, d_labels = similarity.parse_square(_read(out, "consensus"))
    dendro = cluster.parse_merges(_read(out, "merges"))
    p_labels, Y, clusters = project.parse_projection(_read(out, "projection"))
    return [
        _write(out, "heatmap", report.heatmap_svg(S, s_labels)),
        _write(out, "dendrogram_svg", report.dendrogram_svg(dendro, d_labels)),
        _write(out, "scatter", report.scatter_svg(Y, p_labels, clusters)),
    ]


STAGE_FUNCS: dict[str, Callable[..., list[Path]]] = {
    "preprocess": stage_preprocess,
    "graph": stage_graph,
    "embed": stage_embed,
    "cluster": stage_cluster,
    "project": stage_project,
    "report": stage_report,
}


def run_stage(name: str, out: Path, cfg: PipelineConfig, **inputs) -> list[Path]:
    """Run one stage, wrapping any failure in a stage-named ``StageError``."""
    func = stage_synth if name == "synth" else STAGE_FUNCS[name]
    try:
        return func(Path(out), cfg, **inputs)
    except StageError:
        raise
    except (AlarmGraphError, ValueError, OSError, KeyError, IndexError) as exc:
        raise StageError(name, exc) from exc


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunResult:
    artifacts: list[Path] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    manifest: Path | None = None


def run_pipeline(
    log_path: Path, out: Path, cfg: PipelineConfig, stages: tuple[str, ...] = STAGES
) -> RunResult:
    """Run ``stages`` in order and write a manifest describing every artifact."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    result = RunResult()
    for name in STAGES:
        if name not in stages:
            continue
        t0 = time.perf_counter()
        kw = {"log_path": Path(log_path)} if name == "preprocess" else {}
        result.artifacts.extend(run_stage(name, out, cfg, **kw))
        result.timings[name] = time.perf_counter() - t0
    manifest = {
        "seed": cfg.seed,
        "config": cfg.values,
        "config_sha256": cfg.source_sha256,
        "input_log": str(log_path),
        "stages": [s for s in STAGES if s in stages],
        "stage_seconds": result.timings,
        "artifacts": {p.name: sha256_file(p) for p in result.artifacts},
    }
    result.manifest = _write(out, "manifest", json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return result

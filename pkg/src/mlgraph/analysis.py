"""Corpus-level analysis: per-dream hierarchies, metric rows, aggregation.

A corpus is JSON Lines, one record per line with keys ``dreamer``, ``id``,
``text`` and optional ``group``. Each admitted dream yields one metric
row per level of its multilevel hierarchy; rows are emitted in canonical
(dreamer, dream id, level) order no matter how many workers ran, so a
fixed corpus, config and seed always produce byte-identical outputs.
"""

from __future__ import annotations

import csv
import json
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .features import ContractionScheme, make_scheme
from .metrics import CSV_METRIC_COLUMNS, LevelMetrics, level_metrics
from .multilevel import MultilevelGraph
from .textpipe import (
    DEFAULT_MAX_LEMMAS,
    DEFAULT_MIN_LEMMAS,
    PipelineConfig,
    admit,
    build_sequence_graph,
    clean_and_lemmatize,
)

log = logging.getLogger("mlgraph.analysis")

PER_DREAM_CSV_HEADER = "dreamer,dream_id,level," + ",".join(CSV_METRIC_COLUMNS)
AGGREGATE_CSV_HEADER = "entity,records,level," + ",".join(CSV_METRIC_COLUMNS)

DEFAULT_GAMMA: tuple[tuple[str, dict], ...] = (
    ("simple_cycles", {}),
    ("scc", {}),
    ("star", {}),
    ("star", {}),
    ("star", {}),
    ("star", {}),
    ("star", {}),
)
DEFAULT_PER_DREAMER_CAP = 30
DEFAULT_SEED = 0


@dataclass(frozen=True)
class DreamRecord:
    dreamer: str
    id: str
    text: str
    group: str | None = None

    @property
    def key(self) -> tuple[str, str]:
        return (self.dreamer, self.id)


@dataclass(frozen=True)
class RunConfig:
    """Everything one analysis run depends on besides the corpus itself."""

    gamma_spec: tuple[tuple[str, tuple[tuple[str, Any], ...]], ...]
    pipeline: PipelineConfig
    per_dreamer_cap: int | None = DEFAULT_PER_DREAMER_CAP
    seed: int = DEFAULT_SEED

    @classmethod
    def default(cls, **pipeline_kwargs: Any) -> "RunConfig":
        gamma = tuple((tag, tuple(sorted(params.items()))) for tag, params in DEFAULT_GAMMA)
        return cls(gamma_spec=gamma, pipeline=PipelineConfig.default(**pipeline_kwargs))

    @classmethod
    def from_json_file(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        base = path.parent

        gamma_in = data.get("gamma")
        if gamma_in is None:
            gamma_items: list[tuple[str, dict]] = [(t, dict(p)) for t, p in DEFAULT_GAMMA]
        else:
            gamma_items = []
            for entry in gamma_in:
                if isinstance(entry, str):
                    gamma_items.append((entry, {}))
                else:
                    gamma_items.append((entry["tag"], dict(entry.get("params", {}))))
            if not gamma_items:
                raise ValueError("gamma must list at least one contraction scheme")
        for tag, params in gamma_items:
            make_scheme(tag, **params)  # validate early, fail fast

        pl = data.get("pipeline", {})

        def _resolve(key: str) -> str | None:
            value = pl.get(key)
            return str(base / value) if value else None

        pipeline = PipelineConfig.default(
            stopwords_path=_resolve("stopwords"),
            lemma_path=_resolve("lemma_dict"),
            min_lemmas=int(pl.get("min_lemmas", DEFAULT_MIN_LEMMAS)),
            max_lemmas=int(pl.get("max_lemmas", DEFAULT_MAX_LEMMAS)),
            sentence_breaks=bool(pl.get("sentence_breaks", False)),
        )
        sampling = data.get("sampling", {})
        cap = sampling.get("per_dreamer_cap", DEFAULT_PER_DREAMER_CAP)
        return cls(
            gamma_spec=tuple((t, tuple(sorted(p.items()))) for t, p in gamma_items),
            pipeline=pipeline,
            per_dreamer_cap=None if cap is None else int(cap),
            seed=int(sampling.get("seed", DEFAULT_SEED)),
        )

    def schemes(self) -> list[ContractionScheme]:
        return [make_scheme(tag, **dict(params)) for tag, params in self.gamma_spec]

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=seed)

    def echo(self) -> dict:
        """Config summary embedded in run outputs (no local paths)."""
        return {
            "gamma": [{"tag": t, "params": dict(p)} for t, p in self.gamma_spec],
            "min_lemmas": self.pipeline.min_lemmas,
            "max_lemmas": self.pipeline.max_lemmas,
            "sentence_breaks": self.pipeline.sentence_breaks,
            "per_dreamer_cap": self.per_dreamer_cap,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class DreamLevelRow:
    dreamer: str
    dream_id: str
    metrics: LevelMetrics

    @property
    def sort_key(self) -> tuple[str, str, int]:
        return (self.dreamer, self.dream_id, self.metrics.level)

    def to_json_obj(self) -> dict:
        obj: dict[str, Any] = {
            "dreamer": self.dreamer,
            "dream_id": self.dream_id,
            "level": self.metrics.level,
            "truncated_cycles": self.metrics.truncated_cycles,
            "extras": self.metrics.extras,
        }
        for column, value in self.metrics.by_column().items():
            obj[column] = value
        return obj


@dataclass
class AnalysisResult:
    rows: list[DreamLevelRow]
    rejected: list[dict]
    failed: list[dict]
    admitted: int
    hierarchies: dict[tuple[str, str], str] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return 2 if self.failed else 0


def load_corpus(path: str | Path) -> list[DreamRecord]:
    """Parse a JSON Lines corpus; (dreamer, id) pairs must be unique."""
    records: list[DreamRecord] = []
    seen: set[tuple[str, str]] = set()
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            record = DreamRecord(
                dreamer=str(obj["dreamer"]),
                id=str(obj["id"]),
                text=str(obj["text"]),
                group=str(obj["group"]) if obj.get("group") is not None else None,
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"corpus line {lineno}: {exc}") from exc
        if record.key in seen:
            raise ValueError(f"corpus line {lineno}: duplicate dream {record.key}")
        seen.add(record.key)
        records.append(record)
    return records


def sample_records(
    records: Sequence[DreamRecord], cap: int | None, seed: int
) -> list[DreamRecord]:
    """Seeded uniform sample without replacement, per dreamer.

    Dreamers are visited in sorted order and each keeps at most ``cap``
    dreams (corpus order preserved within a dreamer), so the selection is
    a pure function of corpus, cap and seed.
    """
    if cap is None:
        return list(records)
    by_dreamer: dict[str, list[DreamRecord]] = {}
    for record in records:
        by_dreamer.setdefault(record.dreamer, []).append(record)
    rng = random.Random(seed)
    kept: list[DreamRecord] = []
    for dreamer in sorted(by_dreamer):
        group = by_dreamer[dreamer]
        if len(group) <= cap:
            kept.extend(group)
        else:
            picks = sorted(rng.sample(range(len(group)), cap))
            kept.extend(group[i] for i in picks)
    return kept


def analyze_dream(
    record: DreamRecord, cfg: RunConfig, want_hierarchy: bool = False
) -> tuple[list[DreamLevelRow] | None, str | None, str | None]:
    """(rows, rejection reason, hierarchy JSON) for a single dream."""
    seq = clean_and_lemmatize(record.text, cfg.pipeline)
    if not admit(seq, cfg.pipeline):
        reason = (
            f"lemma budget {seq.budget} outside "
            f"[{cfg.pipeline.min_lemmas}, {cfg.pipeline.max_lemmas}]"
        )
        return None, reason, None
    base = build_sequence_graph(seq)
    hierarchy = MultilevelGraph(base, cfg.schemes())
    budget = seq.budget
    rows = []
    for level in range(hierarchy.height + 1):
        curr = hierarchy.level(level)
        prev = hierarchy.level(level - 1) if level > 0 else None
        rows.append(
            DreamLevelRow(
                record.dreamer,
                record.id,
                level_metrics(
                    level,
                    curr,
                    prev,
                    budget,
                    truncated_cycles=hierarchy.truncated(level),
                ),
            )
        )
    payload = hierarchy.to_json() if want_hierarchy else None
    return rows, None, payload


def _analyze_worker(
    args: tuple[DreamRecord, RunConfig, bool]
) -> tuple[tuple[str, str], str, Any]:
    record, cfg, want_hierarchy = args
    try:
        rows, reason, hierarchy = analyze_dream(record, cfg, want_hierarchy)
    except Exception as exc:  # per-dream isolation: the run continues
        return record.key, "failed", f"{type(exc).__name__}: {exc}"
    if rows is None:
        return record.key, "rejected", reason
    return record.key, "ok", (rows, hierarchy)


def analyze_corpus(
    records: Sequence[DreamRecord],
    cfg: RunConfig,
    jobs: int = 1,
    want_hierarchies: bool = False,
) -> AnalysisResult:
    """Run the full pipeline over a corpus, deterministically.

    Work is distributed per dream; results are buffered and re-ordered by
    (dreamer, dream id, level), so the output is identical for any worker
    count.
    """
    selected = sample_records(records, cfg.per_dreamer_cap, cfg.seed)
    tasks = [(record, cfg, want_hierarchies) for record in selected]
    if jobs <= 1 or len(tasks) <= 1:
        outcomes = [_analyze_worker(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_analyze_worker, tasks, chunksize=8))

    rows: list[DreamLevelRow] = []
    rejected: list[dict] = []
    failed: list[dict] = []
    hierarchies: dict[tuple[str, str], str] = {}
    admitted = 0
    for key, status, payload in sorted(outcomes, key=lambda o: o[0]):
        dreamer, dream_id = key
        if status == "ok":
            admitted += 1
            dream_rows, hierarchy = payload
            rows.extend(dream_rows)
            if hierarchy is not None:
                hierarchies[key] = hierarchy
        elif status == "rejected":
            log.info("rejected %s/%s: %s", dreamer, dream_id, payload)
            rejected.append({"dreamer": dreamer, "dream_id": dream_id, "reason": payload})
        else:
            log.error("failed %s/%s: %s", dreamer, dream_id, payload)
            failed.append({"dreamer": dreamer, "dream_id": dream_id, "error": payload})
    rows.sort(key=lambda r: r.sort_key)
    return AnalysisResult(rows, rejected, failed, admitted, hierarchies)


# -- output formatting --------------------------------------------------------


def format_cell(value: float | int | None) -> str:
    """CSV cell formatting: nulls empty, floats trimmed to >= 3 decimals."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if value == 0:
        return "0.000"
    text = f"{value:.6f}"
    head, _, frac = text.partition(".")
    while len(frac) > 3 and frac.endswith("0"):
        frac = frac[:-1]
    return f"{head}.{frac}"


def write_metrics_csv(rows: Iterable[DreamLevelRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PER_DREAM_CSV_HEADER.split(","))
        for row in rows:
            cells = [row.dreamer, row.dream_id, str(row.metrics.level)]
            cells.extend(format_cell(v) for v in row.metrics.by_column().values())
            writer.writerow(cells)


def write_metrics_json(rows: Iterable[DreamLevelRow], path: str | Path) -> None:
    obj = {"rows": [row.to_json_obj() for row in rows]}
    Path(path).write_text(
        json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def write_summary_json(result: AnalysisResult, cfg: RunConfig, path: str | Path) -> None:
    obj = {
        "config": cfg.echo(),
        "admitted": result.admitted,
        "rejected": result.rejected,
        "failed": result.failed,
        "rows": len(result.rows),
    }
    Path(path).write_text(
        json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


# -- aggregation ---------------------------------------------------------------


def rows_to_dicts(rows: Iterable[DreamLevelRow]) -> list[dict]:
    out = []
    for row in rows:
        entry: dict[str, Any] = {
            "dreamer": row.dreamer,
            "dream_id": row.dream_id,
            "level": row.metrics.level,
        }
        entry.update(row.metrics.by_column())
        out.append(entry)
    return out


def read_metrics_csv(path: str | Path) -> list[dict]:
    """Read per-dream rows back; empty cells become None."""
    out: list[dict] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for raw in csv.DictReader(fh):
            entry: dict[str, Any] = {
                "dreamer": raw["dreamer"],
                "dream_id": raw["dream_id"],
                "level": int(raw["level"]),
            }
            for column in CSV_METRIC_COLUMNS:
                cell = raw[column]
                entry[column] = float(cell) if cell not in ("", None) else None
            out.append(entry)
    return out


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def aggregate_rows(
    rows: Sequence[Mapping[str, Any]], mode: str
) -> tuple[list[dict], dict]:
    """Average metric rows per dreamer, or pool dreamers equally.

    ``per_dreamer``: arithmetic mean of each metric per (dreamer, level),
    nulls excluded. ``pooled``: mean of the per-dreamer means, each
    dreamer weighted identically; dreamers whose metric is undefined at a
    level are excluded from that pool average. The counts mapping records
    how many values fed every mean.
    """
    if mode not in ("per_dreamer", "pooled"):
        raise ValueError(f"unknown aggregation mode {mode!r}")

    per: dict[tuple[str, int], dict[str, list[float]]] = {}
    dreams: dict[str, set[str]] = {}
    levels: set[int] = set()
    for row in rows:
        dreamer = row["dreamer"]
        level = int(row["level"])
        levels.add(level)
        dreams.setdefault(dreamer, set()).add(row["dream_id"])
        bucket = per.setdefault((dreamer, level), {c: [] for c in CSV_METRIC_COLUMNS})
        for column in CSV_METRIC_COLUMNS:
            value = row.get(column)
            if value is not None:
                bucket[column].append(float(value))

    dreamer_means: dict[tuple[str, int], dict[str, float | None]] = {}
    counts: dict[str, dict[str, dict[str, int]]] = {}
    for (dreamer, level), bucket in per.items():
        dreamer_means[(dreamer, level)] = {c: _mean(vs) for c, vs in bucket.items()}
        counts.setdefault(dreamer, {})[str(level)] = {
            c: len(vs) for c, vs in bucket.items()
        }

    out: list[dict] = []
    if mode == "per_dreamer":
        for dreamer in sorted(dreams):
            for level in sorted(levels):
                means = dreamer_means.get((dreamer, level))
                if means is None:
                    continue
                entry: dict[str, Any] = {
                    "entity": dreamer,
                    "records": len(dreams[dreamer]),
                    "level": level,
                }
                entry.update(means)
                out.append(entry)
        return out, counts

    pooled_counts: dict[str, dict[str, int]] = {}
    total_records = sum(len(ids) for ids in dreams.values())
    for level in sorted(levels):
        entry = {"entity": "pooled", "records": total_records, "level": level}
        level_counts: dict[str, int] = {}
        for column in CSV_METRIC_COLUMNS:
            contributions = [
                dreamer_means[(dreamer, level)][column]
                for dreamer in sorted(dreams)
                if (dreamer, level) in dreamer_means
                and dreamer_means[(dreamer, level)][column] is not None
            ]
            entry[column] = _mean(contributions)
            level_counts[column] = len(contributions)
        pooled_counts[str(level)] = level_counts
        out.append(entry)
    return out, {"pooled": pooled_counts}


def write_aggregate_csv(agg_rows: Iterable[Mapping[str, Any]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGGREGATE_CSV_HEADER.split(","))
        for row in agg_rows:
            cells = [str(row["entity"]), str(row["records"]), str(row["level"])]
            cells.extend(format_cell(row[c]) for c in CSV_METRIC_COLUMNS)
            writer.writerow(cells)

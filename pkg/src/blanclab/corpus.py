"""Corpus ingestion and synthetic summary generation.

The internal shape is one JSON object per line:

    {"id": ..., "text": ..., "summary": ...,
     "scores": {quality: {group: [per-annotator values]}},   # optional
     "provenance": ...}                                       # optional

A SummEval-style adapter maps the published annotation layout (expert and
turker annotation lists per record) onto the same shape.  All readers
tolerate UTF-8 with BOM.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import CorpusFormatError
from .stats import QUALITY_DIMENSIONS
from .tokenization import segment_sentences

logger = logging.getLogger(__name__)

EXPERT_GROUP = "expert"
TURKER_GROUP = "turker"

HumanScores = Mapping[str, Mapping[str, tuple[float, ...]]]


@dataclass(frozen=True)
class AnnotatedSample:
    """One (text, summary) pair with optional per-annotator human scores."""

    sample_id: str
    text: str
    summary: str
    human: HumanScores = field(default_factory=dict)
    provenance: str = ""


class CorpusFormat(str, Enum):
    JSONL_GENERIC = "jsonl"
    SUMMEVAL = "summeval"


def _fail(path: object, lineno: int, message: str) -> CorpusFormatError:
    return CorpusFormatError(f"{path}:{lineno}: {message}")


def _require_str(obj: dict, key: str, path: object, lineno: int) -> str:
    value = obj.get(key)
    if not isinstance(value, str):
        raise _fail(path, lineno, f"field {key!r} must be a string")
    return value


def _parse_scores(raw: object, path: object, lineno: int) -> dict[str, dict[str, tuple[float, ...]]]:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise _fail(path, lineno, "field 'scores' must be an object")
    scores: dict[str, dict[str, tuple[float, ...]]] = {}
    for quality, groups in raw.items():
        if not isinstance(groups, dict):
            raise _fail(path, lineno, f"field 'scores.{quality}' must be an object")
        per_group: dict[str, tuple[float, ...]] = {}
        for group, values in groups.items():
            if not isinstance(values, list) or not all(
                isinstance(v, (int, float)) for v in values
            ):
                raise _fail(
                    path, lineno,
                    f"field 'scores.{quality}.{group}' must be a list of numbers",
                )
            per_group[group] = tuple(float(v) for v in values)
        scores[quality] = per_group
    return scores


def _parse_generic(obj: dict, path: object, lineno: int) -> AnnotatedSample:
    return AnnotatedSample(
        sample_id=_require_str(obj, "id", path, lineno),
        text=_require_str(obj, "text", path, lineno),
        summary=_require_str(obj, "summary", path, lineno),
        human=_parse_scores(obj.get("scores"), path, lineno),
        provenance=str(obj.get("provenance", "")),
    )


def _parse_summeval(obj: dict, path: object, lineno: int) -> AnnotatedSample:
    sample_id = _require_str(obj, "id", path, lineno)
    model_id = obj.get("model_id")
    if isinstance(model_id, str) and model_id:
        sample_id = f"{sample_id}__{model_id}"
    text = obj.get("text") or obj.get("source") or obj.get("document")
    if not isinstance(text, str):
        raise _fail(path, lineno, "field 'text' (or 'source'/'document') must be a string")
    summary = obj.get("decoded") or obj.get("summary")
    if not isinstance(summary, str):
        raise _fail(path, lineno, "field 'decoded' (or 'summary') must be a string")

    scores: dict[str, dict[str, tuple[float, ...]]] = {}
    for key, group in (("expert_annotations", EXPERT_GROUP),
                       ("turker_annotations", TURKER_GROUP)):
        annotations = obj.get(key)
        if annotations is None:
            continue
        if not isinstance(annotations, list):
            raise _fail(path, lineno, f"field {key!r} must be a list")
        for ann_index, annotation in enumerate(annotations):
            if not isinstance(annotation, dict):
                raise _fail(path, lineno, f"field {key!r}[{ann_index}] must be an object")
            for quality, value in annotation.items():
                if not isinstance(value, (int, float)):
                    raise _fail(
                        path, lineno, f"field {key!r}[{ann_index}].{quality} must be a number"
                    )
                scores.setdefault(quality, {}).setdefault(group, ())
                scores[quality][group] = scores[quality][group] + (float(value),)
    return AnnotatedSample(
        sample_id=sample_id, text=text, summary=summary,
        human=scores, provenance=str(obj.get("provenance", "summeval")),
    )


def load_corpus(
    path: str | Path, format: CorpusFormat = CorpusFormat.JSONL_GENERIC
) -> list[AnnotatedSample]:
    """Load a corpus file; sample order is the file order.

    Raises CorpusFormatError naming file, line and field on schema violations,
    including duplicate sample ids.
    """
    path = Path(path)
    samples: list[AnnotatedSample] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8-sig") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise _fail(path, lineno, f"invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise _fail(path, lineno, "each line must hold a JSON object")
            if format is CorpusFormat.SUMMEVAL:
                sample = _parse_summeval(obj, path, lineno)
            else:
                sample = _parse_generic(obj, path, lineno)
            if sample.sample_id in seen:
                raise _fail(path, lineno, f"duplicate sample id {sample.sample_id!r}")
            seen.add(sample.sample_id)
            samples.append(sample)
    return samples


def save_corpus(samples: Iterable[AnnotatedSample], path: str | Path) -> None:
    """Write samples in the generic JSONL shape (round-trips with load_corpus)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as handle:
        for sample in samples:
            obj: dict[str, object] = {
                "id": sample.sample_id,
                "text": sample.text,
                "summary": sample.summary,
            }
            if sample.human:
                obj["scores"] = {
                    quality: {group: list(values) for group, values in groups.items()}
                    for quality, groups in sample.human.items()
                }
            if sample.provenance:
                obj["provenance"] = sample.provenance
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")


def mean_group_scores(
    samples: Sequence[AnnotatedSample],
    group: str,
    *,
    qualities: Sequence[str] = QUALITY_DIMENSIONS,
) -> dict[str, list[float]]:
    """Per-quality vectors of annotator-mean scores, aligned with `samples`.

    Qualities not present (for the group) in every sample are omitted with a
    warning.
    """
    out: dict[str, list[float]] = {}
    for quality in qualities:
        values: list[float] = []
        complete = True
        for sample in samples:
            annotator_scores = sample.human.get(quality, {}).get(group)
            if not annotator_scores:
                complete = False
                break
            values.append(sum(annotator_scores) / len(annotator_scores))
        if complete and values:
            out[quality] = values
        else:
            logger.warning(
                "quality %r not scored by group %r on every sample; omitted",
                quality, group,
            )
    return out


# --------------------------------------------------------------------------
# Synthetic summaries
# --------------------------------------------------------------------------

def synth_top_sentences(document: str, k: int) -> str:
    """The first min(k, sentence count) sentences, joined in order."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return " ".join(segment_sentences(document)[:k])


def synth_random_sentences(document: str, k: int, seed: int) -> str:
    """k distinct sentences sampled uniformly (seeded), joined in document order."""
    if k < 0:
        raise ValueError("k must be >= 0")
    sentences = segment_sentences(document)
    count = min(k, len(sentences))
    chosen = sorted(random.Random(seed).sample(range(len(sentences)), count))
    return " ".join(sentences[i] for i in chosen)


def sample_per_day(
    dated_documents: Iterable[tuple[str, str]], per_day: int, seed: int
) -> list[str]:
    """Pick up to per_day documents per date key (seeded, dates processed in
    sorted order); models sampling a news feed by day."""
    by_day: dict[str, list[str]] = {}
    for day, document in dated_documents:
        by_day.setdefault(day, []).append(document)
    rng = random.Random(seed)
    picked: list[str] = []
    for day in sorted(by_day):
        docs = by_day[day]
        picked.extend(rng.sample(docs, min(per_day, len(docs))))
    return picked


def make_synthetic_corpus(
    documents: Sequence[str],
    kind: str,
    *,
    k: int = 2,
    seed: int = 0,
    id_prefix: str = "synth",
) -> list[AnnotatedSample]:
    """Samples whose summaries are the top-k or random-k sentences of each text."""
    if kind not in ("top", "random"):
        raise ValueError(f"kind must be 'top' or 'random', got {kind!r}")
    samples = []
    for i, document in enumerate(documents):
        if kind == "top":
            summary = synth_top_sentences(document, k)
        else:
            summary = synth_random_sentences(document, k, seed + i)
        samples.append(
            AnnotatedSample(
                sample_id=f"{id_prefix}-{kind}-{i:04d}",
                text=document,
                summary=summary,
                provenance=f"synthetic-{kind}-{k}",
            )
        )
    return samples

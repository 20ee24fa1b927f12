"""Command-line client for the scoring service.

Every subcommand is a thin HTTP client: corpora and configs are read locally,
shipped to the service, and the returned reports (CSV + JSON + manifest) are
written under --out-dir.  With --server the commands talk to a running
service; without it an in-process instance of the service handles the request
through an ASGI test transport, so the tool works standalone.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any

import httpx

from . import __version__
from .corpus import CorpusFormat, load_corpus
from .errors import BlanclabError
from .presets import FAMILIES, HELP_MAX_HUMAN, HELP_OPTIMAL, TUNE_MAX_HUMAN, TUNE_OPTIMAL

PRESET_CONFIGS = {
    "help-optimal": HELP_OPTIMAL,
    "help-max-human": HELP_MAX_HUMAN,
    "tune-optimal": TUNE_OPTIMAL,
    "tune-max-human": TUNE_MAX_HUMAN,
}


class CliError(Exception):
    """Fatal CLI failure with a user-facing message."""


def _default_workers() -> int:
    return max(1, os.cpu_count() or 1)


def _make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    # in-process fallback: starlette's sync ASGI client; its httpx-vs-httpx2
    # deprecation chatter is irrelevant to end users of this CLI
    import warnings

    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*httpx2.*")
        from starlette.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def _post(client: httpx.Client, path: str, body: dict[str, Any]) -> dict[str, Any]:
    response = client.post(path, json=body)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise CliError(f"service returned {response.status_code} for {path}: {detail}")
    return response.json()


def _load_config_arg(value: str) -> dict[str, Any]:
    """A --config value is a preset name or a path to a config JSON file."""
    if value in PRESET_CONFIGS:
        return PRESET_CONFIGS[value].to_json_dict()
    path = Path(value)
    if not path.exists():
        raise CliError(
            f"config {value!r} is neither a preset ({sorted(PRESET_CONFIGS)}) "
            f"nor an existing file"
        )
    with open(path, encoding="utf-8-sig") as handle:
        return json.load(handle)


def _load_family_arg(value: str) -> tuple[list[dict[str, Any]] | None, str | None]:
    """A --family value is a named family or a path to a JSON list of configs."""
    if value in FAMILIES:
        return None, value
    path = Path(value)
    if not path.exists():
        raise CliError(
            f"family {value!r} is neither a named family ({sorted(FAMILIES)}) "
            f"nor an existing file"
        )
    with open(path, encoding="utf-8-sig") as handle:
        configs = json.load(handle)
    if not isinstance(configs, list):
        raise CliError(f"family file {value!r} must hold a JSON list of configs")
    return configs, None


def _load_samples(path_value: str, corpus_format: str) -> list[dict[str, Any]]:
    path = Path(path_value)
    if not path.exists():
        raise CliError(f"corpus file not found: {path}")
    samples = load_corpus(path, CorpusFormat(corpus_format))
    return [
        {
            "id": s.sample_id,
            "text": s.text,
            "summary": s.summary,
            "scores": {
                quality: {group: list(values) for group, values in groups.items()}
                for quality, groups in s.human.items()
            }
            or None,
            "provenance": s.provenance,
        }
        for s in samples
    ]


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, content: str) -> None:
    path.write_text(content, encoding="utf-8")
    print(f"wrote {path}")


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def _parse_strategies(value: str) -> list[dict[str, Any]]:
    """Parse 'top_n:1,2,3;contiguous_n:2;threshold:0.0,0.05' into request form."""
    strategies: list[dict[str, Any]] = []
    for part in value.split(";"):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise CliError(f"strategy {part!r} must look like name:v1,v2,...")
        name, values_text = part.split(":", 1)
        name = name.strip()
        if name not in ("top_n", "contiguous_n", "threshold"):
            raise CliError(f"unknown strategy {name!r}")
        try:
            values = [float(v) for v in values_text.split(",") if v.strip()]
        except ValueError as exc:
            raise CliError(f"strategy {name!r} has a non-numeric value: {exc}") from exc
        if not values:
            raise CliError(f"strategy {name!r} needs at least one value")
        strategies.append({"strategy": name, "values": values})
    if not strategies:
        raise CliError("--strategies parsed to nothing")
    return strategies


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def cmd_score(args: argparse.Namespace) -> int:
    samples = _load_samples(args.corpus, args.corpus_format)
    body = {
        "corpus_id": args.corpus_id or Path(args.corpus).stem,
        "samples": samples,
        "config": _load_config_arg(args.config),
        "backend": args.backend,
        "seed": args.seed,
        "workers": args.workers,
    }
    with _make_client(args.server) as client:
        payload = _post(client, "/score", body)
    out = _out_dir(args)
    _write(out / "scores.csv", payload["csv"])
    _write_json(out / "scores.json", payload)
    _write_json(out / "manifest.json", payload["manifest"])
    if payload["skipped"]:
        print(f"skipped {len(payload['skipped'])} sample(s)", file=sys.stderr)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    corpora: dict[str, Any] = {}
    for entry in args.corpus:
        if "=" in entry:
            name, path_value = entry.split("=", 1)
        else:
            name, path_value = Path(entry).stem, entry
        if name in corpora:
            raise CliError(f"duplicate corpus name {name!r}")
        corpora[name] = _load_samples(path_value, args.corpus_format)
    family, family_name = _load_family_arg(args.family)
    body = {
        "corpora": corpora,
        "family": family,
        "family_name": family_name,
        "backend": args.backend,
        "seed": args.seed,
        "workers": args.workers,
    }
    with _make_client(args.server) as client:
        payload = _post(client, "/sweep", body)
    out = _out_dir(args)
    _write(out / "sweep.csv", payload["csv"])
    _write_json(out / "sweep.json", payload["report"])
    _write_json(out / "manifest.json", payload["manifest"])
    optimal = payload["report"]["optimal"]
    universal = payload["report"]["universal"]
    print(f"optimal per dataset: {optimal} (universal: {universal})")
    return 0


def cmd_restrict(args: argparse.Namespace) -> int:
    samples = _load_samples(args.corpus, args.corpus_format)
    body = {
        "corpus_id": args.corpus_id or Path(args.corpus).stem,
        "samples": samples,
        "config": _load_config_arg(args.config),
        "strategies": _parse_strategies(args.strategies),
        "backend": args.backend,
        "group": args.groups.split(",")[0],
        "correlation": args.correlation,
        "seed": args.seed,
        "workers": args.workers,
    }
    with _make_client(args.server) as client:
        payload = _post(client, "/restrict", body)
    out = _out_dir(args)
    _write(out / "restriction.csv", payload["csv"])
    _write_json(out / "restriction.json", payload)
    _write_json(out / "manifest.json", payload["manifest"])
    return 0


def cmd_correlate(args: argparse.Namespace) -> int:
    samples = _load_samples(args.corpus, args.corpus_format)
    measures: dict[str, dict[str, float]] = {}
    for entry in args.scores:
        if "=" not in entry:
            raise CliError(f"--scores entries look like label=path, got {entry!r}")
        label, path_value = entry.split("=", 1)
        path = Path(path_value)
        if not path.exists():
            raise CliError(f"scores file not found: {path}")
        with open(path, encoding="utf-8-sig") as handle:
            scores_payload = json.load(handle)
        measures[label] = {
            r["sample_id"]: float(r["score"]) for r in scores_payload["results"]
        }
    body = {
        "corpus_id": args.corpus_id or Path(args.corpus).stem,
        "samples": samples,
        "measures": measures,
        "groups": [g for g in args.groups.split(",") if g],
        "shift_pair": args.shift_pair.split(",", 1) if args.shift_pair else None,
        "seed": args.seed,
    }
    with _make_client(args.server) as client:
        payload = _post(client, "/correlate", body)
    out = _out_dir(args)
    for group, table in payload["tables"].items():
        _write(out / f"correlation_{group}.csv", table["csv"])
        _write(out / f"correlation_{group}.txt", table["text"])
    _write_json(out / "correlation.json", payload)
    _write_json(out / "manifest.json", payload["manifest"])
    for warning in payload["warnings"]:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser, *, corpus: bool = True) -> None:
    if corpus:
        parser.add_argument("--corpus-format", default="jsonl",
                            choices=[f.value for f in CorpusFormat],
                            help="corpus file format")
    parser.add_argument("--backend", default="reference",
                        help="backend spec: 'reference' or 'remote:<base-url>'")
    parser.add_argument("--seed", type=int, default=0,
                        help="run seed; flows into tuning policies without one")
    parser.add_argument("--workers", type=int, default=_default_workers(),
                        help="bound on concurrent backend calls")
    parser.add_argument("--out-dir", required=True, help="directory for report files")
    parser.add_argument("--server", default=None,
                        help="URL of a running service; omit to run in-process")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blanclab",
        description="Reference-free summary quality measures and their meta-evaluation",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score every sample of a corpus")
    p_score.add_argument("--corpus", required=True, help="corpus file (JSONL)")
    p_score.add_argument("--corpus-id", default=None)
    p_score.add_argument("--config", required=True,
                         help=f"preset name {sorted(PRESET_CONFIGS)} or config JSON file")
    _add_common(p_score)
    p_score.set_defaults(func=cmd_score)

    p_sweep = sub.add_parser("sweep", help="evaluate a measure family over corpora")
    p_sweep.add_argument("--corpus", action="append", required=True,
                         help="corpus as name=path (repeatable)")
    p_sweep.add_argument("--family", required=True,
                         help=f"named family {sorted(FAMILIES)} or JSON file with a config list")
    _add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_restrict = sub.add_parser("restrict", help="restricted-text correlation gains")
    p_restrict.add_argument("--corpus", required=True,
                            help="corpus file with human scores")
    p_restrict.add_argument("--corpus-id", default=None)
    p_restrict.add_argument("--config", required=True)
    p_restrict.add_argument("--strategies", required=True,
                            help="e.g. 'top_n:1,2,3;contiguous_n:2;threshold:0.0,0.05'")
    p_restrict.add_argument("--groups", default="expert",
                            help="annotator group for human scores (first is used)")
    p_restrict.add_argument("--correlation", default="spearman",
                            choices=["spearman", "pearson"])
    _add_common(p_restrict)
    p_restrict.set_defaults(func=cmd_restrict)

    p_corr = sub.add_parser("correlate", help="correlation tables and ratio shifts")
    p_corr.add_argument("--corpus", required=True, help="corpus file with human scores")
    p_corr.add_argument("--corpus-id", default=None)
    p_corr.add_argument("--scores", action="append", required=True,
                        help="measure scores as label=scores.json (repeatable)")
    p_corr.add_argument("--groups", default="expert,turker")
    p_corr.add_argument("--shift-pair", default=None,
                        help="two measure labels 'a,b' for the ratio-shift report")
    _add_common(p_corr)
    p_corr.set_defaults(func=cmd_correlate)

    p_serve = sub.add_parser("serve", help="run the scoring service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8750)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, BlanclabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(f"error: transport failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: attack, evaluate, sample, and probe subcommands.

Configuration precedence is flags, then a ``--config`` key=value file,
then built-in defaults; ``EMPRA_SERVER_URL`` supplies the server URL when
neither a flag nor the config file does.  Exit status is 0 on success, 1
when individual targets or probe checks failed, and 2 on fatal
configuration errors (bad flags, unreadable files, invalid values).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .constructor import AttackConfig
from .metrics import (
    boosted_topk,
    compute_metrics,
    dale_chall_summary,
    load_familiar_words,
)
from .model import (
    IngestError,
    ParseError,
    load_corpus,
    load_queries,
    load_run,
    load_targets,
    read_report,
    write_report,
    write_targets,
)
from .pipeline import attack_run, sample_targets
from .scorers import RemoteClient, RemoteError, ScorerRoles
from .transporter import BOUND_MODES, TransportParams

ENV_SERVER_URL = "EMPRA_SERVER_URL"

# Canonical flag names (dashed) and how to convert config-file values.
_CONVERTERS = {
    "config": str,
    "corpus": str,
    "queries": str,
    "run": str,
    "targets": str,
    "report": str,
    "word-list": str,
    "embedder": str,
    "dim": int,
    "seed": int,
    "server-url": str,
    "eta": float,
    "epsilon": float,
    "iters": int,
    "alpha": float,
    "bound-mode": str,
    "anchor-kinds": str,
    "mode": str,
    "k": int,
    "workers": int,
}


class CliError(Exception):
    """Fatal configuration problem; maps to exit status 2."""


def _default_workers() -> int:
    return min(8, os.cpu_count() or 1)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument
    g("--config", metavar="PATH", help="key=value file supplying flag defaults")
    g("--corpus", metavar="PATH", help="corpus file (tsv or jsonl)")
    g("--queries", metavar="PATH", help="queries file (tsv or jsonl)")
    g("--run", metavar="PATH", help="six-column ranked run file")
    g("--targets", metavar="PATH", help="target list (jsonl); output path for sample")
    g("--report", metavar="PATH", help="attack report (jsonl)")
    g("--word-list", metavar="PATH", help="familiar-word list for readability")
    g("--embedder", choices=("reference", "remote"), default="reference",
      help="scorer backend (default: reference)")
    g("--dim", type=int, default=256,
      help="reference embedding dimension (default: 256; ignored for remote)")
    g("--seed", type=int, default=0,
      help="seed for the reference embedder and target sampling (default: 0)")
    g("--server-url", metavar="URL",
      help=f"model server base URL (fallback: ${ENV_SERVER_URL})")
    g("--eta", type=float, default=0.1, help="transport step size (default: 0.1)")
    g("--epsilon", type=float, default=0.01,
      help="transport perturbation bound (default: 0.01)")
    g("--iters", type=int, default=25,
      help="transport iterations (default: 25)")
    g("--alpha", type=float, default=0.5,
      help="coherence/relevance interpolation weight (default: 0.5)")
    g("--bound-mode", choices=("grad-clip", "ball-project"), default="grad-clip",
      help="transport bound style (default: grad-clip)")
    g("--anchor-kinds", default="query,top_doc,aligned_sentence",
      metavar="KINDS", help="comma list of anchor kinds (default: all three)")
    g("--mode", choices=("easy5", "hard5", "mixture"), default="easy5",
      help="target sampling mode (default: easy5)")
    g("--k", type=int, help="extra boosted-top-k cutoff for evaluate")
    g("--workers", type=int, default=_default_workers(),
      help="parallel targets (default: processor count, capped at 8)")

    parser = argparse.ArgumentParser(
        prog="empra",
        description="Black-box adversarial rank attacks on retrieval systems.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("attack", parents=[common],
                   help="run the two-stage attack over a target list")
    sub.add_parser("evaluate", parents=[common],
                   help="compute metrics from an attack report")
    sub.add_parser("sample", parents=[common],
                   help="draw targets from a ranked run")
    sub.add_parser("probe", parents=[common],
                   help="check a model server's wire contract and latency")
    return parser


def _read_config_file(path: str) -> dict[str, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc}") from exc
    values: dict[str, str] = {}
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{line_no}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("_", "-")
        if key not in _CONVERTERS or key == "config":
            raise CliError(f"{path}:{line_no}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def _flag_given(argv: list[str], key: str) -> bool:
    flag = f"--{key}"
    return any(tok == flag or tok.startswith(flag + "=") for tok in argv)


def _apply_config(ns: argparse.Namespace, argv: list[str]) -> None:
    """Layer config-file values under explicit flags, over defaults."""
    if ns.config is None:
        return
    for key, text in _read_config_file(ns.config).items():
        if _flag_given(argv, key):
            continue  # explicit flag wins
        try:
            value = _CONVERTERS[key](text)
        except ValueError as exc:
            raise CliError(f"config value for {key} is invalid: {exc}") from exc
        setattr(ns, key.replace("-", "_"), value)


def _validate(ns: argparse.Namespace) -> None:
    checks = (
        (ns.eta > 0, "eta must be > 0"),
        (ns.epsilon > 0, "epsilon must be > 0"),
        (ns.iters >= 0, "iters must be >= 0"),
        (0.0 <= ns.alpha <= 1.0, "alpha must be in [0, 1]"),
        (ns.dim >= 2, "dim must be >= 2"),
        (ns.workers >= 1, "workers must be >= 1"),
        (ns.k is None or ns.k >= 1, "k must be >= 1"),
        (ns.embedder in ("reference", "remote"), f"unknown embedder {ns.embedder!r}"),
        (ns.bound_mode in ("grad-clip", "ball-project"),
         f"unknown bound mode {ns.bound_mode!r}"),
        (ns.mode in ("easy5", "hard5", "mixture"), f"unknown mode {ns.mode!r}"),
    )
    for ok, message in checks:
        if not ok:
            raise CliError(message)
    if ns.server_url is None:
        ns.server_url = os.environ.get(ENV_SERVER_URL)


def _require(ns: argparse.Namespace, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(ns, n) is None]
    if missing:
        raise CliError(f"{ns.subcommand} requires {', '.join(missing)}")


def _build_roles(ns: argparse.Namespace) -> ScorerRoles:
    if ns.embedder == "remote":
        _require(ns, "server_url")
        return ScorerRoles.remote(ns.server_url)
    return ScorerRoles.reference(dim=ns.dim, seed=ns.seed)


def _build_attack_config(ns: argparse.Namespace) -> AttackConfig:
    kinds = tuple(k.strip() for k in ns.anchor_kinds.split(",") if k.strip())
    transport = TransportParams(
        eta=ns.eta,
        epsilon=ns.epsilon,
        iters=ns.iters,
        bound_mode=ns.bound_mode.replace("-", "_"),
    )
    assert transport.bound_mode in BOUND_MODES
    return AttackConfig(alpha=ns.alpha, transport=transport, anchor_kinds=kinds)


def _cmd_attack(ns: argparse.Namespace) -> int:
    _require(ns, "corpus", "queries", "run", "targets", "report")
    queries = load_queries(ns.queries)
    corpus = load_corpus(ns.corpus)
    runs = load_run(ns.run)
    targets = load_targets(ns.targets)
    cfg = _build_attack_config(ns)
    roles = _build_roles(ns)
    outcomes, errors = attack_run(
        queries, corpus, runs, targets, cfg, roles,
        workers=ns.workers,
        progress=lambda line: print(line, file=sys.stderr),
    )
    write_report(outcomes, ns.report)
    print(
        f"wrote {len(outcomes)} outcomes to {ns.report}"
        + (f" ({len(errors)} targets failed)" if errors else ""),
        file=sys.stderr,
    )
    return 1 if errors else 0


def _cmd_evaluate(ns: argparse.Namespace) -> int:
    _require(ns, "report")
    rows = read_report(ns.report)
    payload = compute_metrics(rows).to_json_dict()
    if ns.k is not None:
        payload["boosted_topk"] = {"k": ns.k, "value": boosted_topk(rows, ns.k)}
    if ns.word_list is not None:
        familiar = load_familiar_words(ns.word_list)
        payload["readability"] = dale_chall_summary(rows, familiar)
    print(json.dumps(payload, indent=2, ensure_ascii=False))
    return 0


def _cmd_sample(ns: argparse.Namespace) -> int:
    _require(ns, "run", "targets")
    runs = load_run(ns.run)
    targets = []
    for index, qid in enumerate(sorted(runs)):
        targets.extend(sample_targets(runs[qid], ns.mode, rng_seed=ns.seed + index))
    write_targets(targets, ns.targets)
    print(f"wrote {len(targets)} targets to {ns.targets}", file=sys.stderr)
    return 0


def _cmd_probe(ns: argparse.Namespace) -> int:
    _require(ns, "server_url")
    client = RemoteClient(ns.server_url)
    checks = (
        ("healthz", client.healthz),
        ("embed", lambda: client.embed(["probe sentence one", "probe sentence two"])),
        ("score", lambda: client.score("probe query", ["first doc", "second doc"])),
        ("nsp", lambda: client.nsp([("First sentence.", "Second sentence.")])),
        ("perplexity", lambda: client.perplexity(["a short probe text"])),
    )
    failures = 0
    for name, call in checks:
        start = time.perf_counter()
        try:
            call()
        except (RemoteError, ValueError) as exc:
            failures += 1
            print(f"{name}: FAIL {exc}")
            continue
        elapsed_ms = (time.perf_counter() - start) * 1e3
        print(f"{name}: ok ({elapsed_ms:.1f} ms)")
    print(f"{len(checks) - failures}/{len(checks)} checks passed on {ns.server_url}")
    return 1 if failures else 0


_COMMANDS = {
    "attack": _cmd_attack,
    "evaluate": _cmd_evaluate,
    "sample": _cmd_sample,
    "probe": _cmd_probe,
}


def run_cli(argv: list[str]) -> int:
    """Parse argv, dispatch, and translate failures into exit statuses."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports its own diagnostics
        return int(exc.code or 0)
    try:
        _apply_config(ns, argv)
        _validate(ns)
        return _COMMANDS[ns.subcommand](ns)
    except (CliError, ParseError, IngestError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RemoteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv: list[str] | None = None) -> int:
    return run_cli(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())

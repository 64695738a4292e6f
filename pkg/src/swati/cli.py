"""Command-line driver: gen, extract, match, bench, verify.

Every command writes a ``manifest.json`` (config digest, input digests, seeds,
package version, resolved arguments) sufficient to re-run it bit-identically.
Commands never mutate their inputs, randomness only flows through explicit
seeds, and failures exit nonzero with a machine-readable JSON error on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .assignment import (
    assign_random,
    assign_skill_only,
    run_epoch,
)
from .config import EngineConfig, input_digest, load_config
from .corpus import (
    SyntheticConfig,
    corpus_stats,
    generate_synthetic,
    generate_synthetic_history,
    load_corpus,
    save_corpus,
    save_history,
)
from .errors import ConfigError, EngineError
from .extraction import build_market, extract_remote, extract_rule_based, extraction_stats
from .ledger import Ledger, export_ledger_text, load_ledger, save_ledger, verify
from .metrics import (
    bench_scaling,
    quality,
    write_cdf_csv,
    write_quality_csv,
    write_timing_csv,
)
from .willingness import WillingnessState, load_history

METHOD_CHOICES = ("swati", "skill", "random")


def _write_manifest(out_dir: str, command: str, cfg: EngineConfig, **extra) -> None:
    manifest = {
        "command": command,
        "config_digest": cfg.digest(),
        "version": __version__,
        **extra,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _ensure_out(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _synthetic_config(cfg: EngineConfig, args) -> SyntheticConfig:
    syn = cfg.synthetic
    seed = args.seed if args.seed is not None else syn.get("seed")
    if seed is None:
        raise ConfigError("synthetic generation needs a seed (--seed or config)")
    return SyntheticConfig(
        seed=seed,
        n_volunteers=args.n_volunteers or syn["n_volunteers"],
        n_tasks=args.n_tasks or syn["n_tasks"],
        skills_per_volunteer=tuple(syn["skills_per_volunteer"]),
        skills_per_task=tuple(syn["skills_per_task"]),
        cue_density=syn["cue_density"],
        vocabulary_ref=cfg.ontology_path,
    )


def _extractor(cfg: EngineConfig):
    if cfg.extractor_kind == "remote":
        return lambda doc, ontology: extract_remote(doc, cfg.remote)
    return extract_rule_based


def cmd_gen(args) -> int:
    cfg = load_config(args.config)
    ontology = cfg.load_ontology()
    syn_cfg = _synthetic_config(cfg, args)
    corpus = generate_synthetic(syn_cfg, ontology)
    out = _ensure_out(args.out)
    corpus_path = os.path.join(out, "corpus.jsonl")
    save_corpus(corpus, corpus_path)
    save_history(
        generate_synthetic_history(syn_cfg, corpus, ontology),
        os.path.join(out, "history.jsonl"),
    )
    stats = corpus_stats(corpus)
    _write_manifest(
        out,
        "gen",
        cfg,
        input_digests={"ontology": input_digest(cfg.ontology_path)},
        seeds={"synthetic": syn_cfg.seed},
        outputs={"corpus": "corpus.jsonl", "history": "history.jsonl"},
        stats={
            "n_volunteers": stats.n_volunteers,
            "n_tasks": stats.n_tasks,
            "mean_text_length": stats.mean_text_length,
        },
    )
    print(f"wrote {stats.n_volunteers} volunteers, {stats.n_tasks} tasks to {corpus_path}")
    return 0


def cmd_extract(args) -> int:
    cfg = load_config(args.config)
    ontology = cfg.load_ontology()
    corpus = load_corpus(args.corpus, strict=args.strict)
    extractor = _extractor(cfg)
    out = _ensure_out(args.out)

    results = []
    records = []
    for doc in corpus.documents():
        result = extractor(doc, ontology)
        results.append(result)
        skills, unresolved = ontology.canonicalize_report(
            m.raw for m in result.mentions
        )
        records.append(
            {
                "doc_id": doc.id,
                "kind": doc.kind,
                "skills": sorted(skills),
                "unresolved": unresolved,
                "mentions": [
                    {
                        "raw": m.raw,
                        "evidence": list(m.evidence),
                        "proficiency": m.proficiency,
                    }
                    for m in result.mentions
                ],
                "cues": {
                    "domain_affinity": result.cues.domain_affinity,
                    "prior_exposure": result.cues.prior_exposure,
                    "stated_interest": result.cues.stated_interest,
                    "volunteering_history": result.cues.volunteering_history,
                    "availability": result.cues.availability,
                },
            }
        )
    with open(os.path.join(out, "extraction.jsonl"), "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True))
            fh.write("\n")
    stats = extraction_stats(results, ontology)
    with open(os.path.join(out, "extraction_stats.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {
                "total_skills": stats.total_skills,
                "unique_vocabulary": stats.unique_vocabulary,
                "avg_per_doc": stats.avg_per_doc,
            },
            fh,
            sort_keys=True,
            indent=2,
        )
        fh.write("\n")
    _write_manifest(
        out,
        "extract",
        cfg,
        input_digests={
            "corpus": input_digest(args.corpus),
            "ontology": input_digest(cfg.ontology_path),
        },
        seeds={},
        outputs={"extraction": "extraction.jsonl", "stats": "extraction_stats.json"},
    )
    print(
        f"extracted {stats.total_skills} skills "
        f"({stats.unique_vocabulary} unique, {stats.avg_per_doc} avg/doc)"
    )
    return 0


def cmd_match(args) -> int:
    cfg = load_config(args.config)
    if args.epochs < 1:
        raise ConfigError("epochs must be >= 1")
    if args.method == "random":
        seed = args.seed if args.seed is not None else cfg.random_method_seed
        if seed is None:
            raise ConfigError("method 'random' needs a seed (--seed or config)")
    else:
        seed = args.seed

    ontology = cfg.load_ontology()
    corpus = load_corpus(args.corpus, strict=args.strict)
    market = build_market(corpus, ontology, cfg.vectorizer, _extractor(cfg))
    histories = load_history(cfg.history_path) if cfg.history_path else None

    state = WillingnessState()
    result = None
    for epoch in range(args.epochs):
        result = run_epoch(
            market.profiles,
            market.taskspecs,
            histories,
            cfg.capacities,
            cfg.utility,
            cfg.willingness,
            state,
            epoch=epoch,
        )
    matrix = result.matrix
    if args.method == "swati":
        assignment = result.assignment
    elif args.method == "skill":
        assignment = assign_skill_only(matrix, cfg.capacities, epoch=args.epochs - 1)
    else:
        assignment = assign_random(matrix, cfg.capacities, seed, epoch=args.epochs - 1)

    out = _ensure_out(args.out)
    vol_idx = {v: i for i, v in enumerate(matrix.volunteers)}
    task_idx = {t: j for j, t in enumerate(matrix.tasks)}
    with open(os.path.join(out, "assignment.jsonl"), "w", encoding="utf-8") as fh:
        for pair in assignment.pairs:
            i, j = vol_idx[pair.volunteer_id], task_idx[pair.task_id]
            fh.write(
                json.dumps(
                    {
                        "volunteer_id": pair.volunteer_id,
                        "task_id": pair.task_id,
                        "utility": pair.utility,
                        "components": {
                            "skill": float(matrix.skill[i, j]),
                            "content": float(matrix.content[i, j]),
                            "willingness": float(matrix.willingness[i, j]),
                        },
                    },
                    sort_keys=True,
                )
            )
            fh.write("\n")

    report = quality(assignment, corpus.n_tasks, method=args.method)
    write_quality_csv(os.path.join(out, "quality.csv"), [report])

    ledger = Ledger()
    for task in corpus.tasks:
        ledger.post_task(task.id, epoch=assignment.epoch)
    ledger.commit_assignment(assignment)
    save_ledger(ledger, os.path.join(out, "ledger.bin"))
    export_ledger_text(ledger, os.path.join(out, "ledger.txt"))

    _write_manifest(
        out,
        "match",
        cfg,
        input_digests={
            "corpus": input_digest(args.corpus),
            "ontology": input_digest(cfg.ontology_path),
        },
        seeds={"method": seed},
        method=args.method,
        epochs=args.epochs,
        outputs={
            "assignment": "assignment.jsonl",
            "quality": "quality.csv",
            "ledger": "ledger.bin",
        },
        ledger_head=ledger.head().hex(),
    )
    print(
        f"{args.method}: total={report.total_utility:.4f} "
        f"avg={report.avg_utility:.4f} coverage={report.coverage:.4f} "
        f"pairs={report.pair_count}"
    )
    return 0


def cmd_bench(args) -> int:
    cfg = load_config(args.config)
    if args.seed is None:
        raise ConfigError("bench needs a seed (--seed)")
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s]
    except ValueError:
        raise ConfigError(f"--sizes must be comma-separated integers, got {args.sizes!r}")
    if not sizes:
        raise ConfigError("--sizes must name at least one market size")
    methods = list(METHOD_CHOICES)
    ontology = cfg.load_ontology()
    result = bench_scaling(
        sizes,
        methods,
        seed=args.seed,
        repetitions=args.repetitions,
        ontology=ontology,
        utility_params=cfg.utility,
        willingness_params=cfg.willingness,
    )
    out = _ensure_out(args.out)
    write_timing_csv(os.path.join(out, "timing.csv"), result.timings)
    with open(os.path.join(out, "quality.csv"), "w", encoding="utf-8") as fh:
        fh.write("size,method,total_utility,avg_utility,coverage,pairs\n")
        for size, report in result.quality:
            fh.write(
                f"{size},{report.method},{report.total_utility:.6f},"
                f"{report.avg_utility:.6f},{report.coverage:.6f},{report.pair_count}\n"
            )
    for size in sizes:
        per_method = {}
        for s, method, threshold, fraction in result.cdf:
            if s == size:
                per_method.setdefault(method, []).append((threshold, fraction))
        write_cdf_csv(os.path.join(out, f"cdf_{size}.csv"), per_method)
    _write_manifest(
        out,
        "bench",
        cfg,
        input_digests={"ontology": input_digest(cfg.ontology_path)},
        seeds={"bench": args.seed},
        sizes=sizes,
        repetitions=args.repetitions,
        outputs={"timing": "timing.csv", "quality": "quality.csv"},
    )
    for report in result.timings:
        lo, med, hi = report.dispersion()
        print(
            f"size={report.market_size} method={report.method} "
            f"median={med:.4f}s (min={lo:.4f}s max={hi:.4f}s)"
        )
    return 0


def cmd_verify(args) -> int:
    ledger = load_ledger(args.ledger)
    expected = bytes.fromhex(args.expect_head) if args.expect_head else None
    result = verify(ledger, expected_head=expected)
    print(
        json.dumps(
            {
                "ok": result.ok,
                "first_bad_index": result.first_bad_index,
                "reason": result.reason,
                "records": len(ledger.records),
                "head": ledger.head().hex(),
            },
            sort_keys=True,
        )
    )
    return 0 if result.ok else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swati",
        description="Skill- and willingness-aware volunteer task assignment engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, corpus=False):
        p.add_argument("--config", help="engine config JSON (defaults built in)")
        p.add_argument("--out", required=True, help="output directory")
        if corpus:
            p.add_argument("--corpus", required=True, help="corpus JSONL path")
            p.add_argument(
                "--strict", action="store_true", help="reject unknown corpus fields"
            )

    p_gen = sub.add_parser("gen", help="generate a synthetic corpus")
    common(p_gen)
    p_gen.add_argument("--seed", type=int, help="generation seed")
    p_gen.add_argument("--n-volunteers", type=int, dest="n_volunteers")
    p_gen.add_argument("--n-tasks", type=int, dest="n_tasks")
    p_gen.set_defaults(func=cmd_gen)

    p_extract = sub.add_parser("extract", help="extract skills and cues from a corpus")
    common(p_extract, corpus=True)
    p_extract.set_defaults(func=cmd_extract)

    p_match = sub.add_parser("match", help="compute an assignment and commit it")
    common(p_match, corpus=True)
    p_match.add_argument("--method", choices=METHOD_CHOICES, default="swati")
    p_match.add_argument("--epochs", type=int, default=1)
    p_match.add_argument("--seed", type=int, help="seed for method 'random'")
    p_match.set_defaults(func=cmd_match)

    p_bench = sub.add_parser("bench", help="benchmark methods across market sizes")
    common(p_bench)
    p_bench.add_argument("--sizes", required=True, help="comma-separated market sizes")
    p_bench.add_argument("--seed", type=int, help="benchmark corpus seed")
    p_bench.add_argument("--repetitions", type=int, default=3)
    p_bench.set_defaults(func=cmd_bench)

    p_verify = sub.add_parser("verify", help="verify a ledger file")
    p_verify.add_argument("ledger", help="path to ledger.bin")
    p_verify.add_argument("--expect-head", help="expected head digest (hex)")
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (EngineError, OSError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
            file=sys.stderr,
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())

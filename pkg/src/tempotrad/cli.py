"""Command-line front end: analyze, validate-k, synth, report."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import shutil
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import DomainError, __version__
from .corpus import CorpusParseError, emit_corpus, parse_corpus, validate_corpus
from .features import build_feature_matrix, mean_bpm, z_standardize
from .report import (
    ReportBundle,
    emit_change_table,
    emit_cluster_table,
    emit_json,
    emit_scatter_svg,
    parse_json,
    run_metadata,
)
from .synth import SpecError, specs_from_json, synth_corpus
from .traditions import (
    MIN_RECORDINGS,
    aggregate_period_change,
    analyze_movement,
    background_association,
    tempo_duration_correlation,
)
from .validity import ValidityPolicy, choose_k, elbow_k, silhouette, wcss_curve, wcss_drops

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2
CORPUS_FILES = ("movements.csv", "recordings.csv", "bars.csv")
FORMATS = ("text", "json", "csv", "svg")
FAILURE_SENTINEL = "FAILED"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    corpus_dir: Path
    out_dir: Path
    k_target: int = 3
    restarts: int = 100
    seed: int = 0
    split_year: int = 1970
    policy: ValidityPolicy = field(default_factory=ValidityPolicy)
    formats: tuple[str, ...] = FORMATS
    jobs: int = 1

    def check(self) -> None:
        if self.restarts < 1:
            raise UsageError("--restarts must be >= 1")
        if self.k_target not in (2, 3):
            raise UsageError("--k must be 2 or 3")
        if not self.formats:
            raise UsageError("--formats must name at least one format")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise UsageError(f"unknown format(s): {', '.join(bad)}")
        if self.jobs < 1:
            raise UsageError("--jobs must be >= 1")


def _read_corpus(corpus_dir: Path):
    for name in CORPUS_FILES:
        if not (corpus_dir / name).is_file():
            raise UsageError(f"missing corpus file: {corpus_dir / name}")
    texts = [(corpus_dir / n).read_text(encoding="utf-8") for n in CORPUS_FILES]
    return parse_corpus(*texts)


def _write_outputs(out_dir: Path, files: dict[str, str]) -> None:
    """Write all files or none: stage in a sibling temp dir, then move."""
    out_dir.mkdir(parents=True, exist_ok=True)
    sentinel = out_dir / FAILURE_SENTINEL
    if sentinel.exists():
        sentinel.unlink()
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out_dir))
    try:
        for name, text in files.items():
            with open(staging / name, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        for name in files:
            os.replace(staging / name, out_dir / name)
    except OSError as exc:
        _mark_failed(out_dir, f"writing outputs failed: {exc}")
        raise
    finally:
        shutil.rmtree(staging, ignore_errors=True)


def _mark_failed(out_dir: Path, message: str) -> None:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / FAILURE_SENTINEL).write_text(message.rstrip() + "\n", encoding="utf-8")
    except OSError:
        pass


def _analyze_one(args):
    corpus, movement_id, k_target, restarts, seed, policy = args
    return analyze_movement(corpus, movement_id, k_target=k_target, restarts=restarts, seed=seed, policy=policy)


def build_bundle(corpus, config: RunConfig, out=None) -> ReportBundle:
    """Run the whole pipeline over every movement with enough recordings."""
    out = out or sys.stdout
    movements = corpus.movement_ids()
    runnable = [m for m in movements if len(corpus.recordings_for(m)) >= MIN_RECORDINGS]
    skipped = [m for m in movements if m not in runnable]
    tasks = [(corpus, m, config.k_target, config.restarts, config.seed, config.policy) for m in runnable]
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(config.jobs, len(tasks))) as pool:
            reports = list(pool.map(_analyze_one, tasks))
    else:
        reports = [_analyze_one(t) for t in tasks]

    for m in skipped:
        print(f"{m}: skipped ({len(corpus.recordings_for(m))} recordings, need {MIN_RECORDINGS})", file=out)
    for r in reports:
        parts = [f"{c.label} {c.n} @ {c.mean_bpm:.1f}" for c in r.clusters]
        empty = f"; empty: {', '.join(sorted(r.empty_labels))}" if r.empty_labels else ""
        print(f"{r.movement_id}: k={r.validity.supported_k} ({', '.join(parts)}){empty}", file=out)

    changes = []
    for m in movements:
        try:
            changes.append(aggregate_period_change(corpus, m, config.split_year))
        except DomainError:
            continue
    correlation = None
    if len(changes) >= 2:
        try:
            correlation = tempo_duration_correlation(changes)
        except DomainError:
            correlation = None

    associations = []
    for category in corpus.background_categories():
        try:
            associations.append(background_association(reports, corpus, category))
        except DomainError:
            continue

    meta = run_metadata(
        config.seed,
        config.restarts,
        config.policy,
        k_target=config.k_target,
        split_year=config.split_year,
        skipped_movements=skipped,
    )
    return ReportBundle(reports, changes, correlation, associations, meta)


def _clusters_csv(bundle: ReportBundle, corpus) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["movement_id", "recording_id", "label", "year", "mean_bpm"])
    for r in sorted(bundle.reports, key=lambda r: r.movement_id):
        for c in r.clusters:
            for rid in c.member_ids:
                rec = corpus.recordings[rid]
                w.writerow([r.movement_id, rid, c.label, rec.year, f"{mean_bpm(rec.bar_bpm):.6f}"])
    return buf.getvalue()


def render_bundle(bundle: ReportBundle, corpus, formats, palette: str = "default") -> dict[str, str]:
    files: dict[str, str] = {}
    if "json" in formats:
        files["report.json"] = emit_json(bundle)
    if "text" in formats:
        for character in ("fast", "slow"):
            if any(r.character == character for r in bundle.reports):
                files[f"tables_{character}.txt"] = emit_cluster_table(bundle.reports, character)
        if bundle.changes:
            files["changes.txt"] = emit_change_table(bundle.changes, bundle.correlation)
    if "csv" in formats and corpus is not None:
        files["clusters.csv"] = _clusters_csv(bundle, corpus)
    if "svg" in formats and corpus is not None:
        for r in bundle.reports:
            files[f"{r.movement_id}.svg"] = emit_scatter_svg(r, corpus, palette=palette)
    return files


def cmd_analyze(config: RunConfig, palette: str = "default", out=None) -> int:
    config.check()
    corpus = _read_corpus(config.corpus_dir)
    findings = validate_corpus(corpus)
    for f in findings.findings:
        print(str(f), file=sys.stderr)
    if not findings.ok:
        _mark_failed(config.out_dir, "corpus validation failed:\n" + "\n".join(map(str, findings.errors)))
        return EXIT_INVALID
    bundle = build_bundle(corpus, config, out=out)
    _write_outputs(config.out_dir, render_bundle(bundle, corpus, config.formats, palette))
    return EXIT_OK


def cmd_validate_k(config: RunConfig, k_min: int, k_max: int, out=None) -> int:
    out = out or sys.stdout
    config.check()
    if not 1 <= k_min < k_max:
        raise UsageError("need 1 <= k_min < k_max")
    corpus = _read_corpus(config.corpus_dir)
    findings = validate_corpus(corpus)
    if not findings.ok:
        for f in findings.errors:
            print(str(f), file=sys.stderr)
        return EXIT_INVALID
    movements = corpus.movement_ids()
    smallest = min(len(corpus.recordings_for(m)) for m in movements)
    if k_max > smallest:
        raise UsageError(f"k_max={k_max} exceeds the smallest movement size ({smallest})")

    result = {}
    for m in movements:
        points = z_standardize(build_feature_matrix(corpus, m)).values
        models: dict = {}
        wcss = wcss_curve(points, (k_min, k_max), restarts=config.restarts, seed=config.seed, models=models)
        sil = {k: silhouette(points, models[k].assignments)[1] for k in models if k >= 2}
        entry = {
            "wcss_by_k": {str(k): v for k, v in wcss.items()},
            "wcss_drops": {str(k): v for k, v in wcss_drops(wcss).items()},
            "mean_silhouette_by_k": {str(k): v for k, v in sil.items()},
            "elbow_k": elbow_k(wcss),
        }
        if 2 in sil and 3 in sil:
            supported, three = choose_k(sil, models[3].sizes(), config.policy)
            entry["supported_k"], entry["three_way_supported"] = supported, three
        result[m] = entry
        print(f"{m}:", file=out)
        print("   k        WCSS  silhouette", file=out)
        for k in range(k_min, k_max + 1):
            s = f"{sil[k]:10.4f}" if k in sil else "       ---"
            print(f"  {k:2d} {wcss[k]:11.4f}  {s}", file=out)
        print(f"  elbow at k={entry['elbow_k']}", file=out)
        if "supported_k" in entry:
            print(f"  supported k={entry['supported_k']}", file=out)

    payload = {
        "meta": run_metadata(config.seed, config.restarts, config.policy, k_range=[k_min, k_max]),
        "movements": result,
    }
    text = json.dumps(payload, sort_keys=True, indent=2, default=float) + "\n"
    _write_outputs(config.out_dir, {"validity.json": text})
    return EXIT_OK


def cmd_synth(spec_path: Path, out_dir: Path, seed: int | None = None) -> int:
    if not spec_path.is_file():
        raise UsageError(f"missing spec file: {spec_path}")
    specs = specs_from_json(spec_path.read_text(encoding="utf-8"))
    if seed is not None:
        specs = [replace(s, seed=seed) for s in specs]
    corpus = synth_corpus(specs)
    files = dict(zip(CORPUS_FILES, emit_corpus(corpus)))
    _write_outputs(out_dir, files)
    print(f"wrote {len(corpus.recordings)} recordings over {len(corpus.movements)} movement(s) to {out_dir}")
    return EXIT_OK


def cmd_report(report_path: Path, out_dir: Path, corpus_dir: Path | None, formats, palette: str = "default") -> int:
    if not report_path.is_file():
        raise UsageError(f"missing report file: {report_path}")
    bundle = parse_json(report_path.read_text(encoding="utf-8"))
    corpus = _read_corpus(corpus_dir) if corpus_dir is not None else None
    files = render_bundle(bundle, corpus, [f for f in formats if f != "json"], palette)
    _write_outputs(out_dir, files)
    return EXIT_OK


def _formats(text: str) -> tuple[str, ...]:
    return tuple(f.strip() for f in text.split(",") if f.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tempotrad", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, corpus_required=True):
        p.add_argument("--corpus", type=Path, required=corpus_required, help="directory holding the three corpus CSVs")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--k", type=int, default=3, help="target number of traditions (2 or 3)")
        p.add_argument("--restarts", type=int, default=100)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--split-year", type=int, default=1970)
        p.add_argument("--min-silhouette", type=float, default=ValidityPolicy.min_silhouette)
        p.add_argument("--min-cluster-size", type=int, default=ValidityPolicy.min_cluster_size)
        p.add_argument("--formats", type=_formats, default=FORMATS, help="comma list of text,json,csv,svg")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
        p.add_argument("--palette", choices=("default", "accessible"), default="default")

    common(sub.add_parser("analyze", help="cluster every movement and write tables, JSON and plots"))
    v = sub.add_parser("validate-k", help="WCSS and silhouette per k for every movement")
    common(v)
    v.add_argument("--k-min", type=int, default=1)
    v.add_argument("--k-max", type=int, default=6)

    s = sub.add_parser("synth", help="write a synthetic corpus from a JSON spec")
    s.add_argument("--spec", type=Path, required=True)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--seed", type=int, default=None, help="override the spec's seed")

    r = sub.add_parser("report", help="re-render tables/plots from an existing report.json")
    r.add_argument("--report", type=Path, required=True)
    r.add_argument("--corpus", type=Path, default=None, help="needed for svg and csv output")
    r.add_argument("--out", type=Path, required=True)
    r.add_argument("--formats", type=_formats, default=("text", "csv", "svg"))
    r.add_argument("--palette", choices=("default", "accessible"), default="default")
    return parser


def _config(args) -> RunConfig:
    return RunConfig(
        corpus_dir=args.corpus,
        out_dir=args.out,
        k_target=args.k,
        restarts=args.restarts,
        seed=args.seed,
        split_year=args.split_year,
        policy=ValidityPolicy(min_silhouette=args.min_silhouette, min_cluster_size=args.min_cluster_size),
        formats=args.formats,
        jobs=args.jobs,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    out_dir = getattr(args, "out", None)
    try:
        if args.command == "analyze":
            return cmd_analyze(_config(args), palette=args.palette)
        if args.command == "validate-k":
            return cmd_validate_k(_config(args), args.k_min, args.k_max)
        if args.command == "synth":
            return cmd_synth(args.spec, args.out, args.seed)
        return cmd_report(args.report, args.out, args.corpus, args.formats, args.palette)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpecError as exc:
        print(f"error: invalid spec at {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CorpusParseError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if out_dir is not None:
            _mark_failed(out_dir, str(exc))
        return EXIT_INVALID
    except Exception as exc:
        if out_dir is not None:
            _mark_failed(out_dir, f"{type(exc).__name__}: {exc}")
        raise


if __name__ == "__main__":
    sys.exit(main())

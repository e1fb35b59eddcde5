"""Command-line front end.

``mdpattern <stats|extract|split|compare|matrix|recombine|merge|verify>``

Exit codes: 0 success, 1 usage error, 2 parse failure, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import archive, md_reader, pattern, rtl, similarity
from .manifest import ManifestEntry, ManifestError, load_manifest

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_VERIFY = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print("%s: error: %s" % (self.prog, message), file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class CliError(Exception):
    def __init__(self, msg, code=EXIT_USAGE):
        super().__init__(msg)
        self.code = code


def _apply_overrides(entries, args):
    if getattr(args, "no_includes", False):
        for e in entries:
            e.resolve_includes = False
    heads = getattr(args, "heads", None)
    if heads:
        head_set = frozenset(h for h in heads.split(",") if h)
        if not head_set:
            raise CliError("--heads needs a non-empty list")
        for e in entries:
            e.considered_heads = head_set
    return entries


def _analyze_entry(entry: ManifestEntry, table, args):
    try:
        forms = md_reader.load_md_file(entry.path, entry.resolve_includes,
                                       entry.considered_heads)
    except (OSError, md_reader.MdReaderError) as exc:
        raise CliError("%s: %s" % (entry.name, exc), EXIT_PARSE)
    except Exception as exc:
        from .sexpr import SExprError

        if isinstance(exc, SExprError):
            raise CliError("%s: %s" % (entry.name, exc), EXIT_PARSE)
        raise
    return pattern.analyze(
        forms, table, entry.name,
        include_bin_arith=not getattr(args, "no_bin_arith", False),
        count_subpatterns=getattr(args, "count_subpatterns", False),
    )


def _analyze_manifest(entries, table, args):
    with ThreadPoolExecutor(max_workers=min(8, max(1, len(entries)))) as pool:
        return list(pool.map(lambda e: _analyze_entry(e, table, args), entries))


def _load_entries(args, names=None):
    try:
        entries = load_manifest(args.manifest)
    except (OSError, ManifestError) as exc:
        raise CliError(str(exc))
    entries = _apply_overrides(entries, args)
    if names:
        by_name = {e.name: e for e in entries}
        missing = [n for n in names if n not in by_name]
        if missing:
            raise CliError("not in manifest: %s" % ", ".join(missing))
        entries = [by_name[n] for n in names]
    return entries


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def _fmt_table(headers, rows):
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    def fmt(row):
        return "  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
    sep = "  ".join("-" * w for w in widths)
    return "\n".join([fmt(headers), sep] + [fmt(r) for r in rows]) + "\n"


# ---------------------------------------------------------------------------
# Subcommands


def cmd_stats(args):
    table = rtl.RtxCodeTable.load()
    analyses = _analyze_manifest(_load_entries(args), table, args)
    rows = []
    data = []
    for a in analyses:
        e, p = a.expr_count, a.store.pattern_count
        avg = round(e / p, 2) if p else 0.0
        rows.append([a.arch_name, str(e), str(p), "%.2f" % avg])
        item = {"arch": a.arch_name, "expressions": e, "patterns": p, "average": avg}
        if args.count_subpatterns:
            item["unique_subpatterns"] = len(a.diagnostics.get("subpatterns", {}))
        if a.diagnostics["unknown_codes"]:
            item["unknown_codes"] = a.diagnostics["unknown_codes"]
        data.append(item)
    if args.format == "json":
        _emit(json.dumps({"table": "stats", "rows": data}, indent=2) + "\n", args.out)
    else:
        _emit(_fmt_table(["Arch", "Expr (E)", "Patterns (P)", "E/P"], rows), args.out)
    return EXIT_OK


def cmd_extract(args):
    table = rtl.RtxCodeTable.load()
    entries = _load_entries(args, [args.arch])
    analysis = _analyze_manifest(entries, table, args)[0]
    os.makedirs(args.out_dir, exist_ok=True)
    ppath = os.path.join(args.out_dir, "%s.patterns" % analysis.arch_name)
    mpath = os.path.join(args.out_dir, "%s.params" % analysis.arch_name)
    with open(ppath, "w", encoding="utf-8") as fh:
        fh.write(archive.write_pattern_file(analysis))
    with open(mpath, "w", encoding="utf-8") as fh:
        fh.write(archive.write_param_file(analysis))
    print("wrote %s and %s" % (ppath, mpath))
    return EXIT_OK


def cmd_compare(args):
    table = rtl.RtxCodeTable.load()
    entries = _load_entries(args, [args.arch_a, args.arch_b])
    a, b = _analyze_manifest(entries, table, args)
    rep = similarity.expression_similarity(a, b, args.expand_iterators)
    cov_ab = similarity.target_coverage(a, b, args.expand_iterators)
    cov_ba = similarity.target_coverage(b, a, args.expand_iterators)
    data = {
        "arch_a": rep.arch_a,
        "arch_b": rep.arch_b,
        "common_patterns": rep.common_pattern_count,
        "pattern_similarity_pct": round(rep.pattern_similarity_pct, 2),
        "covered_expr_a": rep.covered_expr_a,
        "covered_expr_b": rep.covered_expr_b,
        "expression_similarity_pct": round(rep.expression_similarity_pct, 2),
        "coverage_a_to_b": {"covered": cov_ab[0], "pct": round(cov_ab[1], 2)},
        "coverage_b_to_a": {"covered": cov_ba[0], "pct": round(cov_ba[1], 2)},
    }
    if args.format == "json":
        _emit(json.dumps(data, indent=2) + "\n", args.out)
    else:
        lines = [
            "%s vs %s" % (rep.arch_a, rep.arch_b),
            "  common patterns:        %d (%.2f%%)"
            % (rep.common_pattern_count, rep.pattern_similarity_pct),
            "  covered expressions:    %d + %d (%.2f%%)"
            % (rep.covered_expr_a, rep.covered_expr_b, rep.expression_similarity_pct),
            "  coverage %s -> %s:  %d (%.2f%%)"
            % (rep.arch_a, rep.arch_b, cov_ab[0], cov_ab[1]),
            "  coverage %s -> %s:  %d (%.2f%%)"
            % (rep.arch_b, rep.arch_a, cov_ba[0], cov_ba[1]),
        ]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_matrix(args):
    table = rtl.RtxCodeTable.load()
    analyses = _analyze_manifest(_load_entries(args), table, args)
    if len(analyses) < 2:
        raise CliError("matrix needs at least two architectures")
    rep = similarity.similarity_matrix(analyses, args.metric, args.expand_iterators)
    if args.format == "json":
        data = {
            "table": rep.metric,
            "archs": rep.arch_names,
            "cells": [
                {"row": c.row, "col": c.col, "count": c.count, "pct": round(c.pct, 2)}
                for c in rep.cells
            ],
        }
        _emit(json.dumps(data, indent=2) + "\n", args.out)
    else:
        rows = [[c.row, c.col, str(c.count), "%.2f" % c.pct] for c in rep.cells]
        head = ["Source", "Target"] if rep.metric == "coverage" else ["Arch A", "Arch B"]
        _emit(_fmt_table(head + ["Count", "Pct"], rows), args.out)
    return EXIT_OK


def cmd_recombine(args):
    try:
        with open(args.patterns, "r", encoding="utf-8") as fh:
            ptext = fh.read()
        with open(args.params, "r", encoding="utf-8") as fh:
            mtext = fh.read()
        store, bindings, _ = archive.read_archives(ptext, mtext)
        forms = archive.recombine(store, bindings)
    except (OSError, archive.ArchiveError, pattern.PatternError) as exc:
        raise CliError(str(exc), EXIT_PARSE)
    _emit("\n\n".join(f.form_text for f in forms) + ("\n" if forms else ""), args.out)
    return EXIT_OK


def cmd_merge(args):
    try:
        pfiles = []
        for path in args.patterns:
            with open(path, "r", encoding="utf-8") as fh:
                pfiles.append(archive.read_pattern_file(fh.read()))
        merged = archive.merge(pfiles, args.min_count)
    except (OSError, archive.ArchiveError) as exc:
        raise CliError(str(exc), EXIT_PARSE)
    _emit(archive.render_pattern_file(merged), args.out)
    return EXIT_OK


def cmd_verify(args):
    table = rtl.RtxCodeTable.load()
    entries = _load_entries(args, args.archs or None)
    analyses = _analyze_manifest(entries, table, args)
    failed = False
    for a in analyses:
        missing, extra, changed = archive.verify_roundtrip(a)
        ok = missing == extra == changed == 0
        failed = failed or not ok
        print("%s: %d missing / %d extra / %d changed%s"
              % (a.arch_name, missing, extra, changed, "" if ok else "  FAIL"))
    return EXIT_VERIFY if failed else EXIT_OK


# ---------------------------------------------------------------------------


def _add_common(p, manifest=True):
    if manifest:
        p.add_argument("--manifest", required=True, help="corpus manifest file")
        p.add_argument("--no-includes", action="store_true",
                       help="do not resolve (include ...) directives")
        p.add_argument("--heads", help="comma-separated considered define_* heads")
        p.add_argument("--no-bin-arith", action="store_true",
                       help="abstract non-commutative arithmetic operators too")
        p.add_argument("--count-subpatterns", action="store_true",
                       help="also count sub-patterns (diagnostic)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write the report to a file instead of stdout")


def build_parser():
    parser = _Parser(prog="mdpattern",
                     description="Extract and compare RTL patterns from "
                                 "machine description files.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="per-architecture expression/pattern counts")
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    for alias in ("extract", "split"):
        p = sub.add_parser(alias, help="write pattern and parameter archives")
        p.add_argument("arch")
        p.add_argument("--out-dir", required=True)
        _add_common(p)
        p.set_defaults(func=cmd_extract)

    p = sub.add_parser("compare", help="all three metrics for one pair")
    p.add_argument("arch_a")
    p.add_argument("arch_b")
    p.add_argument("--expand-iterators", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("matrix", help="all-pairs similarity matrix")
    p.add_argument("--metric", choices=("pattern", "expr", "coverage"),
                   default="pattern")
    p.add_argument("--expand-iterators", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("recombine", help="regenerate MD forms from archives")
    p.add_argument("--patterns", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_recombine)

    p = sub.add_parser("merge", help="merge pattern archives with a threshold")
    p.add_argument("patterns", nargs="+")
    p.add_argument("--min-count", type=int, default=0,
                   help="keep patterns occurring strictly more often than this")
    p.add_argument("--out")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("verify", help="split+recombine round-trip check")
    p.add_argument("archs", nargs="*")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except CliError as exc:
        print("mdpattern: %s" % exc, file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

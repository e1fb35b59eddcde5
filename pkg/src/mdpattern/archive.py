"""Text archives: pattern files, parameter files, recombination, merging.

Pattern file: ``#``-prefixed header lines (arch, total_templates, one line
per iterator definition) then one ``<id> <height> <count> <pattern>`` line
per unique pattern, sorted by (height, id).

Parameter file: one record per analyzed expression,
``<pattern-id> <form-kind> <form-name> $p=<value> ...`` with values
percent-escaped so a record stays on one line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from urllib.parse import unquote

from . import rtl, sexpr
from .pattern import (ArityMismatch, MdAnalysis, ParamBinding, PatternStore,
                      RtlPattern, canonicalize, substitute)
from .sexpr import SExprError, Symbol


class ArchiveError(Exception):
    pass


class BadHeader(ArchiveError):
    pass


class MalformedEntry(ArchiveError):
    def __init__(self, lineno, line):
        self.lineno = lineno
        super().__init__("line %d: malformed entry: %r" % (lineno, line))


class DanglingPatternId(ArchiveError):
    def __init__(self, pattern_id, lineno=None):
        self.pattern_id = pattern_id
        where = "" if lineno is None else " (line %d)" % lineno
        super().__init__("parameter record references unknown pattern id %d%s"
                         % (pattern_id, where))


def escape_value(s: str) -> str:
    """Reversible escaping for space, %, newline and tab."""
    return (s.replace("%", "%25").replace(" ", "%20")
             .replace("\n", "%0A").replace("\t", "%09"))


def unescape_value(s: str) -> str:
    return unquote(s)


@dataclass
class PatternFile:
    arch: str
    total_templates: int
    iterators: list = field(default_factory=list)
    entries: list = field(default_factory=list)  # (id, height, count, text)


# ---------------------------------------------------------------------------
# Writing


def pattern_file_of(analysis: MdAnalysis) -> PatternFile:
    entries = [
        (e.pattern_id, e.pattern.height, e.count, e.pattern.canonical_text)
        for e in analysis.store.entries()
    ]
    entries.sort(key=lambda t: (t[1], t[0]))
    return PatternFile(analysis.arch_name, analysis.store.total_templates,
                       list(analysis.iterators), entries)


def render_pattern_file(pf: PatternFile) -> str:
    lines = ["# arch: %s" % pf.arch, "# total_templates: %d" % pf.total_templates]
    lines.extend("# iterator: %s" % it for it in pf.iterators)
    lines.extend("%d %d %d %s" % entry for entry in pf.entries)
    return "\n".join(lines) + "\n"


def write_pattern_file(analysis: MdAnalysis) -> str:
    return render_pattern_file(pattern_file_of(analysis))


def write_param_file(analysis: MdAnalysis) -> str:
    lines = []
    for b in analysis.bindings:
        fields = [str(b.pattern_id), b.form_kind, escape_value(b.form_name)]
        fields.extend("%s=%s" % (p, escape_value(v)) for p, v in b.assignments)
        lines.append(" ".join(fields))
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Reading


_ENTRY_RE = re.compile(r"(\d+) (\d+) (\d+) (.+)")


def read_pattern_file(text: str) -> PatternFile:
    arch = None
    total = None
    iterators = []
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("arch:"):
                arch = body[len("arch:"):].strip()
            elif body.startswith("total_templates:"):
                try:
                    total = int(body[len("total_templates:"):].strip())
                except ValueError:
                    raise BadHeader("line %d: bad total_templates" % lineno)
            elif body.startswith("iterator:"):
                iterators.append(body[len("iterator:"):].strip())
            else:
                raise BadHeader("line %d: unknown header line %r" % (lineno, line))
            continue
        m = _ENTRY_RE.fullmatch(line)
        if not m:
            raise MalformedEntry(lineno, line)
        entries.append((int(m.group(1)), int(m.group(2)), int(m.group(3)), m.group(4)))
    if arch is None or total is None:
        raise BadHeader("missing arch/total_templates header")
    return PatternFile(arch, total, iterators, entries)


def _tree_from_canonical(text: str) -> rtl.RtlExpr:
    """Rebuild a pattern tree, turning $argN symbols back into holes."""
    expr = sexpr.parse_one(text)
    node = rtl._build_arg(expr)

    def fix(n):
        if n.payload is not None and isinstance(n.payload, Symbol) \
                and n.payload.text.startswith("$arg"):
            return rtl.RtlExpr(param=n.payload.text)
        n.children = [fix(c) for c in n.children]
        return n

    return fix(node)


def read_archives(pattern_text: str, param_text: str):
    """Inverse of the write pair: rebuild the store and bindings."""
    pf = read_pattern_file(pattern_text)
    store = PatternStore()
    for pid, height, count, text in pf.entries:
        try:
            tree = _tree_from_canonical(text)
        except SExprError as exc:
            raise MalformedEntry(0, "pattern %d: %s" % (pid, exc))
        store.insert_entry(pid, RtlPattern(tree, height, text), count)
    known = {pid for pid, _, _, _ in pf.entries}
    bindings = []
    for lineno, raw in enumerate(param_text.splitlines(), 1):
        line = raw.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split(" ")
        if len(fields) < 3 or not fields[0].isdigit():
            raise MalformedEntry(lineno, line)
        pid = int(fields[0])
        if pid not in known:
            raise DanglingPatternId(pid, lineno)
        assignments = []
        for f in fields[3:]:
            if not f:
                continue
            if "=" not in f or not f.startswith("$"):
                raise MalformedEntry(lineno, line)
            name, _, value = f.partition("=")
            assignments.append((name, unescape_value(value)))
        bindings.append(ParamBinding(pid, assignments, fields[1],
                                     unescape_value(fields[2])))
    return store, bindings, pf


# ---------------------------------------------------------------------------
# Recombination and verification


@dataclass
class RegeneratedForm:
    form_kind: str
    form_name: str
    template_text: str
    form_text: str


def recombine(store: PatternStore, bindings) -> list[RegeneratedForm]:
    """Substitute each binding into its pattern; order follows the bindings.

    Output forms are skeletons: the template vector is exact, condition and
    output-template fields are placeholders.
    """
    out = []
    for b in bindings:
        try:
            entry = store.get(b.pattern_id)
        except KeyError:
            raise DanglingPatternId(b.pattern_id)
        template = substitute(entry.pattern.tree, dict(b.assignments))
        name = '"%s"' % b.form_name if b.form_name else '""'
        form = "(%s %s\n  %s\n  \"\"\n  \"\")" % (b.form_kind, name, template)
        out.append(RegeneratedForm(b.form_kind, b.form_name, template, form))
    return out


def normalize_ws(text: str) -> str:
    """Collapse whitespace runs; trim spaces next to parens/brackets."""
    text = re.sub(r"\s+", " ", text.strip())
    text = re.sub(r"([(\[]) ", r"\1", text)
    text = re.sub(r" ([)\]])", r"\1", text)
    return text


def verify_roundtrip(analysis: MdAnalysis) -> tuple[int, int, int]:
    """Split, recombine, and compare against the analyzed expressions.

    Returns (missing, extra, changed) counts; all zero on success.
    """
    store, bindings, _ = read_archives(
        write_pattern_file(analysis), write_param_file(analysis)
    )
    regen = recombine(store, bindings)
    orig = [normalize_ws(t) for t in analysis.source_texts]
    got = [normalize_ws(r.template_text) for r in regen]
    changed = sum(1 for o, g in zip(orig, got) if o != g)
    missing = max(0, len(orig) - len(got))
    extra = max(0, len(got) - len(orig))
    return missing, extra, changed


# ---------------------------------------------------------------------------
# Merging


def merge(pattern_files, min_count: int) -> PatternFile:
    """Union pattern files; keep patterns occurring strictly more than
    min_count times in total; ids are reassigned in (height, text) order."""
    counts: dict[str, int] = {}
    heights: dict[str, int] = {}
    iterators = []
    seen_iter = set()
    arch_names = []
    total = 0
    for pf in pattern_files:
        if pf.arch:
            arch_names.append(pf.arch)
        total += pf.total_templates
        for it in pf.iterators:
            if it not in seen_iter:
                seen_iter.add(it)
                iterators.append(it)
        for _, height, count, text in pf.entries:
            counts[text] = counts.get(text, 0) + count
            heights[text] = height
    kept = sorted(
        (t for t, c in counts.items() if c > min_count),
        key=lambda t: (heights[t], t),
    )
    entries = [(i, heights[t], counts[t], t) for i, t in enumerate(kept)]
    return PatternFile(",".join(arch_names), total, iterators, entries)

"""Read machine description files into classified top-level forms."""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field

from . import sexpr
from .sexpr import Loc, SExpr, SList, StringLit, SVector, Symbol

#: define_* heads whose first bracket vector is an RTL template.
DEFAULT_CONSIDERED_HEADS = frozenset(
    {"define_insn", "define_expand", "define_insn_and_split", "define_split"}
)

ITERATOR_HEADS = frozenset(
    {"define_mode_iterator", "define_code_iterator", "define_mode_attr", "define_code_attr"}
)


class MdReaderError(Exception):
    pass


class MissingInclude(MdReaderError):
    def __init__(self, path):
        self.path = path
        super().__init__("included file not found: %s" % path)


class IncludeCycle(MdReaderError):
    def __init__(self, chain):
        self.chain = list(chain)
        super().__init__("include cycle: %s" % " -> ".join(self.chain))


class MissingTemplateVector(MdReaderError):
    pass


class FormKind(enum.Enum):
    CONSIDERED = "considered"
    ITERATOR = "iterator"
    INCLUDE = "include"
    IGNORED = "ignored"


@dataclass
class TopLevelForm:
    kind: FormKind
    head: str
    name: str  # first string argument of the define, '' if absent
    body: SList
    origin: Loc | None = field(default=None, compare=False)


def classify(body: SList, considered_heads=DEFAULT_CONSIDERED_HEADS) -> TopLevelForm:
    head = body.items[0].text if body.items and isinstance(body.items[0], Symbol) else ""
    name = ""
    if len(body.items) > 1 and isinstance(body.items[1], StringLit):
        name = body.items[1].text
    if head in considered_heads:
        kind = FormKind.CONSIDERED
    elif head in ITERATOR_HEADS:
        kind = FormKind.ITERATOR
        if not name and len(body.items) > 1 and isinstance(body.items[1], Symbol):
            name = body.items[1].text  # iterator names are bare symbols
    elif head == "include":
        kind = FormKind.INCLUDE
    else:
        kind = FormKind.IGNORED
    return TopLevelForm(kind, head, name, body, body.loc)


def parse_md(source: str, origin: str | None = None,
             considered_heads=DEFAULT_CONSIDERED_HEADS) -> list[TopLevelForm]:
    forms = []
    for expr in sexpr.parse_text(source, origin):
        if not isinstance(expr, SList):
            loc = expr.loc or Loc(origin, 0, 0)
            raise sexpr.UnexpectedToken(
                "top-level form is not a list", loc.filename, loc.line, loc.col
            )
        forms.append(classify(expr, considered_heads))
    return forms


def _include_target(form: TopLevelForm) -> str:
    for item in form.body.items[1:]:
        if isinstance(item, StringLit):
            return item.text
    raise MissingInclude("<missing path argument>")


def resolve_includes(forms, base_dir, enabled=True,
                     considered_heads=DEFAULT_CONSIDERED_HEADS, _stack=None):
    """Splice included files in place of their include forms, recursively.

    With ``enabled`` false the include forms are retained as Ignored so
    downstream counts are unaffected.
    """
    _stack = _stack or []
    out = []
    for form in forms:
        if form.kind is not FormKind.INCLUDE:
            out.append(form)
            continue
        if not enabled:
            out.append(TopLevelForm(FormKind.IGNORED, form.head, form.name,
                                    form.body, form.origin))
            continue
        path = os.path.normpath(os.path.join(base_dir, _include_target(form)))
        if path in _stack:
            raise IncludeCycle(_stack + [path])
        if not os.path.isfile(path):
            raise MissingInclude(path)
        with open(path, "r", encoding="latin-1") as fh:
            sub = parse_md(fh.read(), path, considered_heads)
        out.extend(resolve_includes(sub, os.path.dirname(path), enabled,
                                    considered_heads, _stack + [path]))
    return out


def load_md_file(path, resolve=True, considered_heads=DEFAULT_CONSIDERED_HEADS):
    """Parse one root MD file, optionally resolving its includes."""
    with open(path, "r", encoding="latin-1") as fh:
        forms = parse_md(fh.read(), str(path), considered_heads)
    return resolve_includes(forms, os.path.dirname(os.path.abspath(path)),
                            resolve, considered_heads, [os.path.normpath(os.path.abspath(path))])


def extract_template_vector(form: TopLevelForm) -> SVector:
    """Return the RTL template: the first bracket vector of a considered form.

    Condition strings, output templates and attribute vectors that follow
    it are deliberately not returned.
    """
    for item in form.body.items[1:]:
        if isinstance(item, SVector):
            return item
    loc = form.origin
    raise MissingTemplateVector(
        "%s %r at %s has no template vector"
        % (form.head, form.name, "%s:%s" % (loc.filename, loc.line) if loc else "?")
    )

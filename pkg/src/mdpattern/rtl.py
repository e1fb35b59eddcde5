"""RTX operator taxonomy and typed RTL expression trees."""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field

from . import sexpr
from .sexpr import SExpr, SList, SVector, Symbol


class RtlError(Exception):
    pass


class NotAList(RtlError):
    pass


class EmptyList(RtlError):
    pass


class RtxClass(enum.Enum):
    OBJ = "obj"
    CONST_OBJ = "const_obj"
    COMPARE = "compare"
    COMM_COMPARE = "comm_compare"
    UNARY = "unary"
    COMM_ARITH = "comm_arith"
    BIN_ARITH = "bin_arith"
    BITFIELD_OPS = "bitfield_ops"
    TERNARY = "ternary"
    INSN = "insn"
    MATCH = "match"
    AUTOINC = "autoinc"
    EXTRA = "extra"


_BY_NAME = {c.value: c for c in RtxClass}

#: Operators that change machine state; always retained in patterns.
SIDE_EFFECT_CODES = frozenset(
    {
        "set", "return", "call", "clobber", "use", "parallel", "cond_exec",
        "sequence", "asm_input", "unspec", "unspec_volatile", "addr_vec",
        "addr_diff_vec",
    }
)


def _default_entries():
    groups = {
        RtxClass.OBJ: [
            "reg", "mem", "symbol_ref", "label_ref", "pc", "cc0", "scratch",
            "strict_low_part", "concat", "concatn",
        ],
        RtxClass.CONST_OBJ: [
            "const_int", "const_double", "const_fixed", "const_vector",
            "const_string", "const", "high",
        ],
        RtxClass.COMPARE: [
            "gt", "gtu", "lt", "ltu", "ge", "geu", "le", "leu",
            "unlt", "unle", "ungt", "unge",
        ],
        RtxClass.COMM_COMPARE: ["eq", "ne", "uneq", "ltgt", "ordered", "unordered"],
        RtxClass.UNARY: [
            "neg", "not", "abs", "sqrt", "bswap", "ffs", "clz", "ctz",
            "popcount", "parity", "clrsb", "sign_extend", "zero_extend",
            "truncate", "float_extend", "float_truncate", "float",
            "unsigned_float", "fix", "unsigned_fix", "ss_neg", "us_neg",
            "ss_abs", "ss_truncate", "us_truncate", "fract_convert",
            "sat_fract", "unsigned_sat_fract", "vec_duplicate",
        ],
        RtxClass.COMM_ARITH: [
            "plus", "mult", "and", "ior", "xor", "smin", "smax", "umin",
            "umax", "ss_plus", "us_plus", "ss_mult", "us_mult",
        ],
        RtxClass.BIN_ARITH: [
            "minus", "div", "udiv", "mod", "umod", "ashift", "ashiftrt",
            "lshiftrt", "rotate", "rotatert", "compare", "ss_minus",
            "us_minus", "ss_div", "us_div", "ss_ashift", "us_ashift",
            "vec_select", "vec_concat",
        ],
        RtxClass.BITFIELD_OPS: ["zero_extract", "sign_extract"],
        RtxClass.TERNARY: ["if_then_else", "vec_merge", "fma"],
        RtxClass.INSN: ["insn", "jump_insn", "call_insn"],
        RtxClass.MATCH: [
            "match_operand", "match_dup", "match_scratch", "match_operator",
            "match_parallel", "match_op_dup", "match_par_dup", "match_code",
            "match_test",
        ],
        RtxClass.AUTOINC: [
            "post_inc", "pre_inc", "post_dec", "pre_dec", "post_modify",
            "pre_modify",
        ],
        RtxClass.EXTRA: [
            "subreg", "note", "barrier", "code_label", "trap_if", "prefetch",
            "eh_return", "simple_return",
        ],
    }
    entries = {}
    for cls, codes in groups.items():
        for code in codes:
            entries[code] = (cls, False)
    for code in SIDE_EFFECT_CODES:
        entries[code] = (RtxClass.EXTRA, True)
    return entries


class RtxCodeTable:
    """Immutable code -> (class, side-effect) lookup.

    An optional override file (one ``code class yes|no`` line per entry,
    ``#`` comments) is merged onto the built-in defaults so new codes can
    be added without touching the source.
    """

    def __init__(self, entries):
        self._entries = dict(entries)

    @classmethod
    def default(cls):
        return cls(_default_entries())

    @classmethod
    def from_file(cls, path):
        entries = _default_entries()
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) != 3 or parts[1] not in _BY_NAME or parts[2] not in ("yes", "no"):
                    raise RtlError("%s:%d: bad code-table line: %r" % (path, lineno, raw.rstrip()))
                entries[parts[0]] = (_BY_NAME[parts[1]], parts[2] == "yes")
        return cls(entries)

    @classmethod
    def load(cls):
        """Default table, or the override named by $MDPATTERN_CODE_TABLE."""
        override = os.environ.get("MDPATTERN_CODE_TABLE")
        return cls.from_file(override) if override else cls.default()

    def rtx_class(self, code):
        """Class of a code, or None for an unknown code."""
        entry = self._entries.get(code)
        return entry[0] if entry else None

    def is_side_effect(self, code):
        entry = self._entries.get(code)
        return bool(entry and entry[1])

    def codes(self):
        return iter(self._entries)


def rtx_class(code, table, iterators=frozenset()):
    """Lookup with per-file code-iterator aliases resolving to EXTRA."""
    if code in iterators:
        return RtxClass.EXTRA
    return table.rtx_class(code)


#: Classes whose operators stay in patterns (machine-independent meaning).
PATTERN_CLASSES = frozenset(
    {
        RtxClass.COMPARE, RtxClass.COMM_COMPARE, RtxClass.UNARY,
        RtxClass.COMM_ARITH, RtxClass.BIN_ARITH, RtxClass.BITFIELD_OPS,
        RtxClass.TERNARY, RtxClass.AUTOINC,
    }
)


def is_pattern_operator(code, table, iterators=frozenset(), include_bin_arith=True):
    """True when an operator is retained in a pattern rather than abstracted."""
    if code in iterators:
        return True
    if code in SIDE_EFFECT_CODES:
        return True
    cls = table.rtx_class(code)
    if cls is None:
        return False
    if cls is RtxClass.BIN_ARITH and not include_bin_arith:
        return False
    return cls in PATTERN_CLASSES


@dataclass(eq=True)
class RtlExpr:
    """One node of an RTL tree.

    Exactly one shape holds per node: an operator (code set, children and
    scalar arguments in order), a scalar leaf (payload set), a vector
    group (is_vector), or a parameter hole (param set, pattern trees only).
    """

    code: str | None = None
    mode: str | None = None  # text after ':', kept verbatim; '$modeN' in patterns
    children: list = field(default_factory=list)
    payload: SExpr | None = None
    is_vector: bool = False
    param: str | None = None


def _build_arg(arg):
    if isinstance(arg, SList):
        return build_rtl_tree(arg)
    if isinstance(arg, SVector):
        return RtlExpr(is_vector=True, children=[_build_arg(x) for x in arg.items])
    return RtlExpr(payload=arg)


def build_rtl_tree(s: SExpr) -> RtlExpr:
    """Convert a template s-expression into an RtlExpr tree.

    The head symbol is split at its first ':' into code and mode; the mode
    text (SI, GPR, '<mode>', ...) is kept verbatim.
    """
    if not isinstance(s, SList):
        raise NotAList("RTL expression must be a list: %s" % sexpr.serialize(s))
    if not s.items:
        raise EmptyList("empty RTL expression")
    head = s.items[0]
    if not isinstance(head, Symbol):
        raise NotAList("RTL head is not a symbol: %s" % sexpr.serialize(s))
    code, _, mode = head.text.partition(":")
    return RtlExpr(
        code=code,
        mode=mode or None,
        children=[_build_arg(a) for a in s.items[1:]],
    )


def build_template_tree(vec: SVector) -> RtlExpr:
    """Wrap a whole template vector so multi-element templates are one tree."""
    return RtlExpr(is_vector=True, children=[_build_arg(x) for x in vec.items])


def height(e: RtlExpr) -> int:
    """Longest root-to-leaf node count.

    Vector groups are transparent (members count as direct children) and
    scalar argument payloads are part of their owning node, not below it.
    """
    if e.payload is not None:
        return 0
    if e.is_vector:
        return max((height(c) for c in e.children), default=0)
    if not e.children:
        return 1
    return 1 + max((height(c) for c in e.children), default=0)


def rtl_text(e: RtlExpr) -> str:
    """Render back to MD syntax (single spaces); inverse of tree building."""
    if e.param is not None:
        return e.param
    if e.payload is not None:
        return sexpr.serialize(e.payload)
    if e.is_vector:
        return "[%s]" % " ".join(rtl_text(c) for c in e.children)
    head = e.code if e.mode is None else "%s:%s" % (e.code, e.mode)
    if e.children:
        return "(%s %s)" % (head, " ".join(rtl_text(c) for c in e.children))
    return "(%s)" % head

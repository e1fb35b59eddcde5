import random
from pathlib import Path

import pytest

from mdpattern import md_reader, pattern
from mdpattern.rtl import RtxCodeTable

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def table():
    return RtxCodeTable.default()


def analyze_file(path, name, table, **kw):
    forms = md_reader.load_md_file(str(path))
    return pattern.analyze(forms, table, name, **kw)


# ---------------------------------------------------------------------------
# Random corpus generator used by the store-oracle checks

_BIN_OPS = ["plus", "minus", "and", "ior", "xor", "mult", "div", "ashift",
            "lshiftrt", "smin", "smax", "eq", "lt", "geu"]
_UN_OPS = ["neg", "not", "abs", "sign_extend", "zero_extend", "sqrt"]
_MODES = ["SI", "DI", "QI", "HI", "SF"]
_PREDS = ["register_operand", "arith_operand", "general_operand", "memory_operand"]


def _rand_leaf(rng):
    r = rng.random()
    mode = rng.choice(_MODES)
    if r < 0.55:
        return '(match_operand:%s %d "%s")' % (mode, rng.randrange(4), rng.choice(_PREDS))
    if r < 0.8:
        return "(reg:%s %d)" % (mode, rng.randrange(16))
    if r < 0.9:
        return "(const_int %d)" % rng.randint(-4, 4)
    return "(mem:%s (reg:SI %d))" % (mode, rng.randrange(16))


def _rand_expr(rng, depth):
    if depth <= 1 or rng.random() < 0.2:
        return _rand_leaf(rng)
    mode = rng.choice(_MODES)
    if rng.random() < 0.6:
        op = rng.choice(_BIN_OPS)
        return "(%s:%s %s %s)" % (op, mode, _rand_expr(rng, depth - 1),
                                  _rand_expr(rng, depth - 1))
    op = rng.choice(_UN_OPS)
    return "(%s:%s %s)" % (op, mode, _rand_expr(rng, depth - 1))


def random_corpus(seed, max_exprs=20, max_depth=4):
    """An MD source of up to max_exprs define_insn forms, depth-bounded."""
    rng = random.Random(seed)
    forms = []
    for i in range(rng.randint(1, max_exprs)):
        if rng.random() < 0.15:
            body = "(parallel [(set %s %s) (clobber (reg:CC 24))])" % (
                _rand_leaf(rng), _rand_expr(rng, max_depth - 2))
        else:
            body = "(set %s %s)" % (_rand_leaf(rng), _rand_expr(rng, max_depth - 1))
        forms.append('(define_insn "r%d"\n  [%s]\n  ""\n  "op%d")' % (i, body, i))
    return "\n\n".join(forms) + "\n"

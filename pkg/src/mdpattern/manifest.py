"""Corpus manifests: named architectures mapped to root MD files.

Line format: ``name = path [no-includes] [heads=h1,h2,...]``; ``#`` starts
a comment; paths are resolved relative to the manifest file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .md_reader import DEFAULT_CONSIDERED_HEADS


class ManifestError(Exception):
    pass


@dataclass
class ManifestEntry:
    name: str
    path: str
    resolve_includes: bool = True
    considered_heads: frozenset = DEFAULT_CONSIDERED_HEADS


def parse_manifest(text: str, base_dir: str = ".") -> list[ManifestEntry]:
    entries = []
    names = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ManifestError("line %d: expected 'name = path'" % lineno)
        name, _, rest = line.partition("=")
        name = name.strip()
        parts = rest.split()
        if not name or not parts:
            raise ManifestError("line %d: expected 'name = path'" % lineno)
        if name in names:
            raise ManifestError("line %d: duplicate architecture %r" % (lineno, name))
        names.add(name)
        entry = ManifestEntry(name, os.path.normpath(os.path.join(base_dir, parts[0])))
        for flag in parts[1:]:
            if flag == "no-includes":
                entry.resolve_includes = False
            elif flag.startswith("heads="):
                heads = frozenset(h for h in flag[len("heads="):].split(",") if h)
                if not heads:
                    raise ManifestError("line %d: empty heads= list" % lineno)
                entry.considered_heads = heads
            else:
                raise ManifestError("line %d: unknown flag %r" % (lineno, flag))
        entries.append(entry)
    return entries


def load_manifest(path: str) -> list[ManifestEntry]:
    with open(path, "r", encoding="utf-8") as fh:
        entries = parse_manifest(fh.read(), os.path.dirname(os.path.abspath(path)))
    for e in entries:
        if not os.path.isfile(e.path):
            raise ManifestError("%s: no such MD file: %s" % (e.name, e.path))
    return entries

"""Reading and writing code files.

A code file is a JSON document::

    {"version": 1, "d": 2, "q": 2,
     "vectors": [[0, 0], [1, 0], ...],
     "matchings": [{"direction": 0, "tuples": [[0, 1], [2, 3]]}, ...]}

Coordinates are rendered with 17 significant digits so every float64
survives a round trip.  Parse errors carry the 1-based line they refer to.
"""

from __future__ import annotations

import json
import math
from json.decoder import scanstring
from pathlib import Path

import numpy as np

from .core import CodeConfig
from .errors import InvalidCodeError

FORMAT_VERSION = 1
SUFFIX = ".aldc.json"


class CodeFileError(InvalidCodeError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class MalformedDocumentError(CodeFileError):
    pass


class DimensionMismatchError(CodeFileError):
    pass


class IndexRangeError(CodeFileError):
    pass


class OverlappingTuplesError(CodeFileError):
    pass


def _fmt(x: float) -> str:
    if x == 0:
        return "-0.0" if math.copysign(1.0, x) < 0 else "0"
    return format(float(x), ".17g")


def render(code: CodeConfig) -> str:
    lines = ["{", f'  "version": {FORMAT_VERSION},', f'  "d": {code.d},', f'  "q": {code.q},', '  "vectors": [']
    rows = ["    [" + ", ".join(_fmt(x) for x in row) + "]" for row in code.points]
    lines.append(",\n".join(rows))
    lines.append("  ],")
    lines.append('  "matchings": [')
    ms = []
    for m in code.matchings:
        if not m.tuples:
            continue
        body = ", ".join("[" + ", ".join(str(j) for j in t) + "]" for t in m.tuples)
        ms.append(f'    {{"direction": {m.direction}, "tuples": [{body}]}}')
    lines.append(",\n".join(ms))
    lines.append("  ]")
    lines.append("}")
    return "\n".join(line for line in lines if line) + "\n"


_WS = " \t\n\r"


def _locate(text: str) -> dict[tuple, int]:
    """Character offset of every value in a well-formed JSON document, keyed by path."""
    positions: dict[tuple, int] = {}
    decoder = json.JSONDecoder()

    def skip(i):
        while i < len(text) and text[i] in _WS:
            i += 1
        return i

    def walk(i, path):
        i = skip(i)
        positions[path] = i
        c = text[i]
        if c == "{":
            i = skip(i + 1)
            if text[i] == "}":
                return i + 1
            while True:
                key, i = scanstring(text, skip(i) + 1)
                i = skip(i) + 1  # colon
                i = skip(walk(i, path + (key,)))
                if text[i] == "}":
                    return i + 1
                i += 1
        if c == "[":
            i = skip(i + 1)
            if text[i] == "]":
                return i + 1
            k = 0
            while True:
                i = skip(walk(i, path + (k,)))
                k += 1
                if text[i] == "]":
                    return i + 1
                i += 1
        _, end = decoder.raw_decode(text, i)
        return end

    walk(0, ())
    return positions


def parse(text: str) -> CodeConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(exc.msg, exc.lineno) from None
    pos = _locate(text)

    def line(*path) -> int:
        while path not in pos and path:
            path = path[:-1]
        return text.count("\n", 0, pos.get(path, 0)) + 1

    if not isinstance(doc, dict):
        raise MalformedDocumentError("top level must be an object", 1)
    for key in ("version", "d", "q", "vectors", "matchings"):
        if key not in doc:
            raise MalformedDocumentError(f"missing field {key!r}", 1)
    if doc["version"] != FORMAT_VERSION:
        raise MalformedDocumentError(f"unsupported version {doc['version']!r}", line("version"))
    for key in ("d", "q"):
        v = doc[key]
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise MalformedDocumentError(f"{key} must be a positive integer", line(key))
    d, q = doc["d"], doc["q"]

    vectors = doc["vectors"]
    if not isinstance(vectors, list):
        raise MalformedDocumentError("vectors must be a list", line("vectors"))
    for j, row in enumerate(vectors):
        if not isinstance(row, list):
            raise MalformedDocumentError(f"vector {j} is not a list", line("vectors", j))
        if len(row) != d:
            raise DimensionMismatchError(f"vector {j} has length {len(row)}, expected d={d}", line("vectors", j))
        for k, x in enumerate(row):
            if not isinstance(x, (int, float)) or isinstance(x, bool) or not math.isfinite(x):
                raise MalformedDocumentError(f"vector {j} entry {k} is not a finite number", line("vectors", j, k))
    n = len(vectors)

    raw = doc["matchings"]
    if not isinstance(raw, list):
        raise MalformedDocumentError("matchings must be a list", line("matchings"))
    matchings: dict[int, list[tuple[int, ...]]] = {}
    for a, m in enumerate(raw):
        where = ("matchings", a)
        if not isinstance(m, dict) or "direction" not in m or "tuples" not in m:
            raise MalformedDocumentError("matching needs 'direction' and 'tuples'", line(*where))
        i = m["direction"]
        if not isinstance(i, int) or isinstance(i, bool) or not 0 <= i < d:
            raise IndexRangeError(f"direction {i!r} outside [0, {d})", line(*where, "direction"))
        if i in matchings:
            raise MalformedDocumentError(f"two matchings given for direction {i}", line(*where))
        used: set[int] = set()
        tuples = []
        for b, t in enumerate(m["tuples"] if isinstance(m["tuples"], list) else [None]):
            at = line(*where, "tuples", b)
            if not isinstance(t, list) or len(t) != q or not all(isinstance(j, int) and not isinstance(j, bool) for j in t):
                raise MalformedDocumentError(f"tuple must be a list of {q} integer indices", at)
            for j in t:
                if not 0 <= j < n:
                    raise IndexRangeError(f"index {j} outside [0, {n})", at)
            if len(set(t)) != q:
                raise OverlappingTuplesError(f"tuple {t} repeats an index", at)
            if used.intersection(t):
                raise OverlappingTuplesError(f"matching not disjoint in direction {i}", at)
            used.update(t)
            tuples.append(tuple(t))
        matchings[i] = tuples

    points = np.array(vectors, dtype=np.float64).reshape(n, d)
    return CodeConfig.build(points, q, matchings)


def load(path) -> CodeConfig:
    return parse(Path(path).read_text(encoding="utf-8"))


def save(code: CodeConfig, path) -> None:
    Path(path).write_text(render(code), encoding="utf-8")

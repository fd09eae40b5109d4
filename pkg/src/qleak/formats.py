"""JSON file formats for distributions and phase functions.

Errors carry the line of the offending JSON value, found by a small scanner
that maps every value path to the line it starts on.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .distributions import JointDistribution
from .embeddings import PhaseFunction
from .errors import FormatError, LeakageError

TWO_PI = 2.0 * math.pi


def _value_lines(text: str) -> dict[tuple, int]:
    """Map each JSON value path (keys and indices) to its starting line.

    Assumes ``text`` is already known to be valid JSON.
    """
    lines: dict[tuple, int] = {}
    stack: list[list] = []
    expecting_key = False
    line, i, n = 1, 0, len(text)

    def here():
        return tuple(frame[1] for frame in stack)

    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
        elif ch in " \t\r:":
            i += 1
        elif ch == '"':
            j = i + 1
            while text[j] != '"':
                j += 2 if text[j] == "\\" else 1
            if expecting_key:
                stack[-1][1] = json.loads(text[i:j + 1])
                expecting_key = False
            else:
                lines.setdefault(here(), line)
            i = j + 1
        elif ch in "{[":
            lines.setdefault(here(), line)
            stack.append(["obj", None] if ch == "{" else ["arr", 0])
            expecting_key = ch == "{"
            i += 1
        elif ch in "}]":
            stack.pop()
            expecting_key = False
            i += 1
        elif ch == ",":
            if stack[-1][0] == "arr":
                stack[-1][1] += 1
            else:
                expecting_key = True
            i += 1
        else:
            lines.setdefault(here(), line)
            while i < n and text[i] not in ",]}\n \t\r":
                i += 1
    return lines


class _Doc:
    def __init__(self, text: str, source: str):
        self.source = source
        try:
            self.data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", source, exc.lineno) from None
        self.lines = _value_lines(text)

    def error(self, message: str, *path) -> FormatError:
        path = tuple(path)
        while path not in self.lines and path:
            path = path[:-1]
        return FormatError(message, self.source, self.lines.get(path, 1))


def _read(path: str | Path) -> tuple[str, str]:
    try:
        return Path(path).read_text(encoding="utf-8"), str(path)
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(f"cannot read file: {exc}", str(path)) from None


def _parse_prob(value, doc: _Doc, i: int, j: int) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise doc.error(f"probs[{i}][{j}] must be a number or an 'a/b' string", "probs", i, j)
    if isinstance(value, str):
        num, sep, den = value.partition("/")
        try:
            if not sep or not num.strip().lstrip("+-").isdigit() or not den.strip().isdigit():
                raise ValueError
            value = Fraction(int(num), int(den))
        except (ValueError, ZeroDivisionError):
            raise doc.error(f"probs[{i}][{j}]: bad fraction {value!r}", "probs", i, j) from None
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise doc.error(f"probs[{i}][{j}] must be finite and non-negative", "probs", i, j)
    return value


def _alphabet(doc: _Doc, key: str) -> tuple[str, ...]:
    alpha = doc.data.get(key)
    if not isinstance(alpha, list) or not alpha:
        raise doc.error(f"{key} must be a non-empty array of strings", key)
    for k, s in enumerate(alpha):
        if not isinstance(s, str):
            raise doc.error(f"{key}[{k}] is not a string", key, k)
    if len(set(alpha)) != len(alpha):
        raise doc.error(f"{key} contains duplicate symbols", key)
    return tuple(alpha)


def parse_distribution(text: str, source: str = "<input>") -> JointDistribution:
    doc = _Doc(text, source)
    if not isinstance(doc.data, dict):
        raise doc.error("top level must be an object")
    for key in ("x_alphabet", "y_alphabet", "probs"):
        if key not in doc.data:
            raise doc.error(f"missing key {key!r}")
    xs, ys = _alphabet(doc, "x_alphabet"), _alphabet(doc, "y_alphabet")
    rows = doc.data["probs"]
    if not isinstance(rows, list) or len(rows) != len(xs):
        raise doc.error(f"probs must be an array of {len(xs)} rows", "probs")
    probs = np.zeros((len(xs), len(ys)))
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != len(ys):
            raise doc.error(f"probs[{i}] must be an array of {len(ys)} entries", "probs", i)
        for j, value in enumerate(row):
            probs[i, j] = _parse_prob(value, doc, i, j)
    try:
        return JointDistribution(xs, ys, probs)
    except LeakageError as exc:
        raise doc.error(str(exc), "probs") from None


def load_distribution(path: str | Path) -> JointDistribution:
    text, source = _read(path)
    return parse_distribution(text, source)


def dump_distribution(d: JointDistribution) -> str:
    doc = {"x_alphabet": list(d.x_alphabet), "y_alphabet": list(d.y_alphabet),
           "probs": [[float(v) for v in row] for row in d.probs]}
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def parse_phases(text: str, d: JointDistribution, source: str = "<input>") -> PhaseFunction:
    """Read ``{"entries": [{"x": .., "y": .., "theta": ..}, ...]}``.

    Every support pair must appear exactly once and no other pair may appear.
    """
    doc = _Doc(text, source)
    if not isinstance(doc.data, dict) or not isinstance(doc.data.get("entries"), list):
        raise doc.error("expected an object with an 'entries' array")
    xi = {s: k for k, s in enumerate(d.x_alphabet)}
    yi = {s: k for k, s in enumerate(d.y_alphabet)}
    support = set(d.support())
    values: dict[tuple[int, int], float] = {}
    for k, entry in enumerate(doc.data["entries"]):
        if not isinstance(entry, dict) or set(entry) != {"x", "y", "theta"}:
            raise doc.error(f"entries[{k}] must have exactly the keys x, y, theta", "entries", k)
        x, y, theta = entry["x"], entry["y"], entry["theta"]
        if x not in xi or y not in yi:
            raise doc.error(f"entries[{k}]: unknown symbol pair ({x!r}, {y!r})", "entries", k)
        pair = (xi[x], yi[y])
        if pair not in support:
            raise doc.error(f"entries[{k}]: ({x!r}, {y!r}) is outside the support", "entries", k)
        if pair in values:
            raise doc.error(f"entries[{k}]: duplicate pair ({x!r}, {y!r})", "entries", k)
        if isinstance(theta, bool) or not isinstance(theta, (int, float)) \
                or not 0.0 <= theta < TWO_PI:
            raise doc.error(f"entries[{k}]: theta must be a number in [0, 2pi)",
                            "entries", k, "theta")
        values[pair] = float(theta)
    missing = sorted(support - set(values))
    if missing:
        x, y = missing[0]
        raise doc.error(f"no phase given for support pair ({d.x_alphabet[x]!r}, "
                        f"{d.y_alphabet[y]!r}) and {len(missing) - 1} more", "entries")
    return PhaseFunction(values)


def load_phases(path: str | Path, d: JointDistribution) -> PhaseFunction:
    text, source = _read(path)
    return parse_phases(text, d, source)


def dump_phases(theta: PhaseFunction, d: JointDistribution) -> str:
    entries = [{"x": d.x_alphabet[x], "y": d.y_alphabet[y], "theta": t}
               for (x, y), t in sorted(theta.values.items())]
    return json.dumps({"entries": entries}, ensure_ascii=False, indent=2) + "\n"

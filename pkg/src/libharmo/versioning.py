"""Total ordering of Maven version strings.

Implements Maven's documented version-order rules: tokenization on dots,
hyphens and digit/letter transitions, numeric tokens outrank qualifiers at
the same position, the well-known qualifier ladder (alpha < beta <
milestone < rc = cr < snapshot < release < sp), and trimming of trailing
null tokens so "1.0" equals "1.0.0".  Unknown qualifiers order lexically
after "sp".
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

from .errors import EmptyInput

# Index in this ladder decides qualifier rank; the empty string is the
# release itself.  Unknown qualifiers get a rank key sorting after all of
# these (see _qualifier_key).
_QUALIFIERS = ["alpha", "beta", "milestone", "rc", "snapshot", "", "sp"]
_ALIASES = {"cr": "rc", "ga": "", "final": "", "release": ""}
_RELEASE_RANK = str(_QUALIFIERS.index(""))

# kinds of parsed items
_INT, _STR, _LIST = 0, 1, 2


def _qualifier_key(q: str) -> str:
    if q in _QUALIFIERS:
        return str(_QUALIFIERS.index(q))
    # rank after every known qualifier, lexically among themselves
    return f"{len(_QUALIFIERS)}-{q}"


def _parse_item(is_digit: bool, text: str, followed_by_digit: bool = False):
    if is_digit:
        return (_INT, int(text))
    if followed_by_digit and len(text) == 1:
        # single-letter shorthands are only aliases when directly followed
        # by a digit: 1.0a1 means 1.0-alpha-1
        text = {"a": "alpha", "b": "beta", "m": "milestone"}.get(text, text)
    return (_STR, _ALIASES.get(text, text))


def _parse(version: str):
    """Tokenize a version string into the nested item structure."""
    version = version.strip().lower()
    items: list = []
    stack = [items]
    current = items
    start = 0
    is_digit = False
    for i, c in enumerate(version):
        if c == ".":
            current.append((_INT, 0) if i == start else _parse_item(is_digit, version[start:i]))
            start = i + 1
        elif c == "-":
            current.append((_INT, 0) if i == start else _parse_item(is_digit, version[start:i]))
            start = i + 1
            sub: list = []
            current.append((_LIST, sub))
            current = sub
            stack.append(sub)
        elif c.isdigit():
            if not is_digit and i > start:
                current.append(_parse_item(False, version[start:i], followed_by_digit=True))
                start = i
                sub = []
                current.append((_LIST, sub))
                current = sub
                stack.append(sub)
            is_digit = True
        else:
            if is_digit and i > start:
                current.append(_parse_item(True, version[start:i]))
                start = i
                sub = []
                current.append((_LIST, sub))
                current = sub
                stack.append(sub)
            is_digit = False
    if len(version) > start:
        current.append(_parse_item(is_digit, version[start:]))
    while stack:
        _normalize(stack.pop())
    return items


def _is_null(item) -> bool:
    kind, value = item
    if kind == _INT:
        return value == 0
    if kind == _STR:
        return _qualifier_key(value) == _RELEASE_RANK
    return len(value) == 0


def _normalize(lst: list) -> None:
    for i in range(len(lst) - 1, -1, -1):
        if _is_null(lst[i]):
            del lst[i]
        elif lst[i][0] != _LIST:
            break


def _cmp_items(a, b) -> int:
    if a is None and b is None:
        return 0
    if a is None:
        return -_cmp_items(b, None)
    kind, value = a
    if b is None:
        if kind == _INT:
            return 0 if value == 0 else 1
        if kind == _STR:
            qa, qb = _qualifier_key(value), _RELEASE_RANK
            return (qa > qb) - (qa < qb)
        return 0 if not value else _cmp_items(value[0], None)
    bkind, bvalue = b
    if kind == _INT:
        if bkind == _INT:
            return (value > bvalue) - (value < bvalue)
        return 1  # numbers outrank qualifiers and sublists
    if kind == _STR:
        if bkind == _INT:
            return -1
        if bkind == _STR:
            qa, qb = _qualifier_key(value), _qualifier_key(bvalue)
            return (qa > qb) - (qa < qb)
        return -1  # qualifier < sublist
    # a is a list
    if bkind == _INT:
        return -1
    if bkind == _STR:
        return 1
    for left, right in zip(value, bvalue):
        r = _cmp_items(left, right)
        if r != 0:
            return r
    if len(value) != len(bvalue):
        longer, sign = (value, 1) if len(value) > len(bvalue) else (bvalue, -1)
        for item in longer[min(len(value), len(bvalue)):]:
            r = _cmp_items(item, None)
            if r != 0:
                return sign * r
    return 0


@functools.total_ordering
@dataclass(frozen=True)
class VersionKey:
    """A parsed Maven version; ordering follows Maven's rules."""

    original: str
    tokens: tuple = field(compare=False, default=())

    @classmethod
    def parse(cls, text: str) -> "VersionKey":
        return cls(original=text, tokens=tuple(_freeze(_parse(text))))

    def __eq__(self, other):
        if not isinstance(other, VersionKey):
            return NotImplemented
        return compare(self, other) == 0

    def __lt__(self, other):
        return compare(self, other) < 0

    def __hash__(self):
        return hash(self.tokens)

    def __str__(self):
        return self.original


def _freeze(items):
    out = []
    for kind, value in items:
        if kind == _LIST:
            out.append((_LIST, tuple(_freeze(value))))
        else:
            out.append((kind, value))
    return out


def _thaw(items):
    out = []
    for kind, value in items:
        if kind == _LIST:
            out.append((_LIST, _thaw(value)))
        else:
            out.append((kind, value))
    return out


def compare(a: VersionKey | str, b: VersionKey | str) -> int:
    """Three-way comparison; returns -1, 0 or 1."""
    if isinstance(a, str):
        a = VersionKey.parse(a)
    if isinstance(b, str):
        b = VersionKey.parse(b)
    return _cmp_items((_LIST, _thaw(a.tokens)), (_LIST, _thaw(b.tokens)))


def max_version(versions) -> str:
    """Maximum of a non-empty list of version strings; ties keep the first."""
    versions = list(versions)
    if not versions:
        raise EmptyInput("max_version of an empty list")
    best = versions[0]
    best_key = VersionKey.parse(best)
    for v in versions[1:]:
        key = VersionKey.parse(v)
        if compare(key, best_key) > 0:
            best, best_key = v, key
    return best


def is_snapshot(version: str) -> bool:
    return version.strip().lower().endswith("-snapshot")

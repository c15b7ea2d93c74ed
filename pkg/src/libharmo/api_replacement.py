"""Mine Javadoc deprecated pages for documented API replacements.

For every deleted API, the deprecated-list pages of each release between
the currently used version and the harmonized one are scanned for an
entry matching the API's class, name and arity, whose comment contains a
replacement directive ("use X", "replaced by X", "in favor of X").  A
suggestion is only ever emitted with the verbatim directive text as
evidence, so false replacements cannot be fabricated.  Both the
frame-era table layout and the modern div layout reduce to the same
signature/comment stream.
"""

from __future__ import annotations

import re
import zipfile
from dataclasses import dataclass
from html.parser import HTMLParser

from .classfile import ApiRef, _param_descriptor
from .errors import Diagnostic
from .resolver import LibraryId, ResolvedDependency
from .versioning import compare

EXACT = "exact"
ARITY_ONLY = "arity-only"

_DIRECTIVE = re.compile(
    r"(?:\buse\b|\breplaced\s+by\b|\bin\s+favor\s+of\b)\s+"
    r"([A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)+(?:#[\w$<>]+)?(?:\([^)]*\))?)",
    re.IGNORECASE)

_SIGNATURE = re.compile(r"^([\w$]+(?:\.[\w$]+)+)\.([\w$<>]+)\((.*)\)$", re.DOTALL)

_PRIMITIVES = {"int": "I", "long": "J", "boolean": "Z", "byte": "B",
               "char": "C", "short": "S", "float": "F", "double": "D",
               "void": "V"}


@dataclass(frozen=True)
class ReplacementSuggestion:
    deleted: ApiRef
    replacement_fqn: str
    source_version: str
    evidence: str
    confidence: str = EXACT


class _DeprecatedPage(HTMLParser):
    """Flatten the page into (anchor text, trailing comment) pairs.

    Works for both historic layouts: the signature is always the text of
    a link, and the explanation is the prose that follows before the
    next signature link."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.entries: list[tuple[str, str]] = []
        self._anchor_depth = 0
        self._anchor_text: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag == "a":
            self._anchor_depth += 1
            if self._anchor_depth == 1:
                self._anchor_text = []

    def handle_endtag(self, tag):
        if tag == "a" and self._anchor_depth:
            self._anchor_depth -= 1
            if self._anchor_depth == 0:
                text = "".join(self._anchor_text).strip()
                if _SIGNATURE.match(text):
                    self.entries.append((text, ""))
                elif self.entries:
                    # linked replacement names belong to the comment
                    sig, comment = self.entries[-1]
                    self.entries[-1] = (sig, comment + text)

    def handle_data(self, data):
        if self._anchor_depth:
            self._anchor_text.append(data)
        elif self.entries:
            sig, comment = self.entries[-1]
            self.entries[-1] = (sig, comment + data)


def extract_directives(html: str):
    """All (signature text, comment text) pairs on a deprecated page."""
    parser = _DeprecatedPage()
    parser.feed(html)
    return [(sig, " ".join(comment.split())) for sig, comment in parser.entries]


def _source_param_descriptor(args: str) -> str | None:
    """Best-effort mapping of a source-level parameter list to a JVM
    parameter descriptor; None when a type can't be resolved."""
    args = re.sub(r"<[^<>]*>", "", args)  # erase generics
    parts = [a.strip() for a in args.split(",") if a.strip()] if args.strip() else []
    out = "("
    for part in parts:
        part = part.split()[0] if part.split() else part
        dims = part.count("[]") + part.count("...")
        base = part.replace("[]", "").replace("...", "").strip()
        out += "[" * dims
        if base in _PRIMITIVES:
            out += _PRIMITIVES[base]
        elif "." in base:
            out += "L" + base.replace(".", "/") + ";"
        elif base == "String":
            out += "Ljava/lang/String;"
        else:
            return None  # unqualified class name: package unknown
    return out + ")"


def _match_entry(api: ApiRef, signature: str):
    """None, EXACT or ARITY_ONLY."""
    m = _SIGNATURE.match(signature)
    if not m:
        return None
    cls, name, args = m.groups()
    if cls != api.class_fqn or name != api.method_name:
        return None
    stripped = re.sub(r"<[^<>]*>", "", args)
    arity = len([a for a in stripped.split(",") if a.strip()]) if stripped.strip() else 0
    param_desc = _param_descriptor(api.descriptor)
    if arity != _arity_of(param_desc):
        return None
    mapped = _source_param_descriptor(args)
    return EXACT if mapped == param_desc else ARITY_ONLY


def _arity_of(param_descriptor: str) -> int:
    count = 0
    i = 1
    while i < len(param_descriptor) and param_descriptor[i] != ")":
        c = param_descriptor[i]
        if c == "[":
            i += 1
            continue
        if c == "L":
            i = param_descriptor.index(";", i) + 1
        else:
            i += 1
        count += 1
    return count


def _deprecated_pages(javadoc_path):
    with zipfile.ZipFile(javadoc_path) as zf:
        for name in sorted(zf.namelist()):
            if name.endswith("deprecated-list.html"):
                yield name, zf.read(name).decode("utf-8", errors="replace")


def _versions_between(index, low: str, high: str):
    in_range = [(v, date) for v, date in index.versions
                if compare(v, low) > 0 and compare(v, high) <= 0]
    if in_range and all(date is not None for _, date in in_range):
        in_range.sort(key=lambda p: p[1])
    return [v for v, _ in in_range]


def suggest_replacements(dep: ResolvedDependency, v_h: str, deleted, db):
    """Earliest documented replacement per deleted API.

    Returns (suggestions, diagnostics); deleted APIs without any matching
    directive are simply absent from the suggestions."""
    suggestions: list[ReplacementSuggestion] = []
    diagnostics: list[Diagnostic] = []
    pending = set(deleted)
    if not pending:
        return suggestions, diagnostics
    lib = dep.lib if isinstance(dep.lib, LibraryId) else dep.lib
    index = db.list_versions(lib)
    for version in _versions_between(index, dep.ver, v_h):
        if not pending:
            break
        record = db.fetch_javadoc(lib, version)
        if record.javadoc_path is None:
            diagnostics.append(Diagnostic(
                "no-javadoc", "release skipped in replacement search",
                f"{lib}:{version}"))
            continue
        for _name, html in _deprecated_pages(record.javadoc_path):
            for signature, comment in extract_directives(html):
                directive = _DIRECTIVE.search(comment)
                if not directive:
                    continue
                for api in sorted(pending):
                    grade = _match_entry(api, signature)
                    if grade is None:
                        continue
                    suggestions.append(ReplacementSuggestion(
                        deleted=api,
                        replacement_fqn=directive.group(1),
                        source_version=version,
                        evidence=comment[directive.start():directive.end()],
                        confidence=grade,
                    ))
                    pending.discard(api)
                    break
    return suggestions, diagnostics

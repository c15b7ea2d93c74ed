"""Locate library API calls made by a module.

Two extraction modes.  Bytecode mode disassembles compiled classes under
the module's build-output directory and records every invoke instruction
whose target class belongs to the library; the operands are exact, so
this mode is authoritative.  SourceHeuristic mode is the fallback for
unbuilt modules: it scans .java files, resolves receivers through the
file's imports and matches method name plus arity.  Profiles say which
mode produced them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .classfile import ApiIndex, ApiRef, parse_class
from .errors import Diagnostic, MalformedClassFile
from .resolver import ResolvedDependency

BYTECODE = "Bytecode"
SOURCE_HEURISTIC = "SourceHeuristic"
EMPTY = "Empty"

_CLASS_DIRS = ["target/classes", "target/test-classes"]
_SOURCE_ROOTS = ["src/main/java", "src/test/java"]

_IMPORT = re.compile(r"^\s*import\s+(static\s+)?([\w.]+(?:\.\*)?)\s*;", re.MULTILINE)
_CALL = re.compile(r"([A-Za-z_$][\w$]*)\s*\.\s*([a-z_$][\w$]*)\s*\(")
_BARE_CALL = re.compile(r"(?<![\w.$])([a-z_$][\w$]*)\s*\(")


@dataclass(frozen=True)
class CallSite:
    api: ApiRef
    location: tuple[str, str]  # (file or class entry, method or line anchor)
    mode: str
    flags: tuple = ()


@dataclass
class UsageProfile:
    dep: ResolvedDependency | None
    called_apis: set[ApiRef]
    call_sites: list[CallSite]
    mode: str
    diagnostics: list[Diagnostic] = field(default_factory=list)


def _descriptor_arity(descriptor: str) -> int:
    """Parameter count of a JVM method descriptor."""
    count = 0
    i = 1  # skip '('
    while i < len(descriptor) and descriptor[i] != ")":
        c = descriptor[i]
        if c == "[":
            i += 1
            continue
        if c == "L":
            i = descriptor.index(";", i) + 1
        else:
            i += 1
        count += 1
    return count


def _count_args(text: str, open_pos: int) -> int | None:
    """Top-level comma count inside the paren starting at open_pos."""
    depth = 0
    commas = 0
    any_token = False
    for i in range(open_pos, len(text)):
        c = text[i]
        if c in "([":
            depth += 1
        elif c in ")]":
            depth -= 1
            if depth == 0:
                return commas + 1 if any_token else 0
        elif depth == 1:
            if c == ",":
                commas += 1
            elif not c.isspace():
                any_token = True
    return None  # unbalanced (spans lines the regex did not capture)


def _scan_classes(module_root: Path, index: ApiIndex, include_test: bool):
    lib_classes = {ref.class_fqn for ref in index.apis}
    exact = {(r.class_fqn, r.method_name, r.descriptor): r for r in index.apis}
    sites: list[CallSite] = []
    diagnostics: list[Diagnostic] = []
    found_any = False
    class_dirs = _CLASS_DIRS if include_test else _CLASS_DIRS[:1]
    for reldir in class_dirs:
        base = module_root / reldir
        if not base.is_dir():
            continue
        for path in sorted(base.rglob("*.class")):
            found_any = True
            entry = str(path.relative_to(module_root))
            try:
                _fqn, methods, _ = parse_class(path.read_bytes())
            except (MalformedClassFile, Exception) as e:  # totality over junk files
                diagnostics.append(Diagnostic("malformed-class", str(e), entry))
                continue
            for ref, body in methods:
                anchor = f"{ref.method_name}{ref.descriptor}"
                for ccls, cname, cdesc in body.calls:
                    if ccls not in lib_classes:
                        continue
                    target = exact.get((ccls, cname, cdesc))
                    if target is None:
                        target = ApiRef(ccls, cname, cdesc)
                        flags = ("unresolved-target",)
                    else:
                        flags = ()
                    sites.append(CallSite(api=target, location=(entry, anchor),
                                          mode=BYTECODE, flags=flags))
    return sites, diagnostics, found_any


def _file_imports(text: str):
    plain: dict[str, str] = {}      # simple name -> fqn
    wildcards: list[str] = []       # package prefixes
    static_members: dict[str, str] = {}  # member name -> class fqn
    static_wildcards: list[str] = []
    for m in _IMPORT.finditer(text):
        is_static, target = bool(m.group(1)), m.group(2)
        if is_static:
            if target.endswith(".*"):
                static_wildcards.append(target[:-2])
            else:
                cls, member = target.rsplit(".", 1)
                static_members[member] = cls
        elif target.endswith(".*"):
            wildcards.append(target[:-2])
        else:
            plain[target.rsplit(".", 1)[1]] = target
    return plain, wildcards, static_members, static_wildcards


def _scan_sources(module_root: Path, index: ApiIndex, include_test: bool):
    lib_classes = {ref.class_fqn for ref in index.apis}
    by_class_method: dict[tuple[str, str], list[ApiRef]] = {}
    for ref in index.apis:
        by_class_method.setdefault((ref.class_fqn, ref.method_name), []).append(ref)

    sites: list[CallSite] = []
    found_any = False
    roots = _SOURCE_ROOTS if include_test else _SOURCE_ROOTS[:1]
    for reldir in roots:
        base = module_root / reldir
        if not base.is_dir():
            continue
        for path in sorted(base.rglob("*.java")):
            found_any = True
            entry = str(path.relative_to(module_root))
            text = path.read_text(encoding="utf-8", errors="replace")
            plain, wildcards, static_members, static_wildcards = _file_imports(text)

            def resolve_receiver(name: str) -> str | None:
                if name in plain and plain[name] in lib_classes:
                    return plain[name]
                for pkg in wildcards:
                    fqn = f"{pkg}.{name}"
                    if fqn in lib_classes:
                        return fqn
                return None

            for lineno, line in enumerate(text.splitlines(), 1):
                if line.lstrip().startswith(("import ", "package ", "//")):
                    continue
                consumed = set()
                for m in _CALL.finditer(line):
                    receiver, method = m.group(1), m.group(2)
                    cls = resolve_receiver(receiver)
                    if cls is None:
                        continue
                    consumed.add(m.start(2))
                    sites.extend(_match_call(by_class_method, cls, method, line,
                                             m.end() - 1, (entry, f"line {lineno}")))
                for m in _BARE_CALL.finditer(line):
                    if m.start(1) in consumed:
                        continue
                    member = m.group(1)
                    cls = static_members.get(member)
                    if cls is None:
                        for c in static_wildcards:
                            if (c, member) in by_class_method:
                                cls = c
                                break
                    if cls is None or cls not in lib_classes:
                        continue
                    sites.extend(_match_call(by_class_method, cls, member, line,
                                             m.end() - 1, (entry, f"line {lineno}")))
    return sites, found_any


def _match_call(by_class_method, cls, method, line, open_pos, location):
    candidates = by_class_method.get((cls, method), [])
    if not candidates:
        return [CallSite(api=ApiRef(cls, method, "(?)?"), location=location,
                         mode=SOURCE_HEURISTIC, flags=("unresolved-target",))]
    arity = _count_args(line, open_pos)
    matched = [r for r in candidates if arity is None
               or _descriptor_arity(r.descriptor) == arity]
    if not matched:
        matched = candidates  # arity miscount: keep all rather than drop
    flags = ("ambiguous",) if len(matched) > 1 else ()
    return [CallSite(api=r, location=location, mode=SOURCE_HEURISTIC, flags=flags)
            for r in matched]


def extract_usage(dep: ResolvedDependency | None, module_root,
                  index: ApiIndex, include_test_usage: bool = True) -> UsageProfile:
    """Per-module usage of one library, preferring compiled classes."""
    module_root = Path(module_root)
    sites, diagnostics, had_classes = _scan_classes(module_root, index, include_test_usage)
    if had_classes:
        mode = BYTECODE
    else:
        sites, had_sources = _scan_sources(module_root, index, include_test_usage)
        mode = SOURCE_HEURISTIC if had_sources else EMPTY
        diagnostics = []
    return UsageProfile(
        dep=dep,
        called_apis={s.api for s in sites},
        call_sites=sites,
        mode=mode,
        diagnostics=diagnostics,
    )

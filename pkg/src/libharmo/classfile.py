"""JVM class-file parsing: API index, canonical method bodies, call graph.

Class files from a library JAR are parsed into an API index keyed by
(class, method, descriptor).  Each method body is rendered into a
canonical instruction listing with symbolic operands (constant-pool text
instead of indices, relative branch offsets, debug attributes stripped),
so the body hash is invariant under constant-pool and attribute
reordering.  Direct invoke instructions whose target class belongs to the
same JAR become call-graph edges.
"""

from __future__ import annotations

import hashlib
import io
import struct
import zipfile
from dataclasses import dataclass, field

from .errors import Diagnostic, MalformedClassFile, UnknownRoot
from .resolver import LibraryId

MAGIC = 0xCAFEBABE
SUPPORTED_MAJOR = 69  # best-effort diagnostic above this

# constant pool tags
CONSTANT_Utf8 = 1
CONSTANT_Integer = 3
CONSTANT_Float = 4
CONSTANT_Long = 5
CONSTANT_Double = 6
CONSTANT_Class = 7
CONSTANT_String = 8
CONSTANT_Fieldref = 9
CONSTANT_Methodref = 10
CONSTANT_InterfaceMethodref = 11
CONSTANT_NameAndType = 12
CONSTANT_MethodHandle = 15
CONSTANT_MethodType = 16
CONSTANT_Dynamic = 17
CONSTANT_InvokeDynamic = 18
CONSTANT_Module = 19
CONSTANT_Package = 20

ACC_PUBLIC = 0x0001
ACC_PRIVATE = 0x0002
ACC_PROTECTED = 0x0004

_INVOKES = {"invokevirtual", "invokespecial", "invokestatic", "invokeinterface"}

# operand layout per opcode: (mnemonic, kind)
# kinds: "" none, b signed byte, B u1 local index, s signed short,
# c1/c2 constant-pool index, j2/j4 branch offset, and special forms
_OPCODES: dict[int, tuple[str, str]] = {}


def _op(start, names, kind=""):
    for i, n in enumerate(names if isinstance(names, list) else [names]):
        _OPCODES[start + i] = (n, kind)


_op(0, ["nop", "aconst_null", "iconst_m1", "iconst_0", "iconst_1", "iconst_2",
        "iconst_3", "iconst_4", "iconst_5", "lconst_0", "lconst_1",
        "fconst_0", "fconst_1", "fconst_2", "dconst_0", "dconst_1"])
_op(16, "bipush", "b")
_op(17, "sipush", "s")
_op(18, "ldc", "c1")
_op(19, "ldc_w", "c2")
_op(20, "ldc2_w", "c2")
_op(21, ["iload", "lload", "fload", "dload", "aload"], "B")
_op(26, ["iload_0", "iload_1", "iload_2", "iload_3",
         "lload_0", "lload_1", "lload_2", "lload_3",
         "fload_0", "fload_1", "fload_2", "fload_3",
         "dload_0", "dload_1", "dload_2", "dload_3",
         "aload_0", "aload_1", "aload_2", "aload_3",
         "iaload", "laload", "faload", "daload", "aaload",
         "baload", "caload", "saload"])
_op(54, ["istore", "lstore", "fstore", "dstore", "astore"], "B")
_op(59, ["istore_0", "istore_1", "istore_2", "istore_3",
         "lstore_0", "lstore_1", "lstore_2", "lstore_3",
         "fstore_0", "fstore_1", "fstore_2", "fstore_3",
         "dstore_0", "dstore_1", "dstore_2", "dstore_3",
         "astore_0", "astore_1", "astore_2", "astore_3",
         "iastore", "lastore", "fastore", "dastore", "aastore",
         "bastore", "castore", "sastore",
         "pop", "pop2", "dup", "dup_x1", "dup_x2", "dup2", "dup2_x1",
         "dup2_x2", "swap",
         "iadd", "ladd", "fadd", "dadd", "isub", "lsub", "fsub", "dsub",
         "imul", "lmul", "fmul", "dmul", "idiv", "ldiv", "fdiv", "ddiv",
         "irem", "lrem", "frem", "drem", "ineg", "lneg", "fneg", "dneg",
         "ishl", "lshl", "ishr", "lshr", "iushr", "lushr",
         "iand", "land", "ior", "lor", "ixor", "lxor"])
_op(132, "iinc", "iinc")
_op(133, ["i2l", "i2f", "i2d", "l2i", "l2f", "l2d", "f2i", "f2l", "f2d",
          "d2i", "d2l", "d2f", "i2b", "i2c", "i2s",
          "lcmp", "fcmpl", "fcmpg", "dcmpl", "dcmpg"])
_op(153, ["ifeq", "ifne", "iflt", "ifge", "ifgt", "ifle",
          "if_icmpeq", "if_icmpne", "if_icmplt", "if_icmpge",
          "if_icmpgt", "if_icmple", "if_acmpeq", "if_acmpne",
          "goto", "jsr"], "j2")
_op(169, "ret", "B")
_op(170, "tableswitch", "tswitch")
_op(171, "lookupswitch", "lswitch")
_op(172, ["ireturn", "lreturn", "freturn", "dreturn", "areturn", "return"])
_op(178, ["getstatic", "putstatic", "getfield", "putfield"], "c2")
_op(182, ["invokevirtual", "invokespecial", "invokestatic"], "c2")
_op(185, "invokeinterface", "iface")
_op(186, "invokedynamic", "indy")
_op(187, "new", "c2")
_op(188, "newarray", "atype")
_op(189, "anewarray", "c2")
_op(190, ["arraylength", "athrow"])
_op(192, ["checkcast", "instanceof"], "c2")
_op(194, ["monitorenter", "monitorexit"])
_op(196, "wide", "wide")
_op(197, "multianewarray", "marray")
_op(198, ["ifnull", "ifnonnull"], "j2")
_op(200, ["goto_w", "jsr_w"], "j4")

_ATYPES = {4: "boolean", 5: "char", 6: "float", 7: "double",
           8: "byte", 9: "short", 10: "int", 11: "long"}

_HANDLE_KINDS = {1: "getField", 2: "getStatic", 3: "putField", 4: "putStatic",
                 5: "invokeVirtual", 6: "invokeStatic", 7: "invokeSpecial",
                 8: "newInvokeSpecial", 9: "invokeInterface"}


@dataclass(frozen=True, order=True)
class ApiRef:
    class_fqn: str  # dot-separated
    method_name: str
    descriptor: str
    visibility: str = "public"

    @property
    def identity(self) -> tuple[str, str, str]:
        """Identity ignores the return type so a return-type-only change
        counts as the same API with a changed body."""
        return (self.class_fqn, self.method_name, _param_descriptor(self.descriptor))

    def __str__(self):
        return f"{self.class_fqn}.{self.method_name}{self.descriptor}"


@dataclass(frozen=True)
class MethodBody:
    api: ApiRef
    canonical_code: str
    body_hash: str
    dynamic_opaque: bool = False
    calls: tuple = ()  # (class_fqn, name, descriptor) of every invoke target


@dataclass
class ApiIndex:
    lib: LibraryId | None
    version: str | None
    apis: dict[ApiRef, MethodBody] = field(default_factory=dict)
    call_edges: set[tuple[ApiRef, ApiRef]] = field(default_factory=set)
    external_refs: set[tuple[str, str, str]] = field(default_factory=set)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def by_identity(self) -> dict[tuple, ApiRef]:
        return {ref.identity: ref for ref in self.apis}


def _param_descriptor(descriptor: str) -> str:
    close = descriptor.rfind(")")
    return descriptor[: close + 1] if close >= 0 else descriptor


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def u1(self):
        v = self.data[self.pos]
        self.pos += 1
        return v

    def u2(self):
        v = struct.unpack_from(">H", self.data, self.pos)[0]
        self.pos += 2
        return v

    def u4(self):
        v = struct.unpack_from(">I", self.data, self.pos)[0]
        self.pos += 4
        return v

    def raw(self, n):
        v = self.data[self.pos:self.pos + n]
        if len(v) < n:
            raise MalformedClassFile("truncated class file")
        self.pos += n
        return v


def _parse_constant_pool(r: _Reader):
    count = r.u2()
    pool: dict[int, tuple] = {}
    i = 1
    while i < count:
        tag = r.u1()
        if tag == CONSTANT_Utf8:
            length = r.u2()
            pool[i] = (tag, r.raw(length).decode("utf-8", errors="replace"))
        elif tag in (CONSTANT_Integer, CONSTANT_Float):
            pool[i] = (tag, r.raw(4))
        elif tag in (CONSTANT_Long, CONSTANT_Double):
            pool[i] = (tag, r.raw(8))
            i += 1  # 8-byte constants take two slots
        elif tag in (CONSTANT_Class, CONSTANT_String, CONSTANT_MethodType,
                     CONSTANT_Module, CONSTANT_Package):
            pool[i] = (tag, r.u2())
        elif tag in (CONSTANT_Fieldref, CONSTANT_Methodref,
                     CONSTANT_InterfaceMethodref, CONSTANT_NameAndType,
                     CONSTANT_Dynamic, CONSTANT_InvokeDynamic):
            pool[i] = (tag, r.u2(), r.u2())
        elif tag == CONSTANT_MethodHandle:
            pool[i] = (tag, r.u1(), r.u2())
        else:
            raise MalformedClassFile(f"unknown constant pool tag {tag}")
        i += 1
    return pool


class _ClassData:
    """One parsed class file, before canonicalization."""

    def __init__(self, data: bytes):
        r = _Reader(data)
        if r.u4() != MAGIC:
            raise MalformedClassFile("bad magic")
        self.minor = r.u2()
        self.major = r.u2()
        self.pool = _parse_constant_pool(r)
        self.access_flags = r.u2()
        self.this_class = self.class_name(r.u2())
        super_idx = r.u2()
        self.super_class = self.class_name(super_idx) if super_idx else None
        self.interfaces = [self.class_name(r.u2()) for _ in range(r.u2())]
        for _ in range(r.u2()):  # fields: name/descriptor only, skipped
            r.u2(), r.u2(), r.u2()
            self._skip_attributes(r)
        self.methods = []
        for _ in range(r.u2()):
            flags = r.u2()
            name = self.utf8(r.u2())
            desc = self.utf8(r.u2())
            code = None
            for aname, adata in self._attributes(r):
                if aname == "Code":
                    code = adata
            self.methods.append((flags, name, desc, code))
        self.attributes = dict(self._attributes(r))
        self.bootstrap_methods = self._parse_bootstrap()

    def _attributes(self, r):
        out = []
        for _ in range(r.u2()):
            name = self.utf8(r.u2())
            length = r.u4()
            out.append((name, r.raw(length)))
        return out

    def _skip_attributes(self, r):
        for _ in range(r.u2()):
            r.u2()
            r.raw(r.u4())

    def _parse_bootstrap(self):
        data = self.attributes.get("BootstrapMethods")
        if data is None:
            return []
        r = _Reader(data)
        out = []
        for _ in range(r.u2()):
            handle = r.u2()
            args = [r.u2() for _ in range(r.u2())]
            out.append((handle, args))
        return out

    # --- constant pool accessors -------------------------------------

    def utf8(self, idx) -> str:
        entry = self.pool.get(idx)
        if not entry or entry[0] != CONSTANT_Utf8:
            raise MalformedClassFile(f"constant {idx} is not utf8")
        return entry[1]

    def class_name(self, idx) -> str:
        entry = self.pool.get(idx)
        if not entry or entry[0] != CONSTANT_Class:
            raise MalformedClassFile(f"constant {idx} is not a class")
        return self.utf8(entry[1])

    def name_and_type(self, idx):
        entry = self.pool.get(idx)
        if not entry or entry[0] != CONSTANT_NameAndType:
            raise MalformedClassFile(f"constant {idx} is not name-and-type")
        return self.utf8(entry[1]), self.utf8(entry[2])

    def member_ref(self, idx):
        entry = self.pool.get(idx)
        if not entry or entry[0] not in (CONSTANT_Fieldref, CONSTANT_Methodref,
                                         CONSTANT_InterfaceMethodref):
            raise MalformedClassFile(f"constant {idx} is not a member ref")
        cls = self.class_name(entry[1])
        name, desc = self.name_and_type(entry[2])
        return cls, name, desc

    def describe(self, idx) -> str:
        """Symbolic, index-free rendering of any loadable constant."""
        entry = self.pool.get(idx)
        if entry is None:
            return f"<bad:{idx}>"
        tag = entry[0]
        if tag == CONSTANT_Utf8:
            return f"utf8 {entry[1]!r}"
        if tag == CONSTANT_Integer:
            return f"int {struct.unpack('>i', entry[1])[0]}"
        if tag == CONSTANT_Float:
            return f"float {entry[1].hex()}"
        if tag == CONSTANT_Long:
            return f"long {struct.unpack('>q', entry[1])[0]}"
        if tag == CONSTANT_Double:
            return f"double {entry[1].hex()}"
        if tag == CONSTANT_Class:
            return f"class {self.utf8(entry[1])}"
        if tag == CONSTANT_String:
            return f"string {self.utf8(entry[1])!r}"
        if tag in (CONSTANT_Fieldref, CONSTANT_Methodref, CONSTANT_InterfaceMethodref):
            kind = {CONSTANT_Fieldref: "field", CONSTANT_Methodref: "method",
                    CONSTANT_InterfaceMethodref: "imethod"}[tag]
            cls, name, desc = self.member_ref(idx)
            return f"{kind} {cls}.{name}:{desc}"
        if tag == CONSTANT_NameAndType:
            name, desc = self.name_and_type(idx)
            return f"nameandtype {name}:{desc}"
        if tag == CONSTANT_MethodHandle:
            return f"handle {_HANDLE_KINDS.get(entry[1], entry[1])} {self.describe(entry[2])}"
        if tag == CONSTANT_MethodType:
            return f"methodtype {self.utf8(entry[1])}"
        if tag in (CONSTANT_Dynamic, CONSTANT_InvokeDynamic):
            name, desc = self.name_and_type(entry[2])
            bsm = "?"
            if entry[1] < len(self.bootstrap_methods):
                handle, args = self.bootstrap_methods[entry[1]]
                bsm = self.describe(handle) + "(" + ", ".join(self.describe(a) for a in args) + ")"
            return f"dynamic {name}:{desc} bootstrap={bsm}"
        if tag in (CONSTANT_Module, CONSTANT_Package):
            return f"module {self.utf8(entry[1])}"
        return f"<tag{tag}>"


def _disassemble(cd: _ClassData, code_attr: bytes):
    """Render a Code attribute into canonical lines plus invoke targets."""
    r = _Reader(code_attr)
    max_stack = r.u2()
    max_locals = r.u2()
    code = r.raw(r.u4())
    lines = [f"stack={max_stack} locals={max_locals}"]
    calls = []
    dynamic = False
    pos = 0
    n = len(code)
    while pos < n:
        opcode = code[pos]
        base = pos
        pos += 1
        if opcode not in _OPCODES:
            raise MalformedClassFile(f"unknown opcode {opcode} at {base}")
        mnemonic, kind = _OPCODES[opcode]
        operand = ""
        if kind == "":
            pass
        elif kind == "b":
            operand = str(struct.unpack_from(">b", code, pos)[0]); pos += 1
        elif kind == "B":
            operand = str(code[pos]); pos += 1
        elif kind == "s":
            operand = str(struct.unpack_from(">h", code, pos)[0]); pos += 2
        elif kind == "c1":
            operand = cd.describe(code[pos]); pos += 1
        elif kind == "c2":
            idx = struct.unpack_from(">H", code, pos)[0]; pos += 2
            operand = cd.describe(idx)
            if mnemonic in _INVOKES:
                calls.append(cd.member_ref(idx))
        elif kind == "j2":
            operand = f"{struct.unpack_from('>h', code, pos)[0]:+d}"; pos += 2
        elif kind == "j4":
            operand = f"{struct.unpack_from('>i', code, pos)[0]:+d}"; pos += 4
        elif kind == "iinc":
            operand = f"{code[pos]} {struct.unpack_from('>b', code, pos + 1)[0]:+d}"; pos += 2
        elif kind == "atype":
            operand = _ATYPES.get(code[pos], str(code[pos])); pos += 1
        elif kind == "iface":
            idx = struct.unpack_from(">H", code, pos)[0]
            count = code[pos + 2]
            pos += 4
            operand = f"{cd.describe(idx)} count={count}"
            calls.append(cd.member_ref(idx))
        elif kind == "indy":
            idx = struct.unpack_from(">H", code, pos)[0]
            pos += 4
            operand = cd.describe(idx)
            dynamic = True
        elif kind == "marray":
            idx = struct.unpack_from(">H", code, pos)[0]
            dims = code[pos + 2]
            pos += 3
            operand = f"{cd.describe(idx)} dims={dims}"
        elif kind == "wide":
            wop = code[pos]
            wname, wkind = _OPCODES.get(wop, ("?", ""))
            if wname == "iinc":
                idx, const = struct.unpack_from(">Hh", code, pos + 1)
                operand = f"iinc {idx} {const:+d}"
                pos += 5
            else:
                idx = struct.unpack_from(">H", code, pos + 1)[0]
                operand = f"{wname} {idx}"
                pos += 3
        elif kind == "tswitch":
            pad = (4 - ((base + 1) % 4)) % 4
            p = pos + pad
            default, low, high = struct.unpack_from(">iii", code, p)
            p += 12
            targets = []
            for k in range(high - low + 1):
                targets.append(struct.unpack_from(">i", code, p)[0])
                p += 4
            operand = f"default{default:+d} [{low}..{high}] " + \
                " ".join(f"{t:+d}" for t in targets)
            pos = p
        elif kind == "lswitch":
            pad = (4 - ((base + 1) % 4)) % 4
            p = pos + pad
            default, npairs = struct.unpack_from(">ii", code, p)
            p += 8
            pairs = []
            for k in range(npairs):
                match, off = struct.unpack_from(">ii", code, p)
                p += 8
                pairs.append(f"{match}:{off:+d}")
            operand = f"default{default:+d} " + " ".join(pairs)
            pos = p
        else:
            raise MalformedClassFile(f"unhandled operand kind {kind}")
        rel = base
        lines.append(f"{rel}: {mnemonic} {operand}".rstrip())

    # exception table with symbolic catch types; debug attributes dropped
    ex_count = r.u2()
    for _ in range(ex_count):
        start, end, handler, ctype = r.u2(), r.u2(), r.u2(), r.u2()
        cname = cd.class_name(ctype) if ctype else "any"
        lines.append(f"catch {cname} [{start},{end})->{handler}")
    return lines, calls, dynamic


def _visibility(flags: int) -> str:
    if flags & ACC_PUBLIC:
        return "public"
    if flags & ACC_PROTECTED:
        return "protected"
    if flags & ACC_PRIVATE:
        return "private"
    return "package"


def parse_class(data: bytes):
    """Parse one class file into (class_fqn, [(ApiRef, MethodBody)])."""
    cd = _ClassData(data)
    fqn = cd.this_class.replace("/", ".")
    best_effort = cd.major > SUPPORTED_MAJOR
    out = []
    for flags, name, desc, code_attr in cd.methods:
        ref = ApiRef(class_fqn=fqn, method_name=name, descriptor=desc,
                     visibility=_visibility(flags))
        if best_effort or code_attr is None:
            lines = [f"desc {desc}", "<no-code>" if code_attr is None else "<unsupported>"]
            calls: list = []
            dynamic = False
        else:
            body_lines, calls, dynamic = _disassemble(cd, code_attr)
            lines = [f"desc {desc}"] + body_lines
        canonical = "\n".join(lines)
        body = MethodBody(
            api=ref,
            canonical_code=canonical,
            body_hash=hashlib.sha256(canonical.encode()).hexdigest(),
            dynamic_opaque=dynamic,
            calls=tuple((c.replace("/", "."), m, d) for c, m, d in calls),
        )
        out.append((ref, body))
    return fqn, out, best_effort


def index_jar(jar_path, lib: LibraryId | None = None, version: str | None = None) -> ApiIndex:
    """Index every method of every class in a JAR and build intra-library
    call edges.  Malformed entries become diagnostics, never crashes."""
    index = ApiIndex(lib=lib, version=version)
    parsed: list[tuple[str, list]] = []
    with zipfile.ZipFile(jar_path) as zf:
        for name in sorted(zf.namelist()):
            if not name.endswith(".class") or name.startswith("META-INF/"):
                continue
            if name.endswith("module-info.class"):
                continue
            try:
                data = zf.read(name)
                fqn, methods, best_effort = parse_class(data)
                if best_effort:
                    index.diagnostics.append(
                        Diagnostic("unsupported-major", "constant pool and names only", name))
                parsed.append((fqn, methods))
            except (MalformedClassFile, struct.error, KeyError, IndexError) as e:
                index.diagnostics.append(Diagnostic("malformed-class", str(e), name))

    class_set = {fqn for fqn, _ in parsed}
    by_key: dict[tuple[str, str, str], ApiRef] = {}
    for fqn, methods in parsed:
        for ref, body in methods:
            index.apis[ref] = body
            by_key[(ref.class_fqn, ref.method_name, ref.descriptor)] = ref
    for fqn, methods in parsed:
        for ref, body in methods:
            for ccls, cname, cdesc in body.calls:
                if ccls in class_set:
                    callee = by_key.get((ccls, cname, cdesc))
                    if callee is not None:
                        index.call_edges.add((ref, callee))
                    else:
                        index.external_refs.add((ccls, cname, cdesc))
                else:
                    index.external_refs.add((ccls, cname, cdesc))
    return index


def index_class_files(class_blobs, lib=None, version=None) -> ApiIndex:
    """Like index_jar but over an iterable of raw class-file bytes."""
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for i, blob in enumerate(class_blobs):
            zf.writestr(f"blob{i}.class", blob)
    buf.seek(0)
    return index_jar(buf, lib=lib, version=version)


def reachable_bodies(index: ApiIndex, root: ApiRef) -> set[MethodBody]:
    """root plus the transitive closure over intra-library call edges."""
    if root not in index.apis:
        raise UnknownRoot(str(root))
    adj: dict[ApiRef, list[ApiRef]] = {}
    for a, b in index.call_edges:
        adj.setdefault(a, []).append(b)
    seen = {root}
    stack = [root]
    while stack:
        cur = stack.pop()
        for nxt in adj.get(cur, []):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return {index.apis[r] for r in seen}

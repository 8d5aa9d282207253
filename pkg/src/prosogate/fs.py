"""Attribute-value matrices with reentrancy, and unification over them.

A feature structure is one of four kinds of node:

- an *atom* carrying a string value,
- an *avm* mapping feature names to child structures (an avm with no
  attributes is "top" and unifies with anything),
- a *list* of child structures (a zero-length list is the empty list,
  which only unifies with another empty list or with top).

Reentrancy (structure sharing) is plain Python object identity: two
paths lead to the same node iff they reference the same ``FS`` object.
The JSON surface syntax encodes sharing with ``"#n"`` string tags; see
:func:`parse_avm`.

Unification is non-destructive at the API level: both inputs are copied
into a private workspace, merged with forwarding pointers, and the
result is rebuilt as a fresh, forward-free graph.
"""

from __future__ import annotations

ATOM = "atom"
AVM = "avm"
LIST = "list"


class UnificationFailure(Exception):
    """Internal signal: the two structures carry incompatible information."""


class AvmFormatError(ValueError):
    """Raised for malformed JSON-encoded AVMs (bad tags, bad value types)."""


class FS:
    """A single feature-structure node. Treated as immutable once built."""

    __slots__ = ("kind", "atom", "attrs", "items", "forward")

    def __init__(self, kind, atom=None, attrs=None, items=None):
        self.kind = kind
        self.atom = atom
        self.attrs = attrs if attrs is not None else ({} if kind == AVM else None)
        self.items = items if items is not None else ([] if kind == LIST else None)
        self.forward = None

    def __repr__(self):
        return f"FS({to_json(self)!r})"

    def get(self, *path):
        """Follow a feature path, returning None where it is undefined."""
        node = self
        for feat in path:
            if node.kind != AVM or feat not in node.attrs:
                return None
            node = node.attrs[feat]
        return node


def atom(value):
    return FS(ATOM, atom=value)


def avm(**attrs):
    return FS(AVM, attrs=dict(attrs))


def fs_list(*items):
    return FS(LIST, items=list(items))


def top():
    return FS(AVM)


def is_top(node):
    return node.kind == AVM and not node.attrs


def is_elist(node):
    return node.kind == LIST and not node.items


def copy_fs(node, memo=None):
    """Deep copy preserving reentrancy (shared nodes stay shared)."""
    if memo is None:
        memo = {}
    node = _deref(node)
    key = id(node)
    if key in memo:
        return memo[key]
    new = FS(node.kind, atom=node.atom)
    memo[key] = new
    if node.kind == AVM:
        new.attrs = {k: copy_fs(v, memo) for k, v in node.attrs.items()}
    elif node.kind == LIST:
        new.items = [copy_fs(v, memo) for v in node.items]
    return new


def _deref(node):
    while node.forward is not None:
        node = node.forward
    return node


def unify_mut(x, y):
    """Destructively merge y into x (or vice versa) via forwarding.

    Only ever called on private copies; raises UnificationFailure on
    clash. Returns the representative node.
    """
    x = _deref(x)
    y = _deref(y)
    if x is y:
        return x
    if is_top(x):
        x.forward = y
        return y
    if is_top(y):
        y.forward = x
        return x
    if x.kind != y.kind:
        raise UnificationFailure
    if x.kind == ATOM:
        if x.atom != y.atom:
            raise UnificationFailure
        y.forward = x
        return x
    if x.kind == LIST:
        if len(x.items) != len(y.items):
            raise UnificationFailure
        y.forward = x
        for a, b in zip(list(x.items), list(y.items)):
            unify_mut(a, b)
        return x
    # both AVMs
    y.forward = x
    for feat, val in y.attrs.items():
        if feat in x.attrs:
            unify_mut(x.attrs[feat], val)
        else:
            x.attrs[feat] = val
    return x


def resolve(node, memo=None):
    """Rebuild a forwarded workspace graph into a clean FS.

    Detects cycles introduced by unification (the grammar layer treats a
    cyclic result as failure).
    """
    if memo is None:
        memo = {}
    node = _deref(node)
    key = id(node)
    if key in memo:
        if memo[key] is None:
            raise UnificationFailure  # cycle through attribute edges
        return memo[key]
    memo[key] = None
    new = FS(node.kind, atom=node.atom)
    if node.kind == AVM:
        new.attrs = {k: resolve(v, memo) for k, v in node.attrs.items()}
    elif node.kind == LIST:
        new.items = [resolve(v, memo) for v in node.items]
    memo[key] = new
    return new


def unify(a, b):
    """Unify two feature structures; returns a fresh FS or None on failure.

    Neither input is mutated. Reentrancy within and across the inputs is
    preserved (a shared memo is used, so nodes literally shared between
    ``a`` and ``b`` remain shared in the result).
    """
    memo = {}
    a2 = copy_fs(a, memo)
    b2 = copy_fs(b, memo)
    try:
        return resolve(unify_mut(a2, b2))
    except UnificationFailure:
        return None


def subsumes(a, b):
    """True iff ``a`` is at least as general as ``b``.

    Every piece of information in ``a`` (atoms, attributes, list shape,
    sharing) must be present in ``b``; sharing in ``a`` must map to
    identical nodes in ``b``.
    """
    mapping = {}

    def walk(x, y):
        if id(x) in mapping:
            return mapping[id(x)] is y
        mapping[id(x)] = y
        if is_top(x):
            return True
        if x.kind != y.kind:
            return False
        if x.kind == ATOM:
            return x.atom == y.atom
        if x.kind == LIST:
            return len(x.items) == len(y.items) and all(
                walk(p, q) for p, q in zip(x.items, y.items)
            )
        return all(f in y.attrs and walk(v, y.attrs[f]) for f, v in x.attrs.items())

    return walk(a, b)


def equivalent(a, b):
    """Structural identity up to tag renaming."""
    return canonical(a) == canonical(b)


def canonical(node):
    """Canonical string form; equal strings iff equivalent structures.

    Shared nodes are numbered in first-visit order, so the form is
    independent of the tag names used when the structure was written.
    """
    refcount = {}

    def count(n):
        k = id(n)
        refcount[k] = refcount.get(k, 0) + 1
        if refcount[k] > 1:
            return
        if n.kind == AVM:
            for v in sorted(n.attrs):
                count(n.attrs[v])
        elif n.kind == LIST:
            for v in n.items:
                count(v)

    count(node)
    tags = {}
    out = []

    def emit(n):
        k = id(n)
        if refcount[k] > 1:
            if k in tags:
                out.append(f"#{tags[k]}")
                return
            tags[k] = len(tags) + 1
            out.append(f"#{tags[k]}=")
        if n.kind == ATOM:
            out.append(f"'{n.atom}")
        elif n.kind == LIST:
            out.append("<")
            for v in n.items:
                emit(v)
                out.append(" ")
            out.append(">")
        else:
            out.append("[")
            for f in sorted(n.attrs):
                out.append(f + ":")
                emit(n.attrs[f])
                out.append(" ")
            out.append("]")

    emit(node)
    return "".join(out)


def check_features(node, declared, where=""):
    """Validate that every attribute name is in the declared set.

    Raises AvmFormatError naming the offending feature; this is a
    grammar-format error, distinct from unification failure.
    """
    seen = set()

    def walk(n):
        if id(n) in seen:
            return
        seen.add(id(n))
        if n.kind == AVM:
            for f, v in n.attrs.items():
                if f not in declared:
                    raise AvmFormatError(
                        f"undeclared feature {f!r}{' in ' + where if where else ''}"
                    )
                walk(v)
        elif n.kind == LIST:
            for v in n.items:
                walk(v)

    walk(node)


def parse_avm(obj, tags=None):
    """Build an FS from its JSON encoding.

    Encoding rules:

    - a string not starting with ``#`` is an atom;
    - an array is a list;
    - an object is an AVM, except an object with the single key ``"#n"``
      which *defines* tag ``n`` as its value;
    - the string ``"#n"`` *references* tag ``n`` (forward references are
      allowed; an unconstrained reference resolves to top).

    ``tags`` lets callers share one tag namespace across several encoded
    values (used by rule schemata, whose daughters and mother share tags).
    """
    if tags is None:
        tags = {}

    def build(o):
        if isinstance(o, str):
            if o.startswith("#"):
                return tags.setdefault(o, top())
            return atom(o)
        if isinstance(o, list):
            return fs_list(*[build(v) for v in o])
        if isinstance(o, dict):
            tag_keys = [k for k in o if k.startswith("#")]
            if tag_keys:
                if len(o) != 1:
                    raise AvmFormatError(
                        f"tag definition {tag_keys[0]!r} must be the only key"
                    )
                name = tag_keys[0]
                node = tags.setdefault(name, top())
                body = build(o[name])
                merged = unify_mut(_deref(node), body)
                tags[name] = merged
                return merged
            node = FS(AVM)
            for f, v in o.items():
                node.attrs[f] = build(v)
            return node
        raise AvmFormatError(f"bad AVM value of type {type(o).__name__}")

    try:
        return resolve(build(obj))
    except UnificationFailure as exc:
        raise AvmFormatError("inconsistent tag definitions in AVM") from exc


def to_json(node):
    """Inverse of parse_avm: emit the JSON encoding, inventing tag names."""
    refcount = {}

    def count(n):
        k = id(n)
        refcount[k] = refcount.get(k, 0) + 1
        if refcount[k] > 1:
            return
        if n.kind == AVM:
            for v in n.attrs.values():
                count(v)
        elif n.kind == LIST:
            for v in n.items:
                count(v)

    count(node)
    tags = {}

    def emit(n):
        k = id(n)
        if refcount[k] > 1:
            if k in tags:
                return tags[k]
            tags[k] = f"#{len(tags) + 1}"
            return {tags[k]: emit_body(n)}
        return emit_body(n)

    def emit_body(n):
        if n.kind == ATOM:
            return n.atom
        if n.kind == LIST:
            return [emit(v) for v in n.items]
        return {f: emit(v) for f, v in n.attrs.items()}

    return emit(node)

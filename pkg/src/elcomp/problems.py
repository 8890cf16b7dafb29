"""Line-oriented problem files.

Sections in square brackets, `key = value` lines, `#` comments:

    [domain]            dim, lo, hi, n (one value per axis)
    [species k]         a11..a22, b1, b2, c, f, g (expressions, defaults:
                        identity diffusion, everything else 0)
    [coupling]          mKL = expression (default 0)
    [quasilinear]       fluxK_I, FK, optional closed-form partials
                        (dfluxK_I_dpJ, dfluxK_I_du, dFK_duJ, dFK_dpI)

With a [quasilinear] section the species sections may only carry data
(f, g) and [coupling] is not allowed; the result is a QuasiSpec.
"""

from __future__ import annotations

import re

from .assembly import ScalarOperatorSpec, SystemSpec
from .errors import ParseError, ValidationError
from .expressions import const, parse_expr
from .mesh import build_grid
from .quasilinear import QuasiSpec

_SECTION_RE = re.compile(r"^\[\s*([a-z]+)(?:\s+(\d+))?\s*\]$")
_COUPLING_RE = re.compile(r"^m(\d)(\d)$|^m(\d+)_(\d+)$")
_FLUX_RE = re.compile(r"^flux(\d+)_(\d+)$")
_REACTION_RE = re.compile(r"^F(\d+)$")
_PARTIAL_RES = (
    re.compile(r"^dflux(\d+)_(\d+)_dp(\d+)$"),
    re.compile(r"^dflux(\d+)_(\d+)_du$"),
    re.compile(r"^dF(\d+)_du(\d+)$"),
    re.compile(r"^dF(\d+)_dp(\d+)$"),
)


def _split_sections(lines):
    """[(name, index, lineno, {key: (value, lineno)})] in file order."""
    sections = []
    current = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            m = _SECTION_RE.match(line)
            if not m:
                raise ParseError(f"malformed section header {line!r}", line=lineno)
            name = m.group(1)
            index = int(m.group(2)) if m.group(2) else None
            if name == "species" and index is None:
                raise ParseError("species section needs an index", line=lineno)
            if name != "species" and index is not None:
                raise ParseError(f"section [{name}] takes no index", line=lineno)
            for prev_name, prev_index, _, _ in sections:
                if (prev_name, prev_index) == (name, index):
                    raise ParseError(f"duplicate section {line!r}", line=lineno)
            current = (name, index, lineno, {})
            sections.append(current)
            continue
        if current is None:
            raise ParseError("key line before any section header", line=lineno)
        if "=" not in line:
            raise ParseError(f"expected key = value, got {line!r}", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ParseError(f"expected key = value, got {line!r}", line=lineno)
        if key in current[3]:
            raise ParseError(f"duplicate key {key!r} in section", line=lineno)
        current[3][key] = (value, lineno)
    return sections


def _expr(value: str, lineno: int, key: str):
    try:
        return parse_expr(value)
    except ParseError as err:
        raise ParseError(
            f"{key}: {err.message}", offset=err.offset, expected=err.expected,
            line=lineno,
        ) from err


def _floats(value: str, lineno: int, key: str, count: int):
    parts = value.replace(",", " ").split()
    try:
        out = tuple(float(p) for p in parts)
    except ValueError:
        raise ParseError(f"{key}: expected numbers, got {value!r}", line=lineno)
    if len(out) != count:
        raise ParseError(f"{key}: expected {count} value(s)", line=lineno)
    return out


def _ints(value: str, lineno: int, key: str, count: int):
    parts = value.replace(",", " ").split()
    try:
        out = tuple(int(p) for p in parts)
    except ValueError:
        raise ParseError(f"{key}: expected integers, got {value!r}", line=lineno)
    if len(out) != count:
        raise ParseError(f"{key}: expected {count} value(s)", line=lineno)
    return out


def _build_domain(keys):
    for required in ("dim", "lo", "hi", "n"):
        if required not in keys:
            raise ValidationError(f"[domain] is missing {required!r}")
    value, lineno = keys["dim"]
    dim = _ints(value, lineno, "dim", 1)[0]
    if dim not in (1, 2):
        raise ValidationError(f"dim must be 1 or 2, got {dim}")
    lo = _floats(*keys["lo"], key="lo", count=dim)
    hi = _floats(*keys["hi"], key="hi", count=dim)
    n = _ints(*keys["n"], key="n", count=dim)
    unknown = set(keys) - {"dim", "lo", "hi", "n"}
    if unknown:
        raise ValidationError(f"[domain] has unknown key(s) {sorted(unknown)}")
    return build_grid(dim, lo, hi, n)


def _species_operator(keys, dim: int, k: int):
    a_keys = {f"a{i + 1}{j + 1}": (i, j) for i in range(dim) for j in range(dim)}
    b_keys = {f"b{i + 1}": i for i in range(dim)}
    allowed = set(a_keys) | set(b_keys) | {"c", "f", "g"}
    unknown = set(keys) - allowed
    if unknown:
        raise ValidationError(
            f"[species {k}] has unknown key(s) {sorted(unknown)} for dim {dim}"
        )
    a = [
        [const(1.0) if i == j else const(0.0) for j in range(dim)]
        for i in range(dim)
    ]
    for key, (i, j) in a_keys.items():
        if key in keys:
            a[i][j] = _expr(*keys[key], key=key)
    b = [const(0.0)] * dim
    for key, i in b_keys.items():
        if key in keys:
            b[i] = _expr(*keys[key], key=key)
    c = _expr(*keys["c"], key="c") if "c" in keys else const(0.0)
    op = ScalarOperatorSpec(
        tuple(tuple(row) for row in a), tuple(b), c
    )
    f = _expr(*keys["f"], key="f") if "f" in keys else const(0.0)
    g = _expr(*keys["g"], key="g") if "g" in keys else const(0.0)
    return op, f, g


def _parse_coupling(keys, n: int):
    m = [[const(0.0)] * n for _ in range(n)]
    for key, (value, lineno) in keys.items():
        match = _COUPLING_RE.match(key)
        if not match:
            raise ValidationError(f"[coupling] has unknown key {key!r}")
        groups = [g for g in match.groups() if g is not None]
        k, l = int(groups[0]), int(groups[1])
        if not (1 <= k <= n and 1 <= l <= n):
            raise ValidationError(
                f"coupling {key} references species outside 1..{n}"
            )
        m[k - 1][l - 1] = _expr(value, lineno, key)
    return tuple(tuple(row) for row in m)


def _parse_quasilinear(keys, n: int, dim: int):
    flux = [[None] * dim for _ in range(n)]
    reactions = [None] * n
    partials = {}
    for key, (value, lineno) in keys.items():
        match = _FLUX_RE.match(key)
        if match:
            k, i = int(match.group(1)), int(match.group(2))
            if not (1 <= k <= n and 1 <= i <= dim):
                raise ValidationError(f"{key} outside species 1..{n}, dim {dim}")
            flux[k - 1][i - 1] = _expr(value, lineno, key)
            continue
        match = _REACTION_RE.match(key)
        if match:
            k = int(match.group(1))
            if not 1 <= k <= n:
                raise ValidationError(f"{key} references species outside 1..{n}")
            reactions[k - 1] = _expr(value, lineno, key)
            continue
        if any(rx.match(key) for rx in _PARTIAL_RES):
            partials[key] = _expr(value, lineno, key)
            continue
        raise ValidationError(f"[quasilinear] has unknown key {key!r}")
    for k in range(n):
        for i in range(dim):
            if flux[k][i] is None:
                raise ValidationError(f"[quasilinear] is missing flux{k + 1}_{i + 1}")
        if reactions[k] is None:
            raise ValidationError(f"[quasilinear] is missing F{k + 1}")
    return tuple(tuple(row) for row in flux), tuple(reactions), partials


def parse_problem(text: str):
    """SystemSpec or QuasiSpec from problem-file text."""
    sections = _split_sections(text.splitlines())
    by_name = {}
    species = {}
    for name, index, lineno, keys in sections:
        if name == "species":
            species[index] = (lineno, keys)
        elif name in ("domain", "coupling", "quasilinear"):
            by_name[name] = keys
        else:
            raise ParseError(f"unknown section [{name}]", line=lineno)
    if "domain" not in by_name:
        raise ValidationError("problem file needs a [domain] section")
    grid = _build_domain(by_name["domain"])
    if not species:
        raise ValidationError("problem file needs at least [species 1]")
    n = max(species)
    missing = [k for k in range(1, n + 1) if k not in species]
    if missing:
        raise ValidationError(f"species sections must be contiguous; missing {missing}")
    quasi = "quasilinear" in by_name
    ops, fs, gs = [], [], []
    for k in range(1, n + 1):
        _, keys = species[k]
        if quasi:
            extra = set(keys) - {"f", "g"}
            if extra:
                raise ValidationError(
                    f"[species {k}] may only set f, g in a quasilinear problem "
                    f"(got {sorted(extra)})"
                )
        op, f, g = _species_operator(keys, grid.dim, k)
        ops.append(op)
        fs.append(f)
        gs.append(g)
    if quasi:
        if "coupling" in by_name:
            raise ValidationError(
                "[coupling] is not allowed in a quasilinear problem; put the "
                "state dependence into the reactions"
            )
        flux, reactions, partials = _parse_quasilinear(
            by_name["quasilinear"], n, grid.dim
        )
        qs = QuasiSpec(grid, flux, reactions, tuple(fs), tuple(gs), partials)
        qs.validate()
        return qs
    m = _parse_coupling(by_name.get("coupling", {}), n)
    spec = SystemSpec(grid, tuple(ops), m, tuple(fs), tuple(gs))
    spec.validate()
    return spec


def load_problem(path):
    """Parse a problem file from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_problem(fh.read())

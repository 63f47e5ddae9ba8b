"""Text serialization of :class:`LinearModel`: fixed-format MPS and an algebraic LP format.

Both writers are deterministic and both readers restore the exact model,
including variable roles, row provenance and the objective constant, which
are carried in comment lines. Numbers are written as exact decimals when
possible and otherwise as round-tripping float literals.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

import numpy as np

from qlin.errors import ParseError
from qlin.instance import EQ, GE, LE
from qlin.models import LinearModel, Row, Variable

MPS, LP_TEXT = "mps", "lp"
FORMATS = (MPS, LP_TEXT)
NAME_WIDTH = 8
OBJ_ROW = "OBJ"

INF = math.inf
_MPS_SENSE = {LE: "L", GE: "G", EQ: "E"}
_SENSE_FROM_MPS = {v: k for k, v in _MPS_SENSE.items()}


def format_value(v) -> str:
    """Shortest exact text for ``v``; non-terminating rationals fall back to the shortest round-tripping float."""
    f = Fraction(v)
    if f.denominator == 1:
        return str(f.numerator)
    d = f.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d == 1:
        # terminating decimal: scale until integral
        k = 0
        while (f * 10 ** k).denominator != 1:
            k += 1
        digits = str(abs((f * 10 ** k).numerator)).rjust(k + 1, "0")
        text = f"{digits[:-k]}.{digits[-k:]}"
        return "-" + text if f < 0 else text
    return np.format_float_positional(float(f), unique=True, trim="-")


def parse_value(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad number {text!r}") from exc


def short_names(names, width: int = NAME_WIDTH, prefix: str = "C") -> list[str]:
    """Map names to unique tokens of at most ``width`` characters without spaces.

    Names that already fit are kept; the rest become ``prefix`` plus their
    position, so the mapping depends only on the input order.
    """
    out: list[str | None] = [None] * len(names)
    taken = set()
    for k, nm in enumerate(names):
        if 0 < len(nm) <= width and not re.search(r"\s", nm) and nm not in taken and nm != OBJ_ROW:
            out[k] = nm
            taken.add(nm)
    for k, nm in enumerate(names):
        if out[k] is not None:
            continue
        cand = f"{prefix}{k}"
        bump = 0
        while cand in taken or len(cand) > width:
            bump += 1
            cand = f"{prefix}{k}_{bump}"[-width:]
        out[k] = cand
        taken.add(cand)
    return out


def _check_token(text: str, what: str):
    if not text or re.search(r"\s", text):
        raise ParseError(f"{what} must be a non-empty token without spaces: {text!r}")


def emit_model(model: LinearModel, fmt: str = MPS) -> str:
    """Serialize ``model`` in ``fmt`` (``"mps"`` or ``"lp"``)."""
    if fmt == MPS:
        return _emit_mps(model)
    if fmt == LP_TEXT:
        return _emit_lp(model)
    raise ValueError(f"unknown model format {fmt!r}")


def read_model(text: str, fmt: str = MPS) -> LinearModel:
    """Parse text produced by :func:`emit_model`."""
    if fmt == MPS:
        return _read_mps(text)
    if fmt == LP_TEXT:
        return _read_lp(text)
    raise ValueError(f"unknown model format {fmt!r}")


def _header(model: LinearModel, lead: str) -> list[str]:
    return [
        f"{lead} qlin-model variant={model.variant or '-'} cuts={','.join(model.cuts) or '-'} n={model.n}",
        f"{lead} qlin-constant {format_value(model.constant)}",
    ]


def _parse_header(line: str, model: LinearModel):
    parts = line.split()
    if parts[1] == "qlin-model":
        kv = dict(p.split("=", 1) for p in parts[2:])
        model.variant = None if kv["variant"] == "-" else kv["variant"]
        model.cuts = () if kv["cuts"] == "-" else tuple(kv["cuts"].split(","))
        model.n = int(kv["n"])
        return True
    if parts[1] == "qlin-constant":
        model.constant = parse_value(parts[2])
        return True
    return False


# ---------------------------------------------------------------- MPS


def _field_line(*fields) -> str:
    # fixed columns 2-3, 5-12, 15-22, 25-36, 40-47, 50-61
    code, f1, f2, f3, f4, f5 = (list(fields) + [""] * 6)[:6]
    line = f" {code:<2} {f1:<8}  {f2:<8}  {f3:>12}   {f4:<8}  {f5:>12}"
    return line.rstrip()


def _emit_mps(model: LinearModel) -> str:
    vnames = short_names([v.name for v in model.variables], prefix="C")
    rnames = short_names([r.name for r in model.rows], prefix="R")
    lines = _header(model, "*")
    for v, short in zip(model.variables, vnames):
        _check_token(v.role, "role")
        lines.append(f"* var {short} {v.role} {v.name}")
    for r, short in zip(model.rows, rnames):
        lines.append(f"* row {short} {r.name} {r.provenance}")
    lines.append(f"NAME          {(model.variant or 'MODEL').upper()[:8]}")
    lines.append("ROWS")
    lines.append(f" N  {OBJ_ROW}")
    for r, short in zip(model.rows, rnames):
        lines.append(f" {_MPS_SENSE[r.sense]}  {short}")

    # column-major entries
    entries: list[list[tuple[str, Fraction]]] = [[] for _ in model.variables]
    for j, a in sorted(model.objective.items()):
        if a != 0:
            entries[j].append((OBJ_ROW, a))
    for r, short in zip(model.rows, rnames):
        for j, a in sorted(r.coeffs.items()):
            entries[j].append((short, a))

    lines.append("COLUMNS")
    in_int = False
    markers = 0
    for j, v in enumerate(model.variables):
        if v.binary and not in_int:
            lines.append(_field_line("", f"M{markers}", "'MARKER'", "", "'INTORG'"))
            in_int = True
        elif not v.binary and in_int:
            lines.append(_field_line("", f"M{markers}", "'MARKER'", "", "'INTEND'"))
            in_int = False
            markers += 1
        items = entries[j] or [(OBJ_ROW, Fraction(0))]
        for k in range(0, len(items), 2):
            pair = items[k:k + 2]
            fields = ["", vnames[j], pair[0][0], format_value(pair[0][1])]
            if len(pair) > 1:
                fields += [pair[1][0], format_value(pair[1][1])]
            lines.append(_field_line(*fields))
    if in_int:
        lines.append(_field_line("", f"M{markers}", "'MARKER'", "", "'INTEND'"))

    lines.append("RHS")
    rhs = []
    if model.constant != 0:
        # solvers read the objective-row RHS as the negated constant
        rhs.append((OBJ_ROW, -model.constant))
    rhs += [(short, r.rhs) for r, short in zip(model.rows, rnames) if r.rhs != 0]
    for k in range(0, len(rhs), 2):
        pair = rhs[k:k + 2]
        fields = ["", "RHS", pair[0][0], format_value(pair[0][1])]
        if len(pair) > 1:
            fields += [pair[1][0], format_value(pair[1][1])]
        lines.append(_field_line(*fields))

    lines.append("BOUNDS")
    for v, short in zip(model.variables, vnames):
        lo, hi = v.lower, v.upper
        if lo == hi:
            lines.append(_field_line("FX", "BND", short, format_value(lo)))
            continue
        if lo == -INF and hi == INF:
            lines.append(_field_line("FR", "BND", short))
            continue
        if lo == -INF:
            lines.append(_field_line("MI", "BND", short))
        else:
            lines.append(_field_line("LO", "BND", short, format_value(lo)))
        if hi == INF:
            lines.append(_field_line("PL", "BND", short))
        else:
            lines.append(_field_line("UP", "BND", short, format_value(hi)))
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def _read_mps(text: str) -> LinearModel:
    model = LinearModel()
    var_meta: dict[str, tuple[str, str]] = {}
    row_meta: dict[str, tuple[str, str]] = {}
    section = None
    row_order: list[tuple[str, str]] = []
    col_index: dict[str, int] = {}
    row_index: dict[str, int] = {}
    integer = False
    coeffs: list[dict] = []
    rhs: dict[str, Fraction] = {}
    bounds: dict[str, list] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        if raw.startswith("*"):
            parts = raw.split()
            if len(parts) >= 2 and _parse_header(raw, model):
                continue
            if len(parts) >= 4 and parts[1] == "var":
                var_meta[parts[2]] = (parts[3], " ".join(parts[4:]) or parts[2])
            elif len(parts) >= 4 and parts[1] == "row":
                row_meta[parts[2]] = (parts[3], " ".join(parts[4:]))
            continue
        if not raw[0].isspace():
            section = raw.split()[0]
            if section not in ("NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"):
                raise ParseError(f"line {lineno}: unknown section {section!r}")
            continue
        parts = raw.split()
        if section == "ROWS":
            sense, name = parts
            if sense == "N":
                continue
            if sense not in _SENSE_FROM_MPS:
                raise ParseError(f"line {lineno}: bad row type {sense!r}")
            row_index[name] = len(row_order)
            row_order.append((name, _SENSE_FROM_MPS[sense]))
            coeffs.append({})
        elif section == "COLUMNS":
            if len(parts) >= 3 and parts[1] == "'MARKER'":
                integer = parts[2] == "'INTORG'"
                continue
            col = parts[0]
            if col not in col_index:
                col_index[col] = len(model.variables)
                role, full = var_meta.get(col, ("x" if integer else "aux", col))
                model.variables.append(Variable(full, role, Fraction(0), INF, integer))
            j = col_index[col]
            for rname, val in zip(parts[1::2], parts[2::2]):
                a = parse_value(val)
                if rname == OBJ_ROW:
                    if a != 0:
                        model.objective[j] = a
                elif rname in row_index:
                    if a != 0:
                        coeffs[row_index[rname]][j] = a
                else:
                    raise ParseError(f"line {lineno}: unknown row {rname!r}")
        elif section == "RHS":
            for rname, val in zip(parts[1::2], parts[2::2]):
                rhs[rname] = parse_value(val)
        elif section == "BOUNDS":
            kind, col = parts[0], parts[2]
            if col not in col_index:
                raise ParseError(f"line {lineno}: unknown column {col!r}")
            bounds.setdefault(col, []).append((kind, parse_value(parts[3]) if len(parts) > 3 else None))
        else:
            raise ParseError(f"line {lineno}: data outside a section")
    for col, items in bounds.items():
        v = model.variables[col_index[col]]
        for kind, val in items:
            if kind == "FX":
                v.lower = v.upper = val
            elif kind == "FR":
                v.lower, v.upper = -INF, INF
            elif kind == "MI":
                v.lower = -INF
            elif kind == "PL":
                v.upper = INF
            elif kind == "LO":
                v.lower = val
            elif kind == "UP":
                v.upper = val
            else:
                raise ParseError(f"unsupported bound type {kind!r}")
    if OBJ_ROW in rhs:
        model.constant = -rhs[OBJ_ROW]
    for (name, sense), cf in zip(row_order, coeffs):
        full, prov = row_meta.get(name, (name, "mps"))
        model.rows.append(Row(full, cf, sense, rhs.get(name, Fraction(0)), prov))
    return model


# ---------------------------------------------------------------- LP text


def _term(a: Fraction, name: str, first: bool) -> str:
    if a < 0:
        sign = "-" if first else "- "
    else:
        sign = "" if first else "+ "
    return f"{sign}{format_value(abs(a))} {name}"


def _expr(coeffs: dict, names: list[str]) -> str:
    items = [(j, a) for j, a in sorted(coeffs.items()) if a != 0]
    if not items:
        return f"0 {names[0]}" if names else "0"
    return " ".join(_term(a, names[j], k == 0) for k, (j, a) in enumerate(items))


def _emit_lp(model: LinearModel) -> str:
    names = [v.name for v in model.variables]
    if len(set(names)) != len(names):
        names = short_names(names, width=64, prefix="v")
    for nm in names:
        _check_token(nm, "variable name")
    lines = _header(model, "\\")
    for v, nm in zip(model.variables, names):
        lines.append(f"\\ var {nm} {v.role}")
    lines.append("Minimize")
    obj = _expr(model.objective, names)
    if model.constant != 0:
        c = model.constant
        obj += f" {'-' if c < 0 else '+'} {format_value(abs(c))}"
    lines.append(f" obj: {obj}")
    lines.append("Subject To")
    rnames = short_names([r.name for r in model.rows], width=64, prefix="r")
    for r, rn in zip(model.rows, rnames):
        lines.append(f"\\ {r.provenance}")
        lines.append(f" {rn}: {_expr(r.coeffs, names)} {r.sense} {format_value(r.rhs)}")
    lines.append("Bounds")
    for v, nm in zip(model.variables, names):
        lo, hi = v.lower, v.upper
        if lo == hi:
            lines.append(f" {nm} = {format_value(lo)}")
        elif lo == -INF and hi == INF:
            lines.append(f" {nm} free")
        else:
            los = "-inf" if lo == -INF else format_value(lo)
            his = "+inf" if hi == INF else format_value(hi)
            lines.append(f" {los} <= {nm} <= {his}")
    binaries = [nm for v, nm in zip(model.variables, names) if v.binary]
    if binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(binaries))
    lines.append("End")
    return "\n".join(lines) + "\n"


def _parse_expr(text: str, index: dict[str, int], lineno: int) -> tuple[dict, Fraction]:
    tokens = text.split()
    coeffs: dict[int, Fraction] = {}
    const = Fraction(0)
    k = 0
    sign = 1
    while k < len(tokens):
        tok = tokens[k]
        if tok in ("+", "-"):
            sign = -1 if tok == "-" else 1
            k += 1
            continue
        if tok.startswith("-") and len(tok) > 1:
            sign, tok = -1, tok[1:]
        val = parse_value(tok)
        if k + 1 < len(tokens) and tokens[k + 1] in index:
            j = index[tokens[k + 1]]
            if val != 0:
                coeffs[j] = coeffs.get(j, Fraction(0)) + sign * val
            k += 2
        elif k + 1 < len(tokens) and tokens[k + 1] not in ("+", "-"):
            raise ParseError(f"line {lineno}: unknown variable {tokens[k + 1]!r}")
        else:
            const += sign * val
            k += 1
        sign = 1
    return coeffs, const


def _read_lp(text: str) -> LinearModel:
    model = LinearModel()
    roles: list[tuple[str, str]] = []
    index: dict[str, int] = {}
    section = None
    pending_prov = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            parts = line.split()
            if len(parts) >= 2 and parts[1].startswith("qlin-"):
                _parse_header(line, model)
            elif len(parts) == 4 and parts[1] == "var" and section is None:
                roles.append((parts[2], parts[3]))
            elif section == "Subject To":
                pending_prov = line[1:].strip()
            continue
        if line in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
            section = line
            if section == "Minimize":
                for nm, role in roles:
                    index[nm] = len(model.variables)
                    model.variables.append(Variable(nm, role, Fraction(0), INF, False))
            continue
        if section == "Minimize":
            body = line.split(":", 1)[1]
            model.objective, model.constant = _parse_expr(body, index, lineno)
        elif section == "Subject To":
            name, body = line.split(":", 1)
            m = re.match(r"(.*)\s(<=|>=|=)\s(\S+)$", body)
            if not m:
                raise ParseError(f"line {lineno}: malformed constraint")
            coeffs, const = _parse_expr(m.group(1), index, lineno)
            if const != 0:
                raise ParseError(f"line {lineno}: constant on the left-hand side")
            model.rows.append(Row(name.strip(), coeffs, m.group(2), parse_value(m.group(3)),
                                  pending_prov or "lp"))
            pending_prov = None
        elif section == "Bounds":
            parts = line.split()
            if len(parts) == 2 and parts[1] == "free":
                v = model.variables[index[parts[0]]]
                v.lower, v.upper = -INF, INF
            elif len(parts) == 3 and parts[1] == "=":
                v = model.variables[index[parts[0]]]
                v.lower = v.upper = parse_value(parts[2])
            elif len(parts) == 5:
                v = model.variables[index[parts[2]]]
                v.lower = -INF if parts[0] == "-inf" else parse_value(parts[0])
                v.upper = INF if parts[4] == "+inf" else parse_value(parts[4])
            else:
                raise ParseError(f"line {lineno}: malformed bound")
        elif section == "Binaries":
            for nm in line.split():
                model.variables[index[nm]].binary = True
        else:
            raise ParseError(f"line {lineno}: unexpected text")
    return model

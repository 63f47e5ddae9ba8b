"""Problem data for zero-one quadratic programs, JSON I/O and a seeded generator.

An instance is

    min  c'x + x'Qx
    s.t. h'x + x'Gx >= g           (optional)
         side constraints a'x {<=,>=,=} b
         x binary, some entries possibly fixed

All coefficients are held as exact :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from qlin.errors import DimensionError, GenerationError, ParseError

LE, GE, EQ = "<=", ">=", "="
SENSES = (LE, GE, EQ)

Vector = tuple[Fraction, ...]
Matrix = tuple[Vector, ...]


def to_fraction(value) -> Fraction:
    """Convert a JSON scalar (int, decimal string/float, or ``"p/q"``) to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ParseError(f"boolean is not a number: {value!r}")
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite entry {value!r}")
        return Fraction(value)
    if isinstance(value, (int, str)):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            if isinstance(value, str) and value.strip().lower().lstrip("+-") in ("nan", "inf", "infinity"):
                raise ValueError(f"non-finite entry {value!r}") from exc
            raise ParseError(f"not a number: {value!r}") from exc
    raise ParseError(f"not a number: {value!r}")


def _vector(values, n: int, what: str) -> Vector:
    if not isinstance(values, (list, tuple)):
        raise ParseError(f"{what} must be a list")
    if len(values) != n:
        raise DimensionError(f"{what} has length {len(values)}, expected {n}")
    return tuple(to_fraction(v) for v in values)


def _matrix(rows, n: int, what: str) -> Matrix:
    if not isinstance(rows, (list, tuple)):
        raise ParseError(f"{what} must be a list of rows")
    if len(rows) != n:
        raise DimensionError(f"{what} has {len(rows)} rows, expected {n}")
    return tuple(_vector(r, n, f"{what} row {k}") for k, r in enumerate(rows))


def symmetrize(m: Sequence[Sequence[Fraction]]) -> Matrix:
    n = len(m)
    return tuple(tuple((m[i][j] + m[j][i]) / 2 for j in range(n)) for i in range(n))


@dataclass(frozen=True)
class LinearConstraint:
    coeffs: Vector
    sense: str
    rhs: Fraction

    def holds(self, x: Sequence) -> bool:
        lhs = sum((a * v for a, v in zip(self.coeffs, x) if v), Fraction(0))
        if self.sense == LE:
            return lhs <= self.rhs
        if self.sense == GE:
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class QuadConstraint:
    h: Vector
    G: Matrix
    g: Fraction


@dataclass(frozen=True)
class ProblemInstance:
    n: int
    c: Vector
    Q: Matrix
    quad_constraint: QuadConstraint | None = None
    side_constraints: tuple[LinearConstraint, ...] = ()
    fixed: Mapping[int, int] = field(default_factory=dict)  # 0-based index -> 0/1

    def __post_init__(self):
        n = self.n
        if n < 1:
            raise DimensionError("n must be positive")
        if len(self.c) != n or len(self.Q) != n or any(len(r) != n for r in self.Q):
            raise DimensionError("c/Q dimensions disagree with n")
        qc = self.quad_constraint
        if qc is not None and (len(qc.h) != n or len(qc.G) != n or any(len(r) != n for r in qc.G)):
            raise DimensionError("h/G dimensions disagree with n")
        for con in self.side_constraints:
            if len(con.coeffs) != n:
                raise DimensionError("side constraint length disagrees with n")
            if con.sense not in SENSES:
                raise ParseError(f"unknown sense {con.sense!r}")
        for i, v in self.fixed.items():
            if not 0 <= i < n or v not in (0, 1):
                raise DimensionError(f"bad fixing {i}->{v}")

    @property
    def has_quad(self) -> bool:
        return self.quad_constraint is not None

    @property
    def G(self) -> Matrix | None:
        return None if self.quad_constraint is None else self.quad_constraint.G

    def float_arrays(self) -> dict[str, np.ndarray]:
        out = {"c": np.array(self.c, dtype=float), "Q": np.array(self.Q, dtype=float)}
        if self.quad_constraint is not None:
            out["h"] = np.array(self.quad_constraint.h, dtype=float)
            out["G"] = np.array(self.quad_constraint.G, dtype=float)
        return out

    def with_g(self, g) -> "ProblemInstance":
        qc = self.quad_constraint
        if qc is None:
            raise ValueError("instance has no quadratic constraint")
        return ProblemInstance(self.n, self.c, self.Q, QuadConstraint(qc.h, qc.G, to_fraction(g)),
                               self.side_constraints, dict(self.fixed))


def instance_from_dict(doc: Mapping) -> ProblemInstance:
    if not isinstance(doc, Mapping):
        raise ParseError("instance document must be a JSON object")
    try:
        n = doc["n"]
        c_raw, q_raw = doc["c"], doc["Q"]
    except KeyError as exc:
        raise ParseError(f"missing key {exc.args[0]!r}") from exc
    if isinstance(n, Fraction) and n.denominator == 1:
        n = int(n)
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError("n must be a positive integer")
    c = _vector(c_raw, n, "c")
    Q = symmetrize(_matrix(q_raw, n, "Q"))

    quad = None
    present = [k in doc for k in ("h", "G", "g")]
    if any(present):
        if not all(present):
            raise ParseError("h, G and g must be given together")
        quad = QuadConstraint(_vector(doc["h"], n, "h"), symmetrize(_matrix(doc["G"], n, "G")),
                              to_fraction(doc["g"]))

    side = []
    for k, con in enumerate(doc.get("constraints") or []):
        try:
            coeffs, sense, rhs = con["coeffs"], con["sense"], con["rhs"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"constraint {k} malformed") from exc
        if sense not in SENSES:
            raise ParseError(f"constraint {k}: unknown sense {sense!r}")
        side.append(LinearConstraint(_vector(coeffs, n, f"constraint {k}"), sense, to_fraction(rhs)))

    fixed = {}
    for key, val in (doc.get("fixed") or {}).items():
        try:
            idx = int(key)
        except ValueError as exc:
            raise ParseError(f"fixed index {key!r} is not an integer") from exc
        v = to_fraction(val)
        if v not in (0, 1):
            raise ParseError(f"fixed value for {key} must be 0 or 1")
        if not 1 <= idx <= n:
            raise DimensionError(f"fixed index {idx} outside [1, {n}]")
        fixed[idx - 1] = int(v)
    return ProblemInstance(n, c, Q, quad, tuple(side), fixed)


def _reject_constant(name):
    raise ValueError(f"non-finite entry {name}")


def load_instance(document: str) -> ProblemInstance:
    """Parse an instance JSON document. Matrices are symmetrized as (M + M')/2."""
    try:
        doc = json.loads(document, parse_float=Fraction, parse_int=int, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc)) from exc
    return instance_from_dict(doc)


def read_instance(path) -> ProblemInstance:
    with open(path) as fh:
        return load_instance(fh.read())


def format_number(v: Fraction) -> str:
    """Exact decimal literal when one exists, otherwise a quoted ``"p/q"`` string."""
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    d = v.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f'"{v.numerator}/{v.denominator}"'
    places = max(twos, fives)
    scaled = abs(v.numerator) * (10 ** places // v.denominator)
    digits = str(scaled).rjust(places + 1, "0")
    text = f"{digits[:-places]}.{digits[-places:]}".rstrip("0")
    return ("-" if v < 0 else "") + text


def _vec_text(v) -> str:
    return "[" + ", ".join(format_number(a) for a in v) + "]"


def _mat_text(m, indent: str) -> str:
    inner = (",\n" + indent + "  ").join(_vec_text(r) for r in m)
    return "[\n" + indent + "  " + inner + "\n" + indent + "]"


def save_instance(inst: ProblemInstance) -> str:
    """Serialize to the JSON instance format (keys n, c, Q, h, G, g, constraints, fixed)."""
    parts = [f'  "n": {inst.n}', f'  "c": {_vec_text(inst.c)}', f'  "Q": {_mat_text(inst.Q, "  ")}']
    if inst.quad_constraint is not None:
        qc = inst.quad_constraint
        parts += [f'  "h": {_vec_text(qc.h)}', f'  "G": {_mat_text(qc.G, "  ")}', f'  "g": {format_number(qc.g)}']
    if inst.side_constraints:
        cons = ",\n".join(
            f'    {{"coeffs": {_vec_text(con.coeffs)}, "sense": "{con.sense}", "rhs": {format_number(con.rhs)}}}'
            for con in inst.side_constraints)
        parts.append('  "constraints": [\n' + cons + "\n  ]")
    if inst.fixed:
        fx = ", ".join(f'"{i + 1}": {v}' for i, v in sorted(inst.fixed.items()))
        parts.append('  "fixed": {' + fx + "}")
    return "{\n" + ",\n".join(parts) + "\n}\n"


def _quad_form(M: Matrix, x: Sequence[int]) -> Fraction:
    ones = [i for i, v in enumerate(x) if v]
    return sum((M[i][j] for i in ones for j in ones), Fraction(0))


def evaluate_point(inst: ProblemInstance, x: Sequence[int]) -> dict:
    """Objective, quadratic-constraint left-hand side and feasibility of a binary point."""
    if len(x) != inst.n:
        raise DimensionError(f"point has length {len(x)}, expected {inst.n}")
    if any(v not in (0, 1) for v in x):
        raise ValueError("point must be binary")
    objective = sum((inst.c[i] for i in range(inst.n) if x[i]), Fraction(0)) + _quad_form(inst.Q, x)
    quad_lhs = None
    feasible = all(con.holds(x) for con in inst.side_constraints)
    feasible = feasible and all(x[i] == v for i, v in inst.fixed.items())
    if inst.quad_constraint is not None:
        qc = inst.quad_constraint
        quad_lhs = sum((qc.h[i] for i in range(inst.n) if x[i]), Fraction(0)) + _quad_form(qc.G, x)
        feasible = feasible and quad_lhs >= qc.g
    return {"objective": objective, "quad_lhs": quad_lhs, "feasible": feasible}


def row_products(M: Matrix, x: Sequence[int]) -> list[Fraction]:
    """x_i * (M_i x) for every i."""
    ones = [j for j, v in enumerate(x) if v]
    return [sum((M[i][j] for j in ones), Fraction(0)) if x[i] else Fraction(0) for i in range(len(M))]


@dataclass
class GeneratorConfig:
    n: int
    density: float = 0.5
    coeff_range: int = 10
    cardinality: int | None = None
    with_quad_constraint: bool = False
    seed: int = 0
    side_rows: int = 0  # extra random knapsack-style rows of mixed sense

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")
        if self.coeff_range < 1:
            raise ValueError("coeff_range must be >= 1")
        if self.cardinality is not None and not 0 <= self.cardinality <= self.n:
            raise ValueError("cardinality must lie in [0, n]")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _random_symmetric(rng: np.random.Generator, n: int, density: float, bound: int) -> Matrix:
    m = [[0] * n for _ in range(n)]
    for i in range(n):
        m[i][i] = int(rng.integers(-bound, bound + 1))
        for j in range(i + 1, n):
            if rng.random() < density:
                v = int(rng.integers(1, bound + 1)) * (1 if rng.random() < 0.5 else -1)
                m[i][j] = m[j][i] = v
    return tuple(tuple(Fraction(v) for v in row) for row in m)


def generate_random(config: GeneratorConfig) -> ProblemInstance:
    """Seeded random instance; with a quadratic constraint, ``g`` is met by a sampled side-feasible point."""
    n, B = config.n, config.coeff_range
    rng = np.random.default_rng(config.seed)
    c = tuple(Fraction(int(v)) for v in rng.integers(-B, B + 1, size=n))
    Q = _random_symmetric(rng, n, config.density, B)

    side: list[LinearConstraint] = []
    if config.cardinality is not None:
        side.append(LinearConstraint(tuple(Fraction(1) for _ in range(n)), LE, Fraction(config.cardinality)))
    if config.side_rows:
        # anchor the rows at a random point so X stays nonempty
        anchor = rng.integers(0, 2, size=n)
        if config.cardinality is not None:
            ones = np.flatnonzero(anchor)
            anchor[ones[config.cardinality:]] = 0
        for _ in range(config.side_rows):
            a = rng.integers(1, B + 1, size=n)
            base = int(a @ anchor)
            if rng.random() < 0.5:
                side.append(LinearConstraint(tuple(Fraction(int(v)) for v in a), LE,
                                             Fraction(base + int(rng.integers(0, B + 1)))))
            else:
                side.append(LinearConstraint(tuple(Fraction(int(v)) for v in a), GE,
                                             Fraction(max(0, base - int(rng.integers(0, B + 1))))))

    quad = None
    if config.with_quad_constraint:
        h = tuple(Fraction(int(v)) for v in rng.integers(-B, B + 1, size=n))
        G = _random_symmetric(rng, n, config.density, B)
        for _ in range(n * 64):
            x0 = [int(v) for v in rng.integers(0, 2, size=n)]
            if all(con.holds(x0) for con in side):
                g = sum((h[i] for i in range(n) if x0[i]), Fraction(0)) + _quad_form(G, x0)
                quad = QuadConstraint(h, G, g)
                break
        else:
            raise GenerationError(f"no side-feasible point found in {n * 64} samples")
    return ProblemInstance(n, c, Q, quad, tuple(side), {})


# The two small instances used throughout the docs and tests.

def instance_w1() -> ProblemInstance:
    """min -2 x1 x2  s.t.  2 x1 x2 >= 1."""
    return instance_from_dict({"n": 2, "c": [0, 0], "Q": [[0, -1], [-1, 0]],
                               "h": [0, 0], "G": [[0, 1], [1, 0]], "g": 1})


def instance_w2() -> ProblemInstance:
    """min 4 x1 x2  s.t.  x1 + x2 <= 1."""
    return instance_from_dict({"n": 2, "c": [0, 0], "Q": [[0, 2], [2, 0]],
                               "constraints": [{"coeffs": [1, 1], "sense": "<=", "rhs": 1}]})

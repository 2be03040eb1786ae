"""Field-specification files: a hand-editable text format plus a JSON
encoding, both describing the degree, the four coefficient tables and
optional analysis options.  Serialization uses 17 significant digits so a
double survives a round trip bit-for-bit."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import FieldSpecError
from .polys import PiecewiseField, poly, vf

TABLE_NAMES = ("P1", "Q1", "P2", "Q2")


@dataclass
class FieldSpec:
    degree: int
    tables: dict[str, dict[tuple[int, int], float]]
    window: tuple[float, float, float, float] | None = None
    eps: list[float] = field(default_factory=list)
    phi: str | None = None
    seed: tuple[float, float] | None = None
    horizon: float | None = None

    def __post_init__(self):
        if self.degree < 0:
            raise FieldSpecError("degree must be nonnegative")
        for name in TABLE_NAMES:
            if name not in self.tables:
                raise FieldSpecError(f"missing table {name}")
        for name, table in self.tables.items():
            for (i, j), v in table.items():
                if i < 0 or j < 0:
                    raise FieldSpecError(
                        f"{name}: negative exponent ({i}, {j})")
                if i + j > self.degree:
                    raise FieldSpecError(
                        f"{name}: entry ({i}, {j}) exceeds degree "
                        f"{self.degree}")
        top = sum(abs(v) for t in self.tables.values()
                  for (i, j), v in t.items() if i + j == self.degree)
        if top == 0.0:
            raise FieldSpecError(
                f"no nonzero coefficient of total degree {self.degree}")

    def to_field(self) -> PiecewiseField:
        X = vf(self.tables["P1"], self.tables["Q1"], self.degree)
        Y = vf(self.tables["P2"], self.tables["Q2"], self.degree)
        return PiecewiseField(X, Y, self.degree)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldSpec):
            return NotImplemented
        def clean(t):
            return {k: v for k, v in t.items() if v != 0.0}
        return (self.degree == other.degree
                and all(clean(self.tables[n]) == clean(other.tables[n])
                        for n in TABLE_NAMES)
                and self.window == other.window
                and self.eps == other.eps
                and self.phi == other.phi
                and self.seed == other.seed
                and self.horizon == other.horizon)


def _fmt(v: float) -> str:
    return "%.17g" % v


def serialize_text(spec: FieldSpec) -> str:
    lines = [f"degree {spec.degree}"]
    if spec.window is not None:
        lines.append("window " + " ".join(_fmt(v) for v in spec.window))
    if spec.eps:
        lines.append("eps " + " ".join(_fmt(v) for v in spec.eps))
    if spec.phi is not None:
        lines.append(f"phi {spec.phi}")
    if spec.seed is not None:
        lines.append("seed " + " ".join(_fmt(v) for v in spec.seed))
    if spec.horizon is not None:
        lines.append("horizon " + _fmt(spec.horizon))
    for name in TABLE_NAMES:
        lines.append(f"{name}:")
        for (i, j) in sorted(spec.tables[name]):
            v = spec.tables[name][(i, j)]
            if v != 0.0:
                lines.append(f"{i} {j} {_fmt(v)}")
    return "\n".join(lines) + "\n"


def parse_text(text: str) -> FieldSpec:
    degree = None
    tables: dict[str, dict[tuple[int, int], float]] = {
        n: {} for n in TABLE_NAMES}
    window = None
    eps: list[float] = []
    phi = None
    seed = None
    horizon = None
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.endswith(":"):
            name = line[:-1].strip()
            if name not in TABLE_NAMES:
                raise FieldSpecError(f"line {lineno}: unknown table {name!r}")
            current = name
            continue
        parts = line.split()
        key = parts[0]
        try:
            if key == "degree":
                degree = int(parts[1])
                current = None
            elif key == "window":
                window = tuple(float(v) for v in parts[1:5])
                if len(parts) != 5:
                    raise IndexError
                current = None
            elif key == "eps":
                eps = [float(v) for v in parts[1:]]
                current = None
            elif key == "phi":
                phi = parts[1]
                current = None
            elif key == "seed":
                seed = (float(parts[1]), float(parts[2]))
                current = None
            elif key == "horizon":
                horizon = float(parts[1])
                current = None
            elif current is not None:
                if len(parts) != 3:
                    raise IndexError
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
                tables[current][(i, j)] = v
            else:
                raise FieldSpecError(
                    f"line {lineno}: unexpected line {line!r}")
        except (ValueError, IndexError) as exc:
            raise FieldSpecError(
                f"line {lineno}: cannot parse {line!r}") from exc
    if degree is None:
        raise FieldSpecError("missing 'degree' line")
    return FieldSpec(degree, tables, window, eps, phi, seed, horizon)


def serialize_json(spec: FieldSpec) -> str:
    d: dict = {"degree": spec.degree}
    for name in TABLE_NAMES:
        d[name] = [[i, j, float(_fmt(v))]
                   for (i, j), v in sorted(spec.tables[name].items())
                   if v != 0.0]
    options: dict = {}
    if spec.window is not None:
        options["window"] = list(spec.window)
    if spec.eps:
        options["eps"] = spec.eps
    if spec.phi is not None:
        options["phi"] = spec.phi
    if spec.seed is not None:
        options["seed"] = list(spec.seed)
    if spec.horizon is not None:
        options["horizon"] = spec.horizon
    if options:
        d["options"] = options
    return json.dumps(d, sort_keys=True, indent=2) + "\n"


def parse_json(text: str) -> FieldSpec:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FieldSpecError(f"invalid JSON: {exc}") from exc
    if not isinstance(d, dict) or "degree" not in d:
        raise FieldSpecError("JSON spec must be an object with 'degree'")
    tables: dict[str, dict[tuple[int, int], float]] = {}
    for name in TABLE_NAMES:
        rows = d.get(name, [])
        table = {}
        for row in rows:
            if len(row) != 3:
                raise FieldSpecError(f"{name}: rows must be [i, j, value]")
            table[(int(row[0]), int(row[1]))] = float(row[2])
        tables[name] = table
    options = d.get("options", {})
    window = tuple(options["window"]) if "window" in options else None
    seed = tuple(options["seed"]) if "seed" in options else None
    return FieldSpec(int(d["degree"]), tables, window,
                     list(options.get("eps", [])), options.get("phi"),
                     seed, options.get("horizon"))


def parse(text: str) -> FieldSpec:
    """Dispatch on the leading character: '{' means JSON, otherwise the
    plain-text format."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return parse_json(text)
    return parse_text(text)

"""Core value types shared by every other module.

Everything here is an immutable record: a value rectangle, a menu entry,
the structural kind of a solution, the solved geometric parameters, and
the final mechanism bundle.  JSON (de)serialization round-trips floats
exactly (shortest-repr encoding gives >= 15 significant digits).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, fields


class NonPositiveSide(ValueError):
    """A rectangle side length b1 or b2 is zero or negative."""


class NegativeCorner(ValueError):
    """A rectangle corner coordinate c1 or c2 is negative."""


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned value support [c1, c1+b1] x [c2, c2+b2].

    Parameters
    ----------
    c1, c2 : float
        Lower-left corner, must be >= 0.
    b1, b2 : float
        Side lengths, must be > 0.
    """

    c1: float
    c2: float
    b1: float
    b2: float

    def __post_init__(self) -> None:
        for name in ("b1", "b2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise NonPositiveSide(f"{name} must be finite and > 0, got {v!r}")
        for name in ("c1", "c2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise NegativeCorner(f"{name} must be finite and >= 0, got {v!r}")

    @property
    def z1_max(self) -> float:
        return self.c1 + self.b1

    @property
    def z2_max(self) -> float:
        return self.c2 + self.b2

    @property
    def area(self) -> float:
        return self.b1 * self.b2

    def corners(self) -> tuple[tuple[float, float], ...]:
        """Vertices in counterclockwise order starting at the lower-left."""
        return (
            (self.c1, self.c2),
            (self.z1_max, self.c2),
            (self.z1_max, self.z2_max),
            (self.c1, self.z2_max),
        )

    def swapped(self) -> "Rectangle":
        """The same support with the two goods exchanged."""
        return Rectangle(self.c2, self.c1, self.b2, self.b1)

    def scaled(self, lam: float) -> "Rectangle":
        """The support with all coordinates multiplied by lam > 0."""
        return Rectangle(lam * self.c1, lam * self.c2, lam * self.b1, lam * self.b2)


def validate_rectangle(c1: float, c2: float, b1: float, b2: float) -> Rectangle:
    """Build a Rectangle, raising NonPositiveSide / NegativeCorner on bad input."""
    return Rectangle(float(c1), float(c2), float(b1), float(b2))


@dataclass(frozen=True)
class MenuItem:
    """One lottery on the menu: win good i with probability q_i, pay t."""

    q1: float
    q2: float
    t: float

    def __post_init__(self) -> None:
        for name in ("q1", "q2"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if not (math.isfinite(self.t) and self.t >= 0.0):
            raise ValueError(f"t must be finite and >= 0, got {self.t!r}")

    def utility(self, z1: float, z2: float) -> float:
        return self.q1 * z1 + self.q2 * z2 - self.t

    @property
    def is_null(self) -> bool:
        return self.q1 == 0.0 and self.q2 == 0.0 and self.t == 0.0

    @property
    def is_bundle(self) -> bool:
        return self.q1 == 1.0 and self.q2 == 1.0


NULL_ITEM = MenuItem(0.0, 0.0, 0.0)


class StructureKind(enum.Enum):
    """Structural shape of the optimal mechanism."""

    A = "A"  # two partial single-good lotteries plus the bundle
    B = "B"  # partial lottery on good 1 plus the bundle
    F = "F"  # partial lottery on good 2 plus the bundle
    C = "C"  # pure bundling
    D = "D"  # good-2 lottery with a partial good-1 component, plus the bundle
    E = "E"  # deterministic good 2 alone, plus the bundle
    G = "G"  # mirror of D
    H = "H"  # mirror of E

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


# Kinds whose menu has no free null option (every type buys something).
KINDS_WITHOUT_NULL = frozenset({StructureKind.E, StructureKind.H})


@dataclass(frozen=True)
class SolveParams:
    """Geometric parameters of a solved structure.

    Fields not meaningful for a given kind are None.  P and Q are the
    corner points of the exclusion-region roof, in absolute coordinates.
    """

    p_a1: float | None = None
    p_a2: float | None = None
    a1: float | None = None
    a2: float | None = None
    m1: float | None = None
    m2: float | None = None
    p: float | None = None
    P: tuple[float, float] | None = None
    Q: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        out: dict = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SolveParams":
        kw = dict(d)
        for key in ("P", "Q"):
            if kw.get(key) is not None:
                kw[key] = tuple(float(x) for x in kw[key])
        return cls(**kw)


@dataclass(frozen=True)
class Mechanism:
    """A solved selling mechanism: structural kind, parameters, menu, revenue."""

    kind: StructureKind
    params: SolveParams | None
    menu: tuple[MenuItem, ...]
    revenue: float

    def __post_init__(self) -> None:
        if len(self.menu) > 4:
            raise ValueError(f"menu has {len(self.menu)} items, at most 4 allowed")
        if not any(item.is_bundle for item in self.menu):
            raise ValueError("menu must contain the full bundle (q1 = q2 = 1)")
        if self.kind not in KINDS_WITHOUT_NULL and not any(
            item.is_null for item in self.menu
        ):
            raise ValueError(f"kind {self.kind.value} menu must contain the null item")

    def bundle_item(self) -> MenuItem:
        return next(item for item in self.menu if item.is_bundle)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "params": self.params.to_dict() if self.params is not None else None,
            "menu": [{"q1": i.q1, "q2": i.q2, "t": i.t} for i in self.menu],
            "revenue": self.revenue,
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> "Mechanism":
        params = d.get("params")
        return cls(
            kind=StructureKind(d["kind"]),
            params=SolveParams.from_dict(params) if params is not None else None,
            menu=tuple(MenuItem(i["q1"], i["q2"], i["t"]) for i in d["menu"]),
            revenue=float(d["revenue"]),
        )

    @classmethod
    def from_json(cls, s: str) -> "Mechanism":
        return cls.from_dict(json.loads(s))

    def pretty(self) -> str:
        """Human-readable summary, values rounded to 6 significant digits."""

        def fmt(v: float) -> str:
            return f"{v:.6g}"

        lines = [f"kind: {self.kind.value}", f"revenue: {fmt(self.revenue)}", "menu:"]
        for item in self.menu:
            lines.append(
                f"  (q1={fmt(item.q1)}, q2={fmt(item.q2)}) at t={fmt(item.t)}"
            )
        if self.params is not None:
            shown = []
            for f in fields(self.params):
                v = getattr(self.params, f.name)
                if v is None:
                    continue
                if isinstance(v, tuple):
                    shown.append(f"{f.name}=({fmt(v[0])}, {fmt(v[1])})")
                else:
                    shown.append(f"{f.name}={fmt(v)}")
            if shown:
                lines.append("params: " + ", ".join(shown))
        return "\n".join(lines)

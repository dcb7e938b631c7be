"""
Smooth test functions on the unit torus.

Test functions are restricted to constants and finite sums of trigonometric
monomials, optionally arranged in a per-component table indexed by axis and
sign. Absent table components are identically zero. All kinds evaluate in
closed form and convert to a ModeSeries for exact integrals.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from ..errors import ConfigError, UsageError
from .fourier import ModeSeries

Sign = Optional[str]
Component = Tuple[int, Sign]

SIGNS = ("+", "-")


class FunctionKind(str, Enum):
    CONST = "const"
    TRIG = "trig"
    TABLE = "table"


@dataclass(frozen=True)
class TrigFactor:
    axis: int
    freq: int
    phase: str = "cos"

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        arg = 2.0 * np.pi * self.freq * pts[:, self.axis]
        return np.cos(arg) if self.phase == "cos" else np.sin(arg)

    def to_dict(self) -> dict:
        return {"axis": self.axis, "freq": self.freq, "phase": self.phase}


@dataclass(frozen=True)
class TrigTerm:
    """amp * prod of cos/sin(2 pi k_i x_i) over its factors."""

    amp: float
    factors: Tuple[TrigFactor, ...]

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        out = np.full(pts.shape[0], float(self.amp))
        for factor in self.factors:
            out = out * factor.evaluate(pts)
        return out

    def series(self, d: int) -> ModeSeries:
        out = ModeSeries.constant(d, self.amp)
        for factor in self.factors:
            out = out * ModeSeries.trig_factor(d, factor.axis, factor.freq, factor.phase)
        return out

    def max_axis(self) -> int:
        return max((f.axis for f in self.factors), default=-1)

    def to_dict(self) -> dict:
        if len(self.factors) == 1:
            return {**self.factors[0].to_dict(), "amp": self.amp}
        return {"amp": self.amp, "factors": [f.to_dict() for f in self.factors]}

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "TrigTerm":
        if "factors" in raw:
            factors = tuple(_factor_from_dict(f) for f in raw["factors"])
        else:
            factors = (_factor_from_dict(raw),)
        return cls(amp=float(raw.get("amp", 1.0)), factors=factors)


def _factor_from_dict(raw: Mapping[str, Any]) -> TrigFactor:
    phase = raw.get("phase", "cos")
    if phase not in ("cos", "sin"):
        raise ConfigError(f"phase must be 'cos' or 'sin', got {phase!r}")
    axis = int(raw.get("axis", 0))
    if axis < 0:
        raise ConfigError(f"axis must be non-negative, got {axis}")
    return TrigFactor(axis=axis, freq=int(raw.get("freq", 1)), phase=phase)


@dataclass(frozen=True)
class TestFunction:
    """Constant, trigonometric sum, or per-(axis, sign) table of those."""

    __test__ = False

    kind: FunctionKind
    c: float = 0.0
    terms: Tuple[TrigTerm, ...] = ()
    components: Tuple[Tuple[Component, "TestFunction"], ...] = field(default=())

    @classmethod
    def constant(cls, c: float) -> "TestFunction":
        return cls(kind=FunctionKind.CONST, c=float(c))

    @classmethod
    def trig(cls, terms, c: float = 0.0) -> "TestFunction":
        return cls(kind=FunctionKind.TRIG, c=float(c), terms=tuple(terms))

    @classmethod
    def cos(cls, freq: int = 1, axis: int = 0, amp: float = 1.0) -> "TestFunction":
        return cls.trig([TrigTerm(amp, (TrigFactor(axis, freq, "cos"),))])

    @classmethod
    def sin(cls, freq: int = 1, axis: int = 0, amp: float = 1.0) -> "TestFunction":
        return cls.trig([TrigTerm(amp, (TrigFactor(axis, freq, "sin"),))])

    @classmethod
    def table(cls, entries: Mapping[Component, "TestFunction"]) -> "TestFunction":
        for (axis, sign), phi in entries.items():
            if phi.is_component_indexed:
                raise UsageError("table components must be scalar test functions")
            if sign not in (None,) + SIGNS:
                raise UsageError(f"sign must be '+', '-' or None, got {sign!r}")
        keys = {sign is None for (_, sign) in entries}
        if len(keys) > 1:
            raise UsageError("a table is indexed either by axis or by (axis, sign)")
        return cls(kind=FunctionKind.TABLE, components=tuple(sorted(entries.items())))

    @classmethod
    def component(cls, phi: "TestFunction", axis: int, sign: Sign = None) -> "TestFunction":
        return cls.table({(axis, sign): phi})

    @property
    def is_component_indexed(self) -> bool:
        return self.kind == FunctionKind.TABLE

    @property
    def is_signed(self) -> bool:
        return bool(self.components) and self.components[0][0][1] is not None

    @property
    def sup_norm(self) -> float:
        if self.kind == FunctionKind.CONST:
            return abs(self.c)
        if self.kind == FunctionKind.TRIG:
            return abs(self.c) + sum(abs(t.amp) for t in self.terms)
        return max((phi.sup_norm for _, phi in self.components), default=0.0)

    def component_for(self, axis: Optional[int] = None, sign: Sign = None) -> "TestFunction":
        """Scalar function of the (axis, sign) component.

        Constants broadcast to every component. Axis-indexed tables serve both
        signs of their axis; asking a signed table for an unsigned component
        is a shape mismatch.
        """
        if self.kind == FunctionKind.CONST:
            return self
        if self.kind == FunctionKind.TRIG:
            if axis is not None or sign is not None:
                raise UsageError("component index requested on a scalar test function")
            return self
        if axis is None:
            raise UsageError("component-indexed test function needs an axis")
        table = dict(self.components)
        if self.is_signed:
            if sign is None:
                raise UsageError("(axis, sign) table used where an axis table is expected")
            return table.get((axis, sign), _ZERO)
        return table.get((axis, None), _ZERO)

    def evaluate(
        self,
        points: np.ndarray,
        axis: Optional[int] = None,
        sign: Sign = None,
    ) -> Union[float, np.ndarray]:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim <= 1
        pts = np.atleast_2d(pts)
        if self.kind == FunctionKind.TABLE:
            return self.component_for(axis, sign).evaluate(points)
        if self.kind == FunctionKind.TRIG and (axis is not None or sign is not None):
            raise UsageError("component index requested on a scalar test function")
        out = np.full(pts.shape[0], self.c)
        for term in self.terms:
            out = out + term.evaluate(pts)
        return float(out[0]) if single else out

    def series(self, d: int) -> ModeSeries:
        if self.kind == FunctionKind.TABLE:
            raise UsageError("only scalar test functions have a single Fourier series")
        out = ModeSeries.constant(d, self.c)
        for term in self.terms:
            out = out + term.series(d)
        return out

    def scale(self, a: float) -> "TestFunction":
        if self.kind == FunctionKind.TABLE:
            return TestFunction.table({k: phi.scale(a) for k, phi in self.components})
        return TestFunction(
            kind=self.kind,
            c=a * self.c,
            terms=tuple(TrigTerm(a * t.amp, t.factors) for t in self.terms),
        )

    def plus(self, other: "TestFunction") -> "TestFunction":
        if self.is_component_indexed or other.is_component_indexed:
            raise UsageError("sums are defined for scalar test functions only")
        if self.kind == other.kind == FunctionKind.CONST:
            return TestFunction.constant(self.c + other.c)
        return TestFunction.trig(self.terms + other.terms, c=self.c + other.c)

    def max_axis(self) -> int:
        if self.kind == FunctionKind.TABLE:
            return max(
                max(axis, phi.max_axis()) for (axis, _), phi in self.components
            )
        return max((t.max_axis() for t in self.terms), default=-1)

    def to_dict(self) -> dict:
        if self.kind == FunctionKind.CONST:
            return {"kind": "const", "c": self.c}
        if self.kind == FunctionKind.TRIG:
            out: Dict[str, Any] = {"kind": "trig", "terms": [t.to_dict() for t in self.terms]}
            if self.c:
                out["c"] = self.c
            return out
        return {
            "kind": "table",
            "components": [
                {"axis": axis, "sign": sign, "phi": phi.to_dict()}
                for (axis, sign), phi in self.components
            ],
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "TestFunction":
        kind = raw.get("kind")
        if kind == "const":
            base = cls.constant(float(raw.get("c", 0.0)))
        elif kind == "trig":
            terms = [TrigTerm.from_dict(t) for t in raw.get("terms", [])]
            base = cls.trig(terms, c=float(raw.get("c", 0.0)))
        elif kind == "table":
            entries = {}
            for entry in raw.get("components", []):
                key = (int(entry["axis"]), entry.get("sign"))
                entries[key] = cls.from_dict(entry["phi"])
            base = cls.table(entries)
        else:
            raise ConfigError(f"unknown test function kind {kind!r}")
        wrapper = raw.get("component")
        if wrapper is not None:
            return cls.component(base, int(wrapper["axis"]), wrapper.get("sign"))
        return base


_ZERO = TestFunction.constant(0.0)

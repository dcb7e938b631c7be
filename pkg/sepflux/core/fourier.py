"""
Finite complex Fourier series on the unit torus with heat-kernel decay.

A ModeSeries is a finite sum of terms

    c * exp(-4 pi^2 * decay * t) * exp(2 pi i k.x)

keyed by the integer frequency vector k and the integer decay index. Static
functions (test functions, initial densities) carry decay 0; evolving a
static series under the heat equation sets decay = |k|^2 per mode. Products,
spatial derivatives and time integrals stay inside the family, which is what
makes every hydrodynamic reference value closed-form.
"""

from typing import Dict, Iterable, Tuple, Union

import numpy as np
from typing_extensions import Self

Mode = Tuple[int, ...]
Key = Tuple[Mode, int]

FOUR_PI_SQ = 4.0 * np.pi**2

_DROP = 1e-300


class ModeSeries:
    def __init__(self, d: int, terms: Dict[Key, complex]):
        self.d = d
        self.terms = {
            key: complex(value) for key, value in terms.items() if abs(value) > _DROP
        }

    @classmethod
    def constant(cls, d: int, value: float) -> Self:
        return cls(d, {((0,) * d, 0): complex(value)})

    @classmethod
    def trig_factor(cls, d: int, axis: int, freq: int, phase: str) -> Self:
        """Series of cos(2 pi freq x_axis) or sin(2 pi freq x_axis)."""
        plus = [0] * d
        minus = [0] * d
        plus[axis] = freq
        minus[axis] = -freq
        if phase == "cos":
            a, b = 0.5, 0.5
        elif phase == "sin":
            a, b = -0.5j, 0.5j
        else:
            raise ValueError(f"unknown phase {phase!r}")
        terms: Dict[Key, complex] = {}
        for mode, coeff in ((tuple(plus), a), (tuple(minus), b)):
            terms[(mode, 0)] = terms.get((mode, 0), 0.0) + coeff
        return cls(d, terms)

    def __add__(self, other: "ModeSeries") -> "ModeSeries":
        terms = dict(self.terms)
        for key, value in other.terms.items():
            terms[key] = terms.get(key, 0.0) + value
        return ModeSeries(self.d, terms)

    def scale(self, factor: complex) -> "ModeSeries":
        return ModeSeries(self.d, {k: v * factor for k, v in self.terms.items()})

    def __mul__(self, other: Union["ModeSeries", float]) -> "ModeSeries":
        if not isinstance(other, ModeSeries):
            return self.scale(other)
        terms: Dict[Key, complex] = {}
        for (k1, g1), c1 in self.terms.items():
            for (k2, g2), c2 in other.terms.items():
                key = (tuple(a + b for a, b in zip(k1, k2)), g1 + g2)
                terms[key] = terms.get(key, 0.0) + c1 * c2
        return ModeSeries(self.d, terms)

    __rmul__ = __mul__

    def heat(self) -> "ModeSeries":
        """Evolve a static series under d/dt = Laplacian."""
        terms: Dict[Key, complex] = {}
        for (mode, decay), value in self.terms.items():
            key = (mode, decay + sum(k * k for k in mode))
            terms[key] = terms.get(key, 0.0) + value
        return ModeSeries(self.d, terms)

    def derivative(self, axis: int) -> "ModeSeries":
        return ModeSeries(
            self.d,
            {
                (mode, decay): value * 2j * np.pi * mode[axis]
                for (mode, decay), value in self.terms.items()
            },
        )

    def at_time(self, t: float) -> "ModeSeries":
        terms: Dict[Key, complex] = {}
        for (mode, decay), value in self.terms.items():
            key = (mode, 0)
            terms[key] = terms.get(key, 0.0) + value * np.exp(-FOUR_PI_SQ * decay * t)
        return ModeSeries(self.d, terms)

    def time_integral(self, T: float) -> "ModeSeries":
        """Static series of x -> int_0^T S(x, t) dt."""
        terms: Dict[Key, complex] = {}
        for (mode, decay), value in self.terms.items():
            key = (mode, 0)
            terms[key] = terms.get(key, 0.0) + value * _decay_integral(decay, T)
        return ModeSeries(self.d, terms)

    def mean(self, t: float = 0.0) -> float:
        """Spatial integral over the unit torus at time t."""
        zero = (0,) * self.d
        total = 0.0
        for (mode, decay), value in self.terms.items():
            if mode == zero:
                total += value.real * np.exp(-FOUR_PI_SQ * decay * t)
        return float(total)

    def evaluate(self, points: np.ndarray, t: float = 0.0) -> Union[float, np.ndarray]:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1 and self.d == 1 and pts.shape[0] != 1:
            pts = pts[:, None]
        single = pts.ndim <= 1
        pts = pts.reshape(-1, self.d)
        out = np.zeros(pts.shape[0], dtype=complex)
        for (mode, decay), value in self.terms.items():
            phase = 2.0 * np.pi * (pts @ np.asarray(mode, dtype=float))
            out += value * np.exp(-FOUR_PI_SQ * decay * t) * np.exp(1j * phase)
        real = out.real
        return float(real[0]) if single else real

    def modes(self) -> Iterable[Key]:
        return self.terms.keys()


def _decay_integral(decay: int, T: float) -> float:
    if decay == 0:
        return T
    lam = FOUR_PI_SQ * decay
    return -np.expm1(-lam * T) / lam

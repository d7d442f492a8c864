"""Closed-form smooth signals with exact derivatives.

A signal is an expression tree over constants, polynomials, sinusoids and
exponentials, combined by sums, products and scaling. Derivatives are new
expression trees, so ``s.derivative(3)(t)`` is evaluated in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.polynomial import polynomial as npoly


class Signal:
    def __call__(self, t):
        raise NotImplementedError

    def _d(self) -> Signal:
        raise NotImplementedError

    def derivative(self, order: int = 1) -> Signal:
        if order < 0:
            raise ValueError("derivative order must be nonnegative")
        s = self
        for _ in range(order):
            s = s._d()
        return s

    def max_frequency(self) -> float:
        """Largest angular frequency of any sinusoidal component (0 if none)."""
        return 0.0

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    def __add__(self, other):
        return Sum((self, _coerce(other)))

    __radd__ = __add__

    def __neg__(self):
        return Scale(-1.0, self)

    def __sub__(self, other):
        return Sum((self, -_coerce(other)))

    def __rsub__(self, other):
        return Sum((_coerce(other), -self))

    def __mul__(self, other):
        if isinstance(other, Signal):
            return Product((self, other))
        return Scale(float(other), self)

    __rmul__ = __mul__


def _coerce(x) -> Signal:
    return x if isinstance(x, Signal) else Constant(float(x))


def _full(t, value: float):
    return np.full(np.shape(t), value, dtype=float) if np.ndim(t) else float(value)


@dataclass(frozen=True)
class Constant(Signal):
    value: float

    def __call__(self, t):
        return _full(t, self.value)

    def _d(self):
        return Constant(0.0)

    def to_dict(self):
        return {"const": self.value}


@dataclass(frozen=True)
class Polynomial(Signal):
    """``sum_k coeffs[k] * t**k``."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs) or (0.0,))

    def __call__(self, t):
        return npoly.polyval(np.asarray(t, dtype=float), self.coeffs) + 0.0 * np.asarray(t, dtype=float)

    def _d(self):
        if len(self.coeffs) == 1:
            return Polynomial((0.0,))
        return Polynomial(tuple(npoly.polyder(self.coeffs)))

    def to_dict(self):
        return {"poly": list(self.coeffs)}


@dataclass(frozen=True)
class Sinusoid(Signal):
    """``amp * sin(omega * t + phase)``."""

    amp: float
    omega: float
    phase: float = 0.0

    def __call__(self, t):
        return self.amp * np.sin(self.omega * np.asarray(t, dtype=float) + self.phase)

    def _d(self):
        return Sinusoid(self.amp * self.omega, self.omega, self.phase + math.pi / 2)

    def max_frequency(self):
        return abs(self.omega) if self.amp != 0 else 0.0

    def to_dict(self):
        return {"sin": {"amp": self.amp, "omega": self.omega, "phase": self.phase}}


@dataclass(frozen=True)
class Exponential(Signal):
    """``amp * exp(rate * t)``."""

    amp: float
    rate: float

    def __call__(self, t):
        return self.amp * np.exp(self.rate * np.asarray(t, dtype=float))

    def _d(self):
        return Exponential(self.amp * self.rate, self.rate)

    def to_dict(self):
        return {"exp": {"amp": self.amp, "rate": self.rate}}


@dataclass(frozen=True)
class Scale(Signal):
    factor: float
    of: Signal

    def __call__(self, t):
        return self.factor * self.of(t)

    def _d(self):
        return Scale(self.factor, self.of._d())

    def max_frequency(self):
        return self.of.max_frequency() if self.factor != 0 else 0.0

    def to_dict(self):
        return {"scale": {"factor": self.factor, "of": self.of.to_dict()}}


@dataclass(frozen=True)
class Sum(Signal):
    terms: tuple[Signal, ...]

    def __call__(self, t):
        out = _full(t, 0.0)
        for term in self.terms:
            out = out + term(t)
        return out

    def _d(self):
        return Sum(tuple(term._d() for term in self.terms))

    def max_frequency(self):
        return max((term.max_frequency() for term in self.terms), default=0.0)

    def to_dict(self):
        return {"sum": [term.to_dict() for term in self.terms]}


@dataclass(frozen=True)
class Product(Signal):
    factors: tuple[Signal, ...]

    def __call__(self, t):
        out = _full(t, 1.0)
        for f in self.factors:
            out = out * f(t)
        return out

    def _d(self):
        terms = []
        for i in range(len(self.factors)):
            fs = list(self.factors)
            fs[i] = fs[i]._d()
            terms.append(Product(tuple(fs)))
        return Sum(tuple(terms))

    def max_frequency(self):
        # a product of sinusoids contains the sum of their frequencies
        return sum(f.max_frequency() for f in self.factors)

    def to_dict(self):
        return {"product": [f.to_dict() for f in self.factors]}


ZERO = Constant(0.0)


def linear_combination(weights, signals) -> Signal:
    """``sum_k weights[k] * signals[k]``, skipping zero weights."""
    terms = tuple(Scale(float(w), s) for w, s in zip(weights, signals) if w != 0)
    return Sum(terms) if terms else ZERO


def signal_from_dict(d: Any) -> Signal:
    """Parse the JSON form produced by :meth:`Signal.to_dict`.

    A bare number is accepted as a constant.
    """
    if isinstance(d, (int, float)) and not isinstance(d, bool):
        return Constant(float(d))
    if not isinstance(d, dict) or len(d) != 1:
        raise ValueError(f"signal must be a number or a single-key object, got {d!r}")
    (key, body), = d.items()
    try:
        if key == "const":
            return Constant(float(body))
        if key == "poly":
            return Polynomial(tuple(float(c) for c in body))
        if key == "sin":
            return Sinusoid(float(body["amp"]), float(body["omega"]), float(body.get("phase", 0.0)))
        if key == "exp":
            return Exponential(float(body["amp"]), float(body["rate"]))
        if key == "scale":
            return Scale(float(body["factor"]), signal_from_dict(body["of"]))
        if key == "sum":
            return Sum(tuple(signal_from_dict(x) for x in body))
        if key == "product":
            return Product(tuple(signal_from_dict(x) for x in body))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed {key!r} signal: {body!r}") from exc
    raise ValueError(f"unknown signal kind {key!r}")

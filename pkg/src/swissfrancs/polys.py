"""Minimal polynomial machinery for the verification suite.

Poly1 is a dense univariate polynomial (float or exact coefficients)
with companion-matrix root finding; Poly3 is a sparse exact trivariate
polynomial over the rationals in the variables (a1, a2, b2), with the
handful of operations the factorization check needs: arithmetic,
swapping a2 with b2, content normalization, and exact division by a
single divisor, which in a monomial order is a decisive divisibility
test.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Iterable, Sequence, Tuple, Union

import numpy as np

Exponent = Tuple[int, int, int]
Number = Union[int, float, Fraction]


class Poly1:
    """Dense univariate polynomial, coefficients from lowest degree up."""

    def __init__(self, coeffs: Sequence[Number]):
        coeffs = list(coeffs)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        self.coeffs = tuple(coeffs)

    @property
    def degree(self) -> int:
        if len(self.coeffs) == 1 and self.coeffs[0] == 0:
            return -1
        return len(self.coeffs) - 1

    def __call__(self, x):
        result = 0
        for c in reversed(self.coeffs):
            result = result * x + c
        return result

    def derivative(self) -> "Poly1":
        if len(self.coeffs) <= 1:
            return Poly1([0])
        return Poly1([k * c for k, c in enumerate(self.coeffs)][1:])

    def trimmed(self, rel_tol: float = 1e-12) -> "Poly1":
        """Drop float leading coefficients below rel_tol of the largest."""
        scale = max(abs(float(c)) for c in self.coeffs) or 1.0
        coeffs = list(self.coeffs)
        while len(coeffs) > 1 and abs(float(coeffs[-1])) <= rel_tol * scale:
            coeffs.pop()
        return Poly1(coeffs)

    def roots(self) -> np.ndarray:
        """Companion-matrix eigenvalues with one Newton polish per root."""
        poly = self.trimmed()
        if poly.degree < 1:
            return np.array([], dtype=complex)
        monic = np.array([float(c) for c in poly.coeffs]) / float(poly.coeffs[-1])
        deg = poly.degree
        comp = np.zeros((deg, deg))
        comp[1:, :-1] = np.eye(deg - 1)
        comp[:, -1] = -monic[:-1]
        roots = np.linalg.eigvals(comp)
        deriv = poly.derivative()
        polished = []
        for r in roots:
            dp = complex(deriv(r))
            if abs(dp) > 1e-12:
                r = r - complex(poly(r)) / dp
            polished.append(r)
        return np.array(polished)

    def __repr__(self):
        return f"Poly1({list(self.coeffs)})"


class Poly3:
    """Sparse exact polynomial in (a1, a2, b2) with Fraction coefficients.

    Terms are stored as exponent triple -> coefficient with no zero
    coefficients; the canonical term order is graded lexicographic.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Exponent, Fraction] | None = None):
        cleaned = {}
        if terms:
            for exp, coeff in terms.items():
                coeff = Fraction(coeff)
                if coeff != 0:
                    cleaned[tuple(exp)] = coeff
        self.terms = cleaned

    @classmethod
    def const(cls, value: Number) -> "Poly3":
        return cls({(0, 0, 0): Fraction(value)})

    @classmethod
    def variable(cls, index: int) -> "Poly3":
        exp = [0, 0, 0]
        exp[index] = 1
        return cls({tuple(exp): Fraction(1)})

    @classmethod
    def monomial(cls, exp: Exponent, coeff: Number = 1) -> "Poly3":
        return cls({tuple(exp): Fraction(coeff)})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly3):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other) -> "Poly3":
        if not isinstance(other, Poly3):
            other = Poly3.const(other)
        out = dict(self.terms)
        for exp, coeff in other.terms.items():
            out[exp] = out.get(exp, Fraction(0)) + coeff
        return Poly3(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly3":
        return Poly3({e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly3":
        if not isinstance(other, Poly3):
            other = Poly3.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "Poly3":
        return Poly3.const(other) - self

    def __mul__(self, other) -> "Poly3":
        if not isinstance(other, Poly3):
            return Poly3({e: c * Fraction(other) for e, c in self.terms.items()})
        out: Dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exp = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                out[exp] = out.get(exp, Fraction(0)) + c1 * c2
        return Poly3(out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Poly3":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result = Poly3.const(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def swap_a2_b2(self) -> "Poly3":
        return Poly3({(e[0], e[2], e[1]): c for e, c in self.terms.items()})

    def evaluate(self, a1: Number, a2: Number, b2: Number):
        total = None
        for (i, j, k), coeff in self.terms.items():
            term = coeff * a1 ** i * a2 ** j * b2 ** k
            total = term if total is None else total + term
        if total is None:
            return Fraction(0) if not any(isinstance(v, float) for v in (a1, a2, b2)) else 0.0
        return total

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def num_terms(self) -> int:
        return len(self.terms)

    @staticmethod
    def _order_key(exp: Exponent):
        return (sum(exp), exp)

    def leading(self) -> Tuple[Exponent, Fraction]:
        exp = max(self.terms, key=self._order_key)
        return exp, self.terms[exp]

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda kv: self._order_key(kv[0]),
                      reverse=True)

    def divide(self, divisor: "Poly3") -> Tuple["Poly3", "Poly3"]:
        """Single-divisor division: self = quotient * divisor + remainder.

        With one divisor the remainder is zero if and only if the divisor
        divides self, in any monomial order.
        """
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lead_exp, lead_coeff = divisor.leading()
        quotient: Dict[Exponent, Fraction] = {}
        remainder: Dict[Exponent, Fraction] = {}
        work = Poly3(dict(self.terms))
        while not work.is_zero():
            exp, coeff = work.leading()
            diff = tuple(e - l for e, l in zip(exp, lead_exp))
            if all(d >= 0 for d in diff):
                factor = Poly3.monomial(diff, coeff / lead_coeff)
                quotient[tuple(diff)] = quotient.get(tuple(diff), Fraction(0)) \
                    + coeff / lead_coeff
                work = work - factor * divisor
            else:
                remainder[exp] = remainder.get(exp, Fraction(0)) + coeff
                work = work - Poly3.monomial(exp, coeff)
        return Poly3(quotient), Poly3(remainder)

    def monomial_content(self) -> Exponent:
        if not self.terms:
            return (0, 0, 0)
        exps = list(self.terms)
        return tuple(min(e[i] for e in exps) for i in range(3))

    def primitive(self) -> "Poly3":
        """Strip the monomial content and the rational content, and make
        the graded-lex leading coefficient positive."""
        if self.is_zero():
            return self
        mono = self.monomial_content()
        shifted = {tuple(e - m for e, m in zip(exp, mono)): c
                   for exp, c in self.terms.items()}
        num_gcd = 0
        den_lcm = 1
        for c in shifted.values():
            num_gcd = math.gcd(num_gcd, abs(c.numerator))
            den_lcm = den_lcm * c.denominator // math.gcd(den_lcm, c.denominator)
        content = Fraction(num_gcd, den_lcm)
        out = Poly3({e: c / content for e, c in shifted.items()})
        if out.leading()[1] < 0:
            out = -out
        return out

    def to_string(self, names: Tuple[str, str, str] = ("a1", "a2", "b2")) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for exp, coeff in self.sorted_terms():
            factors = []
            if coeff != 1 or not any(exp):
                factors.append(str(coeff))
            for name, e in zip(names, exp):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            parts.append("*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"Poly3({self.to_string()})"


A1 = Poly3.variable(0)
A2 = Poly3.variable(1)
B2 = Poly3.variable(2)


def greedy_multiset_match(computed: Iterable[complex],
                          reference: Iterable[float],
                          tol: float = 1e-8) -> bool:
    """Greedy nearest pairing of two multisets, within tol and with equal
    cardinality."""
    pool = list(computed)
    targets = list(reference)
    if len(pool) != len(targets):
        return False
    for target in targets:
        best = min(range(len(pool)), key=lambda i: abs(pool[i] - target),
                   default=None)
        if best is None or abs(pool[best] - target) > tol:
            return False
        pool.pop(best)
    return True

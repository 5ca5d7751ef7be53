"""Polynomials in two formal infinitesimals with exact rational coefficients.

``eps`` stands for machine trembles and ``eta`` for the floor put on
zero-prior types.  Terms are ranked by ``eps`` degree first and ``eta``
degree second: every power of ``eta`` dominates ``eps``.
"""

from __future__ import annotations

from fractions import Fraction


class InfinitesimalPoly:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: Fraction(v) for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def const(cls, c) -> "InfinitesimalPoly":
        return cls({(0, 0): c})

    @classmethod
    def eps(cls) -> "InfinitesimalPoly":
        return cls({(1, 0): 1})

    @classmethod
    def eta(cls) -> "InfinitesimalPoly":
        return cls({(0, 1): 1})

    @staticmethod
    def _lift(x):
        return x if isinstance(x, InfinitesimalPoly) else InfinitesimalPoly.const(x)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return InfinitesimalPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return InfinitesimalPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        out: dict = {}
        for (a, b), u in self.terms.items():
            for (c, d), v in other.terms.items():
                k = (a + c, b + d)
                out[k] = out.get(k, 0) + u * v
        return InfinitesimalPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return self.terms == self._lift(other).terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (e, h), c in sorted(self.terms.items()):
            mono = "".join(s if d == 1 else f"{s}^{d}" for s, d in (("eps", e), ("eta", h)) if d)
            parts.append(f"{c}{'*' + mono if mono else ''}")
        return " + ".join(parts)

    def is_zero(self) -> bool:
        return not self.terms

    def order(self):
        """Degree pair of the dominant term (``None`` for zero)."""
        return min(self.terms) if self.terms else None

    def leading(self):
        k = self.order()
        return (k, self.terms[k]) if k is not None else (None, Fraction(0))

    def lead(self) -> "InfinitesimalPoly":
        """The dominant term alone."""
        k = self.order()
        return InfinitesimalPoly({k: self.terms[k]}) if k is not None else InfinitesimalPoly()

    def substitute(self, eps, eta=0) -> Fraction:
        eps, eta = Fraction(eps), Fraction(eta)
        return sum((c * eps ** e * eta ** h for (e, h), c in self.terms.items()), Fraction(0))


def limit_ratio(num: InfinitesimalPoly, den: InfinitesimalPoly) -> Fraction:
    """lim num/den as both infinitesimals go to zero (``eps`` faster)."""
    if den.is_zero():
        raise ZeroDivisionError("limit of ratio with zero denominator")
    k, c = den.leading()
    if num.is_zero():
        return Fraction(0)
    nk = num.order()
    if nk < k:
        raise ArithmeticError("ratio diverges")
    return num.terms[k] / c if nk == k else Fraction(0)

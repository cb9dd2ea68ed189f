"""A small expression language for sums of edge weights.

Every inequality checked by a sweep has the shape

    sum_t  c_t(p) * f(x_t(p), y_t(p))

where ``p`` are integer parameters, ``x_t`` and ``y_t`` are affine in ``p``
(possibly divided by a fixed integer) and ``c_t`` is an integer polynomial.
``x_t`` may also be infinite, standing for the limit f(inf, y) = 1/sqrt(y).

Expressions are built with ordinary operators on ``Sym`` objects, compiled
to flat integer arrays, and evaluated by the sweep kernels in double and in
multiple precision.  Domains are nested loops whose bounds are ceil/floor of
affine forms in the outer parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

__all__ = ["Lin", "Poly", "Expr", "Sym", "F", "RS", "Domain", "Loop", "Compiled", "compile_expr"]


class Lin:
    """Affine form (const + sum coefs[name] * name) / den with integer data."""

    __slots__ = ("const", "coefs", "den")

    def __init__(self, const: int = 0, coefs: Mapping[str, int] | None = None, den: int = 1):
        if den <= 0:
            raise ValueError("denominator must be positive")
        g = math.gcd(int(const), int(den))
        for c in (coefs or {}).values():
            g = math.gcd(g, int(c))
        g = g or 1
        self.const = int(const) // g
        self.coefs = {k: int(v) // g for k, v in (coefs or {}).items() if v}
        self.den = int(den) // g

    @staticmethod
    def lift(v) -> "Lin":
        if isinstance(v, Lin):
            return v
        if isinstance(v, (int, np.integer)):
            return Lin(int(v))
        if isinstance(v, Fraction):
            return Lin(v.numerator, den=v.denominator)
        raise TypeError(f"cannot use {v!r} as an affine form")

    def _combine(self, other: "Lin", sign: int) -> "Lin":
        d = self.den * other.den // math.gcd(self.den, other.den)
        a, b = d // self.den, d // other.den
        coefs = {k: a * v for k, v in self.coefs.items()}
        for k, v in other.coefs.items():
            coefs[k] = coefs.get(k, 0) + sign * b * v
        return Lin(a * self.const + sign * b * other.const, coefs, d)

    def __add__(self, other):
        return self._combine(Lin.lift(other), 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(Lin.lift(other), -1)

    def __rsub__(self, other):
        return Lin.lift(other)._combine(self, -1)

    def __neg__(self):
        return Lin(-self.const, {k: -v for k, v in self.coefs.items()}, self.den)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return Lin(self.const * int(other), {k: v * int(other) for k, v in self.coefs.items()}, self.den)
        if isinstance(other, (Lin, Poly)):
            return Poly.lift(self) * other
        if isinstance(other, Expr):
            return other.__rmul__(self)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other: int):
        return Lin(self.const, self.coefs, self.den * int(other))

    def is_const(self) -> bool:
        return not self.coefs

    def names(self) -> set[str]:
        return set(self.coefs)

    def value(self, env: Mapping[str, int]) -> Fraction:
        num = self.const + sum(v * env[k] for k, v in self.coefs.items())
        return Fraction(num, self.den)

    def key(self) -> tuple:
        return (self.const, tuple(sorted(self.coefs.items())), self.den)

    def __repr__(self) -> str:
        parts = [str(self.const)] if self.const or not self.coefs else []
        parts += [f"{v}*{k}" for k, v in sorted(self.coefs.items())]
        s = " + ".join(parts)
        return f"({s})/{self.den}" if self.den != 1 else f"({s})"


def Sym(name: str) -> Lin:
    return Lin(0, {name: 1})


class Poly:
    """Integer polynomial: dict of sorted (name, exponent) tuples -> coefficient."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, int] | None = None):
        self.terms = {m: int(c) for m, c in (terms or {}).items() if c}

    @staticmethod
    def lift(v) -> "Poly":
        if isinstance(v, Poly):
            return v
        if isinstance(v, (int, np.integer)):
            return Poly({(): int(v)})
        if isinstance(v, Lin):
            if v.den != 1:
                raise ValueError("coefficients must have integer values")
            t = {(): v.const}
            for k, c in v.coefs.items():
                t[((k, 1),)] = c
            return Poly(t)
        raise TypeError(f"cannot use {v!r} as a polynomial")

    def __add__(self, other):
        other = Poly.lift(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return Poly(t)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-Poly.lift(other))

    def __mul__(self, other):
        if isinstance(other, Expr):
            return other.__rmul__(self)
        other = Poly.lift(other)
        t: dict[tuple, int] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                e = dict(m1)
                for k, x in m2:
                    e[k] = e.get(k, 0) + x
                m = tuple(sorted(e.items()))
                t[m] = t.get(m, 0) + c1 * c2
        return Poly(t)

    __rmul__ = __mul__

    def names(self) -> set[str]:
        return {k for m in self.terms for k, _ in m}

    def value(self, env: Mapping[str, int]) -> int:
        tot = 0
        for m, c in self.terms.items():
            v = c
            for k, e in m:
                v *= env[k] ** e
            tot += v
        return tot

    def is_zero(self) -> bool:
        return not self.terms


INF = None


class Expr:
    """Sum of c(p) * f(x(p), y(p)); x = None stands for infinity."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        # key -> (x, y, coef)
        self.terms: dict[tuple, tuple] = {}
        for x, y, c in terms or []:
            self._add(x, y, c)

    def _add(self, x, y, c) -> None:
        kx = ("inf",) if x is None else x.key()
        ky = y.key()
        if x is not None and kx > ky:
            x, y, kx, ky = y, x, ky, kx
        key = (kx, ky)
        if key in self.terms:
            x0, y0, c0 = self.terms[key]
            c = c0 + c
        if isinstance(c, Poly) and c.is_zero():
            self.terms.pop(key, None)
        else:
            self.terms[key] = (x, y, Poly.lift(c))

    def copy(self) -> "Expr":
        e = Expr()
        e.terms = dict(self.terms)
        return e

    def __add__(self, other):
        if not isinstance(other, Expr):
            return NotImplemented
        e = self.copy()
        for x, y, c in other.terms.values():
            e._add(x, y, c)
        return e

    def __neg__(self):
        return Expr([(x, y, -c) for x, y, c in self.terms.values()])

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, scal):
        p = Poly.lift(scal)
        return Expr([(x, y, p * c) for x, y, c in self.terms.values()])

    __mul__ = __rmul__

    def names(self) -> set[str]:
        s: set[str] = set()
        for x, y, c in self.terms.values():
            if x is not None:
                s |= x.names()
            s |= y.names() | c.names()
        return s

    def eval(self, env: Mapping[str, int]) -> float:
        """Double-precision value at one point."""
        tot = []
        for x, y, c in self.terms.values():
            cv = c.value(env)
            if cv == 0:
                continue
            yv = float(y.value(env))
            if x is None:
                fv = math.sqrt(1.0 / yv)
            else:
                xv = float(x.value(env))
                fv = math.sqrt((xv + yv - 2.0) / (xv * yv))
            tot.append(cv * fv)
        return math.fsum(tot)

    def eval_mp(self, env: Mapping[str, int], dps: int = 60):
        """Multiple-precision value (mpmath) at one point."""
        import mpmath

        with mpmath.workdps(dps):
            tot = mpmath.mpf(0)
            for x, y, c in self.terms.values():
                cv = c.value(env)
                if cv == 0:
                    continue
                yv = y.value(env)
                yv = mpmath.mpf(yv.numerator) / yv.denominator
                if x is None:
                    fv = mpmath.sqrt(1 / yv)
                else:
                    xv = x.value(env)
                    xv = mpmath.mpf(xv.numerator) / xv.denominator
                    fv = mpmath.sqrt((xv + yv - 2) / (xv * yv))
                tot += cv * fv
            return +tot


def F(x, y) -> Expr:
    return Expr([(Lin.lift(x), Lin.lift(y), 1)])


def RS(y) -> Expr:
    """f(inf, y) = 1/sqrt(y)."""
    return Expr([(None, Lin.lift(y), 1)])


@dataclass(frozen=True)
class Loop:
    """One loop level: name, lower bounds (ceil of max), upper bounds (floor of min), step."""

    name: str
    lo: tuple
    hi: tuple
    step: int = 1


class Domain:
    """Nested integer loops.  Bounds may only use outer loop variables."""

    def __init__(self, loops: Sequence[Loop]):
        self.loops = list(loops)
        seen: set[str] = set()
        for lp in self.loops:
            for b in list(lp.lo) + list(lp.hi):
                if not Lin.lift(b).names() <= seen:
                    raise ValueError(f"bound of {lp.name} uses an inner variable")
            seen.add(lp.name)

    @classmethod
    def box(cls, *specs) -> "Domain":
        """specs: (name, lo, hi) or (name, lo, hi, step); lo/hi affine or lists of them."""
        loops = []
        for sp in specs:
            name, lo, hi = sp[:3]
            step = sp[3] if len(sp) > 3 else 1
            lo = tuple(Lin.lift(b) for b in (lo if isinstance(lo, (list, tuple)) else [lo]))
            hi = tuple(Lin.lift(b) for b in (hi if isinstance(hi, (list, tuple)) else [hi]))
            loops.append(Loop(name, lo, hi, step))
        return cls(loops)

    @property
    def names(self) -> list[str]:
        return [lp.name for lp in self.loops]

    def range_of(self, level: int, env: Mapping[str, int]) -> range:
        lp = self.loops[level]
        lo = max(math.ceil(b.value(env)) for b in lp.lo)
        hi = min(math.floor(b.value(env)) for b in lp.hi)
        return range(lo, hi + 1, lp.step)

    def points(self):
        """Iterate all points as tuples (slow; for tests and small boxes)."""
        names = self.names
        env: dict[str, int] = {}

        def rec(level):
            if level == len(names):
                yield tuple(env[n] for n in names)
                return
            for v in self.range_of(level, env):
                env[names[level]] = v
                yield from rec(level + 1)
            env.pop(names[level], None)

        yield from rec(0)

    def count(self) -> int:
        """Exact number of points, summing the innermost range lengths."""
        names = self.names
        env: dict[str, int] = {}
        last = len(names) - 1

        def rec(level):
            if level == last:
                return len(self.range_of(level, env))
            tot = 0
            for v in self.range_of(level, env):
                env[names[level]] = v
                tot += rec(level + 1)
            return tot

        return rec(0)


@dataclass
class Compiled:
    """Flat integer arrays consumed by the sweep kernels.

    Parameters are numbered in loop order.  For term t:
      x_const[t], x_coef[t, :], x_den[t], x_inf[t]
      y_const[t], y_coef[t, :], y_den[t]
    and monomials m belonging to term mono_term[m] with coefficient
    mono_c[m] and exponent vector mono_exp[m, :].  Terms are sorted so that
    terms not depending on the innermost parameter come first; ``n_outer``
    counts them.  Bounds use the same layout with one row per bound.
    """

    names: list
    n_outer: int
    x_const: np.ndarray
    x_coef: np.ndarray
    x_den: np.ndarray
    x_inf: np.ndarray
    y_const: np.ndarray
    y_coef: np.ndarray
    y_den: np.ndarray
    mono_term: np.ndarray
    mono_c: np.ndarray
    mono_exp: np.ndarray
    lo_level: np.ndarray
    lo_const: np.ndarray
    lo_coef: np.ndarray
    lo_den: np.ndarray
    hi_level: np.ndarray
    hi_const: np.ndarray
    hi_coef: np.ndarray
    hi_den: np.ndarray
    step: np.ndarray


def _lin_row(lin: Lin | None, names: Sequence[str]):
    if lin is None:
        return 0, [0] * len(names), 1
    unknown = set(lin.coefs) - set(names)
    if unknown:
        raise ValueError(f"expression uses unknown parameters {sorted(unknown)}")
    return lin.const, [lin.coefs.get(n, 0) for n in names], lin.den


def compile_expr(expr: Expr, domain: Domain) -> Compiled:
    names = domain.names
    inner = names[-1]
    terms = list(expr.terms.values())

    def depends_inner(t):
        x, y, c = t
        return inner in ((x.names() if x is not None else set()) | y.names() | c.names())

    terms.sort(key=depends_inner)
    n_outer = sum(1 for t in terms if not depends_inner(t))
    T, P = len(terms), len(names)
    xc = np.zeros(T, np.int64); xk = np.zeros((T, P), np.int64); xd = np.ones(T, np.int64)
    xi = np.zeros(T, np.int64)
    yc = np.zeros(T, np.int64); yk = np.zeros((T, P), np.int64); yd = np.ones(T, np.int64)
    mt, mc, me = [], [], []
    for t, (x, y, c) in enumerate(terms):
        xc[t], xk[t], xd[t] = _lin_row(x, names)
        xi[t] = 1 if x is None else 0
        yc[t], yk[t], yd[t] = _lin_row(y, names)
        for m, cv in c.terms.items():
            e = dict(m)
            if set(e) - set(names):
                raise ValueError(f"coefficient uses unknown parameters {sorted(set(e) - set(names))}")
            mt.append(t)
            mc.append(cv)
            me.append([e.get(n, 0) for n in names])
    rows = {"lo": ([], [], [], []), "hi": ([], [], [], [])}
    for lvl, lp in enumerate(domain.loops):
        for side, bounds in (("lo", lp.lo), ("hi", lp.hi)):
            for b in bounds:
                c0, ck, cd = _lin_row(b, names)
                r = rows[side]
                r[0].append(lvl); r[1].append(c0); r[2].append(ck); r[3].append(cd)
    arr = lambda v, shape=None: np.asarray(v, dtype=np.int64).reshape(shape) if shape else np.asarray(v, dtype=np.int64)
    return Compiled(
        names=list(names), n_outer=n_outer,
        x_const=xc, x_coef=xk, x_den=xd, x_inf=xi,
        y_const=yc, y_coef=yk, y_den=yd,
        mono_term=arr(mt), mono_c=arr(mc), mono_exp=arr(me, (-1, P)),
        lo_level=arr(rows["lo"][0]), lo_const=arr(rows["lo"][1]),
        lo_coef=arr(rows["lo"][2], (-1, P)), lo_den=arr(rows["lo"][3]),
        hi_level=arr(rows["hi"][0]), hi_const=arr(rows["hi"][1]),
        hi_coef=arr(rows["hi"][2], (-1, P)), hi_den=arr(rows["hi"][3]),
        step=arr([lp.step for lp in domain.loops]),
    )

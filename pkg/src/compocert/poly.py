"""Sparse multivariate polynomial arithmetic.

Polynomials carry float coefficients over a fixed variable table with four
blocks: state variables ``x``, inputs ``u``, and their equilibrium
counterparts ``xs``/``us`` (printed as ``xs1``, ``us1``, ...).  Values are
immutable after construction and safe to share between workers.

Monomial order is graded lexicographic (degree first, then exponents with
``x1 > x2 > ... > u1 > ...``), fixed globally so that constraint emission
downstream is deterministic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Mapping

# Coefficients whose magnitude falls below PRUNE_REL times the largest
# coefficient are dropped after arithmetic.
PRUNE_REL = 1e-12

_BLOCKS = ("x", "u", "xs", "us")


@dataclass(frozen=True)
class VarTable:
    """Variable table with x-, u-, xs- and us-blocks."""

    nx: int
    nu: int = 0
    nxs: int = 0
    nus: int = 0

    def __post_init__(self):
        if min(self.nx, self.nu, self.nxs, self.nus) < 0:
            raise ValueError("block sizes must be nonnegative")

    @property
    def nvars(self) -> int:
        return self.nx + self.nu + self.nxs + self.nus

    def x(self, i: int) -> int:
        return self._vid("x", i)

    def u(self, i: int) -> int:
        return self._vid("u", i)

    def xs(self, i: int) -> int:
        return self._vid("xs", i)

    def us(self, i: int) -> int:
        return self._vid("us", i)

    def _block_sizes(self):
        return {"x": self.nx, "u": self.nu, "xs": self.nxs, "us": self.nus}

    def _vid(self, block: str, i: int) -> int:
        sizes = self._block_sizes()
        if not 0 <= i < sizes[block]:
            raise KeyError(f"no variable {block}{i + 1} in table {self}")
        offset = 0
        for b in _BLOCKS:
            if b == block:
                return offset + i
            offset += sizes[b]
        raise KeyError(block)

    def block_of(self, vid: int) -> str:
        offset = 0
        for b in _BLOCKS:
            size = self._block_sizes()[b]
            if vid < offset + size:
                return b
            offset += size
        raise KeyError(f"variable id {vid} out of range")

    def block_ids(self, block: str) -> list[int]:
        sizes = self._block_sizes()
        offset = 0
        for b in _BLOCKS:
            if b == block:
                return list(range(offset, offset + sizes[b]))
            offset += sizes[b]
        raise KeyError(block)

    def name(self, vid: int) -> str:
        block = self.block_of(vid)
        idx = vid - self.block_ids(block)[0]
        return f"{block}{idx + 1}"

    def var_id(self, name: str) -> int:
        m = re.fullmatch(r"(xs|us|x|u)(\d+)", name)
        if m is None:
            raise KeyError(f"malformed variable name {name!r}")
        block, idx = m.group(1), int(m.group(2)) - 1
        return self._vid(block, idx)


@total_ordering
@dataclass(frozen=True)
class Monomial:
    """Product of variables to nonnegative powers; zero powers never stored."""

    exps: tuple[tuple[int, int], ...] = ()

    @staticmethod
    def from_dict(powers: Mapping[int, int]) -> "Monomial":
        items = tuple(sorted((v, p) for v, p in powers.items() if p != 0))
        if any(p < 0 for _, p in items):
            raise ValueError("negative exponent")
        return Monomial(items)

    @property
    def degree(self) -> int:
        return sum(p for _, p in self.exps)

    def power(self, vid: int) -> int:
        for v, p in self.exps:
            if v == vid:
                return p
        return 0

    def mul(self, other: "Monomial") -> "Monomial":
        powers = dict(self.exps)
        for v, p in other.exps:
            powers[v] = powers.get(v, 0) + p
        return Monomial.from_dict(powers)

    def grlex_key(self) -> tuple:
        # Graded lex with lower variable ids ranked higher.
        return (self.degree, tuple((-v, p) for v, p in sorted(self.exps)))

    def __lt__(self, other: "Monomial") -> bool:
        return self.grlex_key() < other.grlex_key()

    def vars(self) -> set[int]:
        return {v for v, _ in self.exps}


class Polynomial:
    """Sparse polynomial: map monomial -> coefficient over a VarTable."""

    __slots__ = ("table", "terms")

    def __init__(self, table: VarTable, terms: Mapping[Monomial, float] | None = None):
        self.table = table
        self.terms: dict[Monomial, float] = dict(terms) if terms else {}
        self._prune()

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(table: VarTable) -> "Polynomial":
        return Polynomial(table)

    @staticmethod
    def const(table: VarTable, c: float) -> "Polynomial":
        return Polynomial(table, {Monomial(): float(c)})

    @staticmethod
    def var(table: VarTable, vid: int, power: int = 1) -> "Polynomial":
        if not 0 <= vid < table.nvars:
            raise KeyError(f"variable id {vid} out of range")
        return Polynomial(table, {Monomial.from_dict({vid: power}): 1.0})

    @staticmethod
    def monomial(table: VarTable, mono: Monomial, c: float = 1.0) -> "Polynomial":
        return Polynomial(table, {mono: float(c)})

    # -- bookkeeping -------------------------------------------------------

    def _prune(self):
        if not self.terms:
            return
        biggest = max(abs(c) for c in self.terms.values())
        if biggest == 0.0:
            self.terms.clear()
            return
        cutoff = PRUNE_REL * biggest
        self.terms = {m: c for m, c in self.terms.items() if abs(c) > cutoff}

    def _check_table(self, other: "Polynomial"):
        if self.table != other.table:
            raise ValueError(
                f"variable-table mismatch: {self.table} vs {other.table}"
            )

    @property
    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(m.degree for m in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, mono: Monomial) -> float:
        return self.terms.get(mono, 0.0)

    def vars(self) -> set[int]:
        out: set[int] = set()
        for m in self.terms:
            out |= m.vars()
        return out

    def sorted_terms(self, reverse: bool = True) -> list[tuple[Monomial, float]]:
        return sorted(self.terms.items(), key=lambda mc: mc[0].grlex_key(), reverse=reverse)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.const(self.table, other)
        self._check_table(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0.0) + c
        return Polynomial(self.table, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.table, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.const(self.table, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial(
                self.table, {m: c * other for m, c in self.terms.items()}
            )
        self._check_table(other)
        terms: dict[Monomial, float] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = m1.mul(m2)
                terms[m] = terms.get(m, 0.0) + c1 * c2
        return Polynomial(self.table, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = Polynomial.const(self.table, 1.0)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        return (
            isinstance(other, Polynomial)
            and self.table == other.table
            and self.terms == other.terms
        )

    def almost_equal(self, other: "Polynomial", tol: float = 1e-9) -> bool:
        self._check_table(other)
        monos = set(self.terms) | set(other.terms)
        return all(abs(self.coeff(m) - other.coeff(m)) <= tol for m in monos)

    # -- calculus, evaluation, composition ---------------------------------

    def diff(self, vid: int) -> "Polynomial":
        if not 0 <= vid < self.table.nvars:
            raise KeyError(f"unknown variable id {vid}")
        terms: dict[Monomial, float] = {}
        for m, c in self.terms.items():
            p = m.power(vid)
            if p == 0:
                continue
            powers = dict(m.exps)
            powers[vid] = p - 1
            dm = Monomial.from_dict(powers)
            terms[dm] = terms.get(dm, 0.0) + c * p
        return Polynomial(self.table, terms)

    def grad(self, vids: Iterable[int]) -> list["Polynomial"]:
        return [self.diff(v) for v in vids]

    def eval(self, point: Mapping[int, float]) -> float:
        total = 0.0
        for m, c in self.terms.items():
            val = c
            for v, p in m.exps:
                if v not in point:
                    raise KeyError(
                        f"missing value for variable {self.table.name(v)}"
                    )
                val *= point[v] ** p
            total += val
        return total

    def substitute(self, vid: int, q: "Polynomial") -> "Polynomial":
        if not 0 <= vid < self.table.nvars:
            raise KeyError(f"unknown variable id {vid}")
        self._check_table(q)
        out = Polynomial.zero(self.table)
        for m, c in self.terms.items():
            p = m.power(vid)
            rest = Monomial.from_dict({v: e for v, e in m.exps if v != vid})
            term = Polynomial.monomial(self.table, rest, c)
            if p:
                term = term * (q ** p)
            out = out + term
        return out

    # -- text form ---------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = []
            if abs(c) != 1.0 or not m.exps:
                factors.append(repr(abs(c)))
            for v, p in sorted(m.exps):
                name = self.table.name(v)
                factors.append(name if p == 1 else f"{name}^{p}")
            text = "*".join(factors)
            if not parts:
                parts.append(text if c > 0 else f"-{text}")
            else:
                parts.append(f"+ {text}" if c > 0 else f"- {text}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({self})"


def _split_terms(text: str) -> list[str]:
    # Split on +/- at term boundaries, keeping signs inside exponents
    # like 1e-12 attached to their number.
    out: list[str] = []
    cur = ""
    for i, ch in enumerate(text):
        if ch in "+-" and cur.strip() and cur.rstrip()[-1].lower() != "e":
            out.append(cur)
            cur = ch
        else:
            cur += ch
    if cur.strip():
        out.append(cur)
    return out


def parse_poly(table: VarTable, text: str) -> Polynomial:
    """Parse terms like ``3.5*x1^2*u1 - x2 + 2``; inverse of ``str()``."""
    text = text.strip()
    if not text or text == "0":
        return Polynomial.zero(table)
    terms: dict[Monomial, float] = {}
    for raw in _split_terms(text):
        raw = raw.strip()
        sign = 1.0
        while raw and raw[0] in "+-":
            if raw[0] == "-":
                sign = -sign
            raw = raw[1:].strip()
        if not raw:
            raise ValueError(f"cannot parse polynomial term in {text!r}")
        coeff = sign
        powers: dict[int, int] = {}
        for factor in raw.split("*"):
            factor = factor.strip()
            if not factor:
                raise ValueError(f"empty factor in term {raw!r}")
            if re.fullmatch(r"[0-9][0-9.eE+-]*|\.[0-9][0-9.eE+-]*", factor):
                coeff *= float(factor)
                continue
            if "^" in factor:
                name, _, p = factor.partition("^")
                power = int(p)
            else:
                name, power = factor, 1
            vid = table.var_id(name.strip())
            powers[vid] = powers.get(vid, 0) + power
        mono = Monomial.from_dict(powers)
        terms[mono] = terms.get(mono, 0.0) + coeff
    return Polynomial(table, terms)

"""Phase-tracked elements of the generalized qudit Pauli group.

An operator is stored as ``gamma**phase * (X^x1 Z^z1) (x) ... (x) (X^xn Z^zn)``
with ``gamma = sqrt(omega)``, ``omega = exp(2*pi*i/d)``, the phase reduced
mod 2d and the exponents mod d.  Each site is kept in "X-power then
Z-power" order.  Since ``Z X = omega X Z``, moving ``Z^b`` past ``X^a``
costs ``omega**(a*b)``, which is ``2*a*b`` in gamma units.

Qudit labels are 1-based throughout this package.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .errors import ParseError

__all__ = [
    "PauliOperator",
    "SpectrumClass",
    "multiply",
    "commutation_exponent",
    "restrict",
    "power",
    "spectrum_class",
    "in_G_prime",
    "parse_pauli",
    "format_pauli",
]


@dataclass(frozen=True)
class PauliOperator:
    d: int
    phase: int
    x: tuple[int, ...]
    z: tuple[int, ...]

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"qudit dimension must be >= 2, got {self.d}")
        if len(self.x) != len(self.z):
            raise ValueError("x and z exponent vectors differ in length")
        object.__setattr__(self, "phase", int(self.phase) % (2 * self.d))
        object.__setattr__(self, "x", tuple(int(a) % self.d for a in self.x))
        object.__setattr__(self, "z", tuple(int(b) % self.d for b in self.z))

    @classmethod
    def identity(cls, d: int, n: int) -> "PauliOperator":
        return cls(d, 0, (0,) * n, (0,) * n)

    @classmethod
    def single(cls, d: int, n: int, site: int, x: int = 0, z: int = 0) -> "PauliOperator":
        """``X^x Z^z`` on the 1-based ``site`` of an ``n``-qudit register."""
        if not 1 <= site <= n:
            raise ValueError(f"site {site} outside [1, {n}]")
        xs = [0] * n
        zs = [0] * n
        xs[site - 1] = x
        zs[site - 1] = z
        return cls(d, 0, tuple(xs), tuple(zs))

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def vector(self) -> tuple[int, ...]:
        """Symplectic exponent vector ``(x_1..x_n, z_1..z_n)``."""
        return self.x + self.z

    def is_scalar(self) -> bool:
        return not any(self.x) and not any(self.z)

    def with_phase(self, phase: int) -> "PauliOperator":
        return PauliOperator(self.d, phase, self.x, self.z)

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return multiply(self, other)

    def __pow__(self, j: int) -> "PauliOperator":
        return power(self, j)

    def __str__(self) -> str:
        return format_pauli(self)


def _check_compatible(g: PauliOperator, h: PauliOperator) -> None:
    if g.d != h.d or g.n != h.n:
        raise ValueError(f"incompatible operators: (d={g.d}, n={g.n}) vs (d={h.d}, n={h.n})")


def multiply(g: PauliOperator, h: PauliOperator) -> PauliOperator:
    _check_compatible(g, h)
    phase = g.phase + h.phase + 2 * sum(b * a2 for b, a2 in zip(g.z, h.x))
    x = tuple(a + a2 for a, a2 in zip(g.x, h.x))
    z = tuple(b + b2 for b, b2 in zip(g.z, h.z))
    return PauliOperator(g.d, phase, x, z)


def commutation_exponent(g: PauliOperator, h: PauliOperator) -> int:
    """``k`` in ``g h = omega**k h g``."""
    _check_compatible(g, h)
    total = sum(b * a2 - a * b2 for a, b, a2, b2 in zip(g.x, g.z, h.x, h.z))
    return total % g.d


def restrict(g: PauliOperator, sites: Iterable[int]) -> PauliOperator:
    """Tensor factors of ``g`` on ``sites`` (ascending), with the phase dropped."""
    T = sorted(set(sites))
    if not T:
        raise ValueError("restriction needs a nonempty site set")
    if T[0] < 1 or T[-1] > g.n:
        raise ValueError(f"sites {T} outside [1, {g.n}]")
    return PauliOperator(g.d, 0, tuple(g.x[i - 1] for i in T), tuple(g.z[i - 1] for i in T))


def power(g: PauliOperator, j: int) -> PauliOperator:
    # g**r is a gamma power, so g**(2*d*r) is the identity and j can be reduced
    j %= 2 * g.d * vector_order(g)
    result = PauliOperator.identity(g.d, g.n)
    base = g
    while j:
        if j & 1:
            result = multiply(result, base)
        base = multiply(base, base)
        j >>= 1
    return result


def vector_order(g: PauliOperator) -> int:
    """Smallest r > 0 with ``g**r`` proportional to the identity."""
    c = gcd(g.d, *g.x, *g.z)
    return g.d // c


@dataclass(frozen=True)
class SpectrumClass:
    """Eigenvalue set ``{gamma**offset * omega**(j*step)}``.

    ``kind`` is ``"plain"`` for offset 0 (spectrum contains 1),
    ``"shifted"`` for offset 1 (the omega**(1/2) family) and ``"other"`` for
    the remaining offsets, which only arise from explicit global phases.
    """
    kind: str
    step: int
    offset: Fraction = Fraction(0)

    def eigenvalue_exponents(self, d: int) -> list[Fraction]:
        """Eigenvalues as exponents of gamma, within [0, 2d)."""
        return sorted((self.offset + 2 * j * self.step) % (2 * d) for j in range(d // self.step))


def spectrum_class(g: PauliOperator) -> SpectrumClass:
    r = vector_order(g)
    e = power(g, r).phase
    # eigenvalues solve lambda**r == gamma**e: lambda = gamma**(e/r) * omega**(j*d/r)
    step = g.d // r
    offset = Fraction(e, r) % (2 * step)
    if offset == 0:
        kind = "plain"
    elif offset == 1:
        kind = "shifted"
    else:
        kind = "other"
    return SpectrumClass(kind, step, offset)


def in_G_prime(g: PauliOperator) -> bool:
    """Whether ``g``'s spectrum is ``{1, omega**c, omega**2c, ...}``."""
    return power(g, vector_order(g)).phase == 0


# -- string form ------------------------------------------------------------------

_SITE_RE = re.compile(r"^(?:X(?:\^(-?\d+))?)?(?:Z(?:\^(-?\d+))?)?$")
_PHASE_RE = re.compile(r"^(w|g)\^(-?\d+)$")


def parse_pauli(text: str, d: int, n: int | None = None) -> PauliOperator:
    """Parse the space-separated per-site form, e.g. ``"w^1 X Z^2 I"``.

    Site tokens are ``I``, ``X^a``, ``Z^b``, ``X^aZ^b`` (exponent 1 may be
    omitted) and, for d == 2, ``Y`` meaning ``i X Z``.  An optional leading
    phase token is ``w^k`` (omega power), ``g^c`` (gamma power) or ``-``.
    """
    tokens = text.split()
    phase = 0
    if tokens and (tokens[0] == "-" or _PHASE_RE.match(tokens[0])):
        tok = tokens.pop(0)
        if tok == "-":
            phase = d
        else:
            kind, k = _PHASE_RE.match(tok).groups()
            phase = 2 * int(k) if kind == "w" else int(k)
    xs: list[int] = []
    zs: list[int] = []
    for pos, tok in enumerate(tokens):
        if tok == "I":
            xs.append(0)
            zs.append(0)
            continue
        if tok == "Y":
            if d != 2:
                raise ParseError(f"'Y' is only defined for d=2", f"token {pos + 1}")
            xs.append(1)
            zs.append(1)
            phase += 1
            continue
        m = _SITE_RE.match(tok)
        if not tok or m is None:
            raise ParseError(f"{tok!r} is not a Pauli site factor", f"token {pos + 1}")
        xs.append(0 if "X" not in tok else int(m.group(1) or 1))
        zs.append(0 if "Z" not in tok else int(m.group(2) or 1))
    if n is not None and len(xs) != n:
        raise ParseError(f"expected {n} site tokens, got {len(xs)} in {text!r}")
    if not xs:
        raise ParseError("empty Pauli string")
    return PauliOperator(d, phase, tuple(xs), tuple(zs))


def _site_token(a: int, b: int) -> str:
    if a == 0 and b == 0:
        return "I"
    xs = "" if a == 0 else ("X" if a == 1 else f"X^{a}")
    zs = "" if b == 0 else ("Z" if b == 1 else f"Z^{b}")
    return xs + zs


def format_pauli(g: PauliOperator) -> str:
    """Canonical string form; ``parse_pauli(format_pauli(g), g.d) == g``."""
    tokens = []
    phase = g.phase
    for a, b in zip(g.x, g.z):
        if g.d == 2 and a == 1 and b == 1:
            tokens.append("Y")
            phase -= 1
        else:
            tokens.append(_site_token(a, b))
    phase %= 2 * g.d
    if phase:
        tokens.insert(0, f"w^{phase // 2}" if phase % 2 == 0 else f"g^{phase}")
    return " ".join(tokens)


def pauli_from_json(obj, d: int, n: int | None = None) -> PauliOperator:
    """Accept either the string form or ``{"phase_gamma", "x", "z"}``."""
    if isinstance(obj, str):
        return parse_pauli(obj, d, n)
    if isinstance(obj, dict):
        missing = {"x", "z"} - set(obj)
        if missing:
            raise ValueError(f"structured generator lacks {sorted(missing)}")
        op = PauliOperator(d, int(obj.get("phase_gamma", 0)), tuple(obj["x"]), tuple(obj["z"]))
        if n is not None and op.n != n:
            raise ValueError(f"generator acts on {op.n} qudits, expected {n}")
        return op
    raise ValueError(f"cannot read a Pauli operator from {type(obj).__name__}")


def pauli_to_json(g: PauliOperator) -> dict:
    return {"phase_gamma": g.phase, "x": list(g.x), "z": list(g.z)}


def tensor(*ops: PauliOperator) -> PauliOperator:
    """Tensor product in argument order; phases add."""
    d = ops[0].d
    if any(op.d != d for op in ops):
        raise ValueError("tensor factors must share d")
    return PauliOperator(
        d,
        sum(op.phase for op in ops),
        tuple(a for op in ops for a in op.x),
        tuple(b for op in ops for b in op.z),
    )


def embed(g: PauliOperator, sites: Sequence[int], n: int) -> PauliOperator:
    """Place the |sites|-qudit operator ``g`` on 1-based ``sites`` of an n-qudit register."""
    if len(sites) != g.n:
        raise ValueError(f"operator has {g.n} sites but {len(sites)} positions were given")
    xs = [0] * n
    zs = [0] * n
    for k, s in enumerate(sites):
        xs[s - 1] = g.x[k]
        zs[s - 1] = g.z[k]
    return PauliOperator(g.d, g.phase, tuple(xs), tuple(zs))

"""Stabilizer groups, restrictions, canonical patterns and decomposition search.

Group elements are handled as exact :class:`PauliOperator` values (phase
included).  Because a valid stabilizer group contains no scalar other than
the identity, an element is determined by its symplectic exponent vector, so
spans, membership and independence all reduce to linear algebra over Z_d on
those vectors; phases are then recovered (and checked) by exact products.

Decomposition search
--------------------
For a partition ``T_1 | ... | T_m | R`` (R = receiver) the search builds,
for each sender ``i``, the subgroup ``K_i`` of elements acting trivially on
every other sender's part, and extracts conjugate pairs from the receiver
restrictions of ``K_i`` by symplectic Gram--Schmidt.  Pairs belonging to
different senders commute on R automatically (the full elements commute and
have disjoint sender supports).  The remaining generators of S are swept
against every pair and form the receiver tail, which is reduced to tail
pairs, isotropic ``Z^a``-type elements and receiver-trivial elements.  The
result is re-verified from scratch by :func:`verify_decomposition`, so the
search may be greedy while the certificate stays sound.  For prime d the
greedy extraction is maximal; for composite d only unit pivots are used and
results are flagged as best-effort.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, prod
from typing import Iterable, Sequence

from .errors import GroupValidationError, PartitionError
from .pauli import (
    PauliOperator,
    commutation_exponent,
    in_G_prime,
    multiply,
    power,
    restrict,
    vector_order,
)
from .zd_linalg import (
    ResidueMatrix,
    ResidueVector,
    kernel_mod,
    row_span_rank_profile,
    smith_normal_form,
    solve_linear_mod,
    span_size,
)

__all__ = [
    "StabilizerGroup",
    "RestrictedGroup",
    "CanonicalPattern",
    "PatternWitness",
    "Decomposition",
    "SearchOutcome",
    "build_group",
    "is_member",
    "restrict_group",
    "certify_pattern",
    "find_bipartite_decomposition",
    "find_multipartite_decomposition",
    "search_decomposition",
    "certify_decomposition",
    "verify_decomposition",
    "projector_rank",
    "normalize_partition",
]


def is_prime(d: int) -> bool:
    return d >= 2 and all(d % p for p in range(2, int(d**0.5) + 1))


def _vectors(ops: Sequence[PauliOperator], d: int, width: int) -> ResidueMatrix:
    return ResidueMatrix([op.vector for op in ops], d, ncols=width)


def _product(ops: Sequence[PauliOperator], exps: Iterable[int], d: int, n: int) -> PauliOperator:
    out = PauliOperator.identity(d, n)
    for op, e in zip(ops, exps):
        e %= d
        if e:
            out = multiply(out, power(op, e))
    return out


def _unit_phase_normalized(g: PauliOperator) -> PauliOperator:
    """``gamma**f * g`` with ``f`` chosen so that ``(gamma**f g)**ord == I``.

    Used to turn a phase-free restriction into a G'-element with the same
    spectrum structure as ``Z``.  Raises if no such ``f`` exists.
    """
    r = vector_order(g)
    e = power(g, r).phase
    for f in range(2 * g.d):
        if (e + f * r) % (2 * g.d) == 0:
            return g.with_phase(g.phase + f)
    raise ArithmeticError(f"{g} cannot be phase-normalized into G'")


# -- groups ------------------------------------------------------------------------


@dataclass(frozen=True)
class StabilizerGroup:
    d: int
    n: int
    generators: tuple[PauliOperator, ...]

    @property
    def k(self) -> int:
        return len(self.generators)

    def vector_matrix(self) -> ResidueMatrix:
        return _vectors(self.generators, self.d, 2 * self.n)

    def order(self) -> int:
        """Number of group elements."""
        return span_size(self.vector_matrix())

    def projector_rank(self) -> int:
        return projector_rank(self)

    def __contains__(self, g: PauliOperator) -> bool:
        return is_member(g, self) is not None


def build_group(generators: Sequence[PauliOperator], d: int | None = None, n: int | None = None) -> StabilizerGroup:
    """Validate ``generators`` and wrap them as a :class:`StabilizerGroup`.

    Checks, in order: consistent (d, n); membership in G'; pairwise
    commutation; that no product of generators is a nontrivial scalar
    (which would make the stabilized space empty); independence.
    """
    gens = tuple(generators)
    if gens:
        d = gens[0].d if d is None else d
        n = gens[0].n if n is None else n
    if d is None or n is None:
        raise GroupValidationError("dimension", "d and n are required for an empty generator list")
    for i, g in enumerate(gens, 1):
        if g.d != d or g.n != n:
            raise GroupValidationError(
                "dimension", f"generator {i} has (d={g.d}, n={g.n}); expected (d={d}, n={n})", (i,)
            )
    for i, g in enumerate(gens, 1):
        if not in_G_prime(g):
            raise GroupValidationError(
                "not_in_G_prime", f"generator {i} ({g}) is not in G': its spectrum does not contain 1", (i,)
            )
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            c = commutation_exponent(gens[i], gens[j])
            if c:
                raise GroupValidationError(
                    "noncommuting",
                    f"generators {i + 1} and {j + 1} do not commute (commutation exponent {c})",
                    (i + 1, j + 1),
                    c,
                )
    if gens:
        # relations among the exponent vectors must not produce a phase
        A = ResidueMatrix.from_array(_vectors(gens, d, 2 * n).array().T.reshape(2 * n, len(gens)), d)
        for rel in kernel_mod(A).rows:
            prod_op = _product(gens, rel, d, n)
            if prod_op.phase:
                involved = tuple(i + 1 for i, e in enumerate(rel) if e)
                raise GroupValidationError(
                    "scalar",
                    f"generators {list(involved)} multiply to the scalar gamma^{prod_op.phase}; "
                    "the stabilized subspace would be empty",
                    involved,
                )
    size = 1
    for i, g in enumerate(gens, 1):
        new = span_size(_vectors(gens[:i], d, 2 * n))
        if g.is_scalar() or new != size * vector_order(g):
            raise GroupValidationError(
                "dependent", f"generator {i} ({g}) is dependent on generators 1..{i - 1}", (i,)
            )
        size = new
    return StabilizerGroup(d, n, gens)


def is_member(g: PauliOperator, S: StabilizerGroup) -> tuple[int, ...] | None:
    """Exponents ``j`` with ``prod_i g_i**j_i == g`` exactly, or None."""
    if g.d != S.d or g.n != S.n:
        raise ValueError(f"operator (d={g.d}, n={g.n}) does not match group (d={S.d}, n={S.n})")
    if S.k == 0:
        return () if g == PauliOperator.identity(S.d, S.n) else None
    At = ResidueMatrix.from_array(S.vector_matrix().array().T.reshape(2 * S.n, S.k), S.d)
    sol = solve_linear_mod(At, ResidueVector(g.vector, S.d))
    if sol is None:
        return None
    if _product(S.generators, sol.entries, S.d, S.n).phase != g.phase:
        return None
    return sol.entries


def projector_rank(S: StabilizerGroup) -> int:
    """``tr(P_S) = d**n / |S|`` (equals ``d**(n-k)`` for prime d)."""
    return S.d**S.n // S.order()


@dataclass(frozen=True)
class RestrictedGroup:
    """``S^(T) = <gamma, g_1^(T), ..., g_k^(T)>``; compared modulo phases."""
    parent: StabilizerGroup
    sites: tuple[int, ...]
    generators: tuple[PauliOperator, ...]

    @property
    def d(self) -> int:
        return self.parent.d

    def vector_matrix(self) -> ResidueMatrix:
        return _vectors(self.generators, self.d, 2 * len(self.sites))

    def order_mod_phase(self) -> int:
        return span_size(self.vector_matrix())

    def contains(self, op: PauliOperator) -> bool:
        return _in_span(self.generators, op, self.d, len(self.sites))

    def same_as(self, other: "RestrictedGroup") -> bool:
        return (
            self.sites == other.sites
            and all(self.contains(g) for g in other.generators)
            and all(other.contains(g) for g in self.generators)
        )


def _in_span(ops: Sequence[PauliOperator], op: PauliOperator, d: int, q: int) -> bool:
    if not ops:
        return op.is_scalar()
    At = ResidueMatrix.from_array(_vectors(ops, d, 2 * q).array().T.reshape(2 * q, len(ops)), d)
    return solve_linear_mod(At, ResidueVector(op.vector, d)) is not None


def restrict_group(S: StabilizerGroup, T: Iterable[int]) -> RestrictedGroup:
    sites = tuple(sorted(set(T)))
    return RestrictedGroup(S, sites, tuple(restrict(g, sites) for g in S.generators))


# -- canonical patterns ---------------------------------------------------------------


@dataclass(frozen=True)
class CanonicalPattern:
    """``<gamma, Z_1, X_1, ..., Z_t, X_t>`` followed by the tail
    ``Z_{t+1}^{a_1} ... Z_{t+s}^{a_s}, X_{t+1}^{b_1} ... X_{t+u}^{b_u}``."""
    t: int
    a: tuple[int, ...] = ()
    b: tuple[int, ...] = ()

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        if len(self.b) > len(self.a):
            raise ValueError("u must not exceed s")

    @property
    def s(self) -> int:
        return len(self.a)

    @property
    def u(self) -> int:
        return len(self.b)


@dataclass(frozen=True)
class PatternWitness:
    """Elements of the restricted group realizing a pattern slot by slot.

    ``z[i]``/``x[i]`` for ``i < t`` are the conjugate pair operators; for the
    tail, ``z[t+i]`` realizes ``Z^{a_i}`` and ``x[t+i]`` realizes ``X^{b_i}``.
    """
    z: tuple[PauliOperator, ...]
    x: tuple[PauliOperator, ...]


def _order_of_exponent(a: int, d: int) -> int:
    return d // gcd(a % d, d)


def check_witness(R: RestrictedGroup, pattern: CanonicalPattern, w: PatternWitness) -> bool:
    d = R.d
    t, s, u = pattern.t, pattern.s, pattern.u
    if len(w.z) != t + s or len(w.x) != t + u:
        return False
    ops = list(w.z) + list(w.x)
    if any(not R.contains(op) for op in ops):
        return False
    # commutation structure: only the matched Z/X slots fail to commute
    for i, zi in enumerate(w.z):
        for j, zj in enumerate(w.z[i + 1:], i + 1):
            if commutation_exponent(zi, zj):
                return False
        for j, xj in enumerate(w.x):
            if j == i:
                want = 1 if i < t else pattern.a[i - t] * pattern.b[i - t]
            else:
                want = 0
            if commutation_exponent(zi, xj) != want % d:
                return False
    for i, xi in enumerate(w.x):
        for xj in w.x[i + 1:]:
            if commutation_exponent(xi, xj):
                return False
    orders = (
        [d] * t
        + [_order_of_exponent(a, d) for a in pattern.a]
        + [d] * t
        + [_order_of_exponent(b, d) for b in pattern.b]
    )
    if [vector_order(op) for op in ops] != orders:
        return False
    q = len(R.sites)
    W = _vectors(ops, d, 2 * q)
    if span_size(W) != prod(orders) or span_size(W) != R.order_mod_phase():
        return False
    return all(_in_span(ops, g, d, q) for g in R.generators)


def certify_pattern(
    R: RestrictedGroup, pattern: CanonicalPattern, witness: PatternWitness | None = None
) -> PatternWitness | None:
    """Witness that ``R`` is isomorphic to the canonical ``pattern``, or None.

    With ``witness`` given it is only checked.  Otherwise a candidate is
    derived by symplectic reduction of ``R`` and matched against the
    pattern (tail pairs need unit exponents in that case).
    """
    if witness is not None:
        return witness if check_witness(R, pattern, witness) else None
    d = R.d
    q = len(R.sites)
    pairs, rest = _extract_pairs(list(R.generators), lambda g: g, d)
    if any(commutation_exponent(a, b) for i, a in enumerate(rest) for b in rest[i + 1:]):
        return None
    iso = []
    for zbar, e in _isotropic_basis(rest, d, q):
        iso.append((zbar, e))
    tail_pairs = [(ab_a, ab_b) for ab_a, ab_b in zip(pattern.a, pattern.b)]
    if any(gcd(a * b, d) != 1 for a, b in tail_pairs):
        return None
    if len(pairs) != pattern.t + pattern.u:
        return None
    z = [p[0] for p in pairs[: pattern.t]]
    x = [p[1] for p in pairs[: pattern.t]]
    tz, tx = [], []
    for (A, B), (a, b) in zip(pairs[pattern.t:], tail_pairs):
        tz.append(power(A, a % d))
        tx.append(power(B, b % d))
    # isotropic slots: match each exponent's order with an SNF factor
    slots = list(pattern.a[pattern.u:])
    avail = list(iso)
    iz = []
    for a in slots:
        want = gcd(a % d, d) if a % d else d
        if want == d:
            iz.append(PauliOperator.identity(d, q))
            continue
        match = next((k for k, (_, e) in enumerate(avail) if gcd(e, d) == want), None)
        if match is None:
            return None
        zbar, _ = avail.pop(match)
        iz.append(power(zbar, a % d))
    if avail:
        return None
    w = PatternWitness(tuple(z + tz + iz), tuple(x + tx))
    return w if check_witness(R, pattern, w) else None


# -- symplectic reduction helpers ---------------------------------------------------


def _extract_pairs(elems, restrict_fn, d, limit=None):
    """Greedy symplectic Gram--Schmidt on the restrictions ``restrict_fn(e)``.

    Returns ``(pairs, rest)``: each pair ``(A, B)`` has restricted
    commutation exponent exactly 1, and every element of ``rest`` commutes
    (on the restriction) with every pair element.  Pairs are taken at the
    lowest available index pair (i, j), i < j.
    """
    work = list(elems)
    pairs = []
    while limit is None or len(pairs) < limit:
        found = None
        for i in range(len(work)):
            ri = restrict_fn(work[i])
            for j in range(i + 1, len(work)):
                c = commutation_exponent(ri, restrict_fn(work[j]))
                if c and gcd(c, d) == 1:
                    found = (i, j, c)
                    break
            if found:
                break
        if found is None:
            break
        i, j, c = found
        A = work[i]
        B = power(work[j], pow(c, -1, d))
        rest = [w for k, w in enumerate(work) if k not in (i, j)]
        work = [_sweep(r, A, B, restrict_fn, d) for r in rest]
        pairs.append((A, B))
    return pairs, work


def _sweep(r, A, B, restrict_fn, d):
    """Multiply ``r`` by powers of A, B so its restriction commutes with both."""
    rr, ra, rb = restrict_fn(r), restrict_fn(A), restrict_fn(B)
    q = commutation_exponent(rr, ra)
    p = (-commutation_exponent(rr, rb)) % d
    if p:
        r = multiply(r, power(A, p))
    if q:
        r = multiply(r, power(B, q))
    return r


def _inverse_mod(M, d):
    """Inverse of a square matrix invertible over Z_d."""
    size = M.shape[0]
    A = ResidueMatrix.from_array(M, d)
    cols = []
    for j in range(size):
        e = [int(i == j) for i in range(size)]
        sol = solve_linear_mod(A, ResidueVector(e, d))
        if sol is None:
            raise ArithmeticError("matrix is not invertible over Z_d")
        cols.append(sol.entries)
    return [[cols[j][i] for j in range(size)] for i in range(size)]


def _isotropic_basis(ops, d, q):
    """SNF basis ``(Zbar_i, e_i)`` of the span of commuting restricted ops."""
    if not ops:
        return []
    D, _, V = smith_normal_form(_vectors(ops, d, 2 * q).array(), d)
    Vinv = _inverse_mod(V, d)
    out = []
    for i in range(min(len(ops), 2 * q)):
        e = int(D[i, i]) % d
        if e:
            out.append((_unit_phase_normalized(PauliOperator(d, 0, tuple(Vinv[i][:q]), tuple(Vinv[i][q:]))), e))
    return out


def _snf_split(elems, restrict_fn, d, width_sites, n):
    """Recombine ``elems`` unimodularly by the SNF of their restriction vectors.

    Returns ``(iso, trivial)``: ``iso`` lists ``(element, e, zbar)`` where the
    element's restriction equals ``zbar**e`` up to phase, and ``trivial``
    lists the elements with trivial restriction (identities dropped).
    """
    if not elems:
        return [], []
    q = width_sites
    M = _vectors([restrict_fn(e) for e in elems], d, 2 * q).array()
    D, U, V = smith_normal_form(M, d)
    Vinv = _inverse_mod(V, d)
    iso, trivial = [], []
    for i in range(len(elems)):
        new = _product(elems, [int(v) for v in U[i]], d, n)
        e = int(D[i, i]) % d if i < min(len(elems), 2 * q) else 0
        if e:
            w = PauliOperator(d, 0, tuple(Vinv[i][:q]), tuple(Vinv[i][q:]))
            iso.append((new, e, _unit_phase_normalized(w)))
        elif new != PauliOperator.identity(d, n):
            trivial.append(new)
    return iso, trivial


def _independent_basis(elems, d, n):
    """Independent generators (SNF recombination) of the group ``<elems>``."""
    if not elems:
        return []
    D, U, _ = smith_normal_form(_vectors(elems, d, 2 * n).array(), d)
    out = []
    for i in range(min(len(elems), 2 * n)):
        if int(D[i, i]) % d:
            out.append(_product(elems, [int(v) for v in U[i]], d, n))
    return out


# -- partitions and decompositions ----------------------------------------------------


def normalize_partition(n: int, parts: Sequence[Iterable[int]], receiver: int | None = None) -> tuple[tuple[int, ...], ...]:
    """Validate a partition of ``1..n``; return it with the receiver last.

    ``receiver`` is the 1-based position of the receiving part in ``parts``
    (default: the last part).  Sender order is otherwise preserved and each
    part is sorted.
    """
    parts = [tuple(sorted(p)) for p in parts]
    if len(parts) < 2:
        raise PartitionError("a partition needs at least one sender and a receiver")
    seen: dict[int, int] = {}
    for idx, p in enumerate(parts, 1):
        if not p:
            raise PartitionError(f"part {idx} is empty")
        if len(set(p)) != len(p):
            raise PartitionError(f"part {idx} repeats a qudit")
        for q in p:
            if not 1 <= q <= n:
                raise PartitionError(f"qudit {q} in part {idx} is outside 1..{n}")
            if q in seen:
                raise PartitionError(f"qudit {q} appears in parts {seen[q]} and {idx}")
            seen[q] = idx
    missing = sorted(set(range(1, n + 1)) - set(seen))
    if missing:
        raise PartitionError(f"qudits {missing} are not assigned to any part")
    r = len(parts) if receiver is None else receiver
    if not 1 <= r <= len(parts):
        raise PartitionError(f"receiver index {r} outside 1..{len(parts)}")
    return tuple(p for i, p in enumerate(parts, 1) if i != r) + (parts[r - 1],)


@dataclass(frozen=True)
class TailElement:
    element: PauliOperator  # element of S
    exponent: int  # restriction equals zbar**exponent up to phase
    zbar: PauliOperator  # phase-normalized receiver operator


@dataclass(frozen=True)
class Decomposition:
    """Certified arrangement of S for a partition (receiver last).

    ``generators`` is the ordered list of Eq. (24): sender 1's pairs
    ``(Z-type, X-type, ...)``, sender 2's pairs, ..., then the tail
    ``Z``-type elements (tail pairs first), the tail ``X``-type elements and
    finally the receiver-trivial elements.  ``groups`` are 0-based index
    lists into ``generators`` for ``P_1, ..., P_{m+1}``.
    """
    d: int
    n: int
    partition: tuple[tuple[int, ...], ...]
    sender_pairs: tuple[tuple[tuple[PauliOperator, PauliOperator], ...], ...]
    tail_pairs: tuple[tuple[PauliOperator, PauliOperator], ...]
    tail_isotropic: tuple[TailElement, ...]
    receiver_trivial: tuple[PauliOperator, ...]
    best_effort: bool = False
    notes: tuple[str, ...] = field(default=())

    @property
    def senders(self) -> tuple[tuple[int, ...], ...]:
        return self.partition[:-1]

    @property
    def receiver(self) -> tuple[int, ...]:
        return self.partition[-1]

    @property
    def m(self) -> int:
        return len(self.partition) - 1

    @property
    def capacities(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.sender_pairs)

    @property
    def t(self) -> int:
        """Bipartite capacity (total for multipartite)."""
        return sum(self.capacities)

    @property
    def pattern(self) -> CanonicalPattern:
        """Canonical pattern of the receiver tail ``P_{m+1}`` alone (t = 0)."""
        return CanonicalPattern(
            0,
            tuple([1] * len(self.tail_pairs) + [te.exponent for te in self.tail_isotropic]),
            tuple([1] * len(self.tail_pairs)),
        )

    @property
    def receiver_pattern(self) -> CanonicalPattern:
        """Pattern of the whole restricted group ``S^(R)``: the sender pairs plus the tail."""
        tail = self.pattern
        return CanonicalPattern(self.t, tail.a, tail.b)

    @property
    def generators(self) -> tuple[PauliOperator, ...]:
        out = [g for pairs in self.sender_pairs for pair in pairs for g in pair]
        out += [a for a, _ in self.tail_pairs] + [te.element for te in self.tail_isotropic]
        out += [b for _, b in self.tail_pairs]
        out += list(self.receiver_trivial)
        return tuple(out)

    @property
    def groups(self) -> tuple[tuple[int, ...], ...]:
        out, pos = [], 0
        for pairs in self.sender_pairs:
            out.append(tuple(range(pos, pos + 2 * len(pairs))))
            pos += 2 * len(pairs)
        out.append(tuple(range(pos, len(self.generators))))
        return tuple(out)

    def tail_witness(self) -> PatternWitness:
        R = self.receiver
        z = [restrict(a, R) for a, _ in self.tail_pairs] + [restrict(te.element, R) for te in self.tail_isotropic]
        x = [restrict(b, R) for _, b in self.tail_pairs]
        return PatternWitness(tuple(z), tuple(x))


@dataclass(frozen=True)
class SearchOutcome:
    decomposition: Decomposition | None
    stage: str
    message: str


def _assemble(S, partition, sender_elems, rest, limits, stage_prefix=""):
    d, n = S.d, S.n
    R = partition[-1]
    rfn = lambda g: restrict(g, R)  # noqa: E731
    sender_pairs = []
    leftovers = []
    for i, elems in enumerate(sender_elems):
        limit = None if limits is None else limits[i]
        pairs, left = _extract_pairs(elems, rfn, d, limit)
        sender_pairs.append(tuple(pairs))
        leftovers.append(left)
    all_pairs = [p for pairs in sender_pairs for p in pairs]
    tail = []
    for g in rest:
        for A, B in all_pairs:
            g = _sweep(g, A, B, rfn, d)
        tail.append(g)
    tail_pairs, tail_rest = _extract_pairs(tail, rfn, d)
    if any(commutation_exponent(rfn(a), rfn(b)) for i, a in enumerate(tail_rest) for b in tail_rest[i + 1:]):
        return SearchOutcome(None, stage_prefix + "tail", "receiver tail has non-unit commutation (composite d)")
    iso, trivial = _snf_split(tail_rest, rfn, d, len(R), n)
    trivial = _independent_basis(trivial, d, n)
    dec = Decomposition(
        d,
        n,
        partition,
        tuple(sender_pairs),
        tuple(tail_pairs),
        tuple(TailElement(e, a, z) for e, a, z in iso),
        tuple(trivial),
        best_effort=not is_prime(d),
        notes=() if is_prime(d) else ("composite d: unit-pivot search only, result is best-effort",),
    )
    problem = verify_decomposition(S, dec)
    if problem:
        return SearchOutcome(None, stage_prefix + "verification", problem)
    return SearchOutcome(dec, "done", f"capacities {dec.capacities}")


def search_decomposition(
    S: StabilizerGroup,
    parts: Sequence[Iterable[int]],
    receiver: int | None = None,
    max_capacities: Sequence[int] | None = None,
) -> SearchOutcome:
    """Greedy capacity search; see the module docstring.

    ``max_capacities`` caps the number of pairs extracted per sender (the
    remaining structure is left to the receiver tail).
    """
    partition = normalize_partition(S.n, parts, receiver)
    senders = partition[:-1]
    if max_capacities is not None and len(max_capacities) != len(senders):
        raise ValueError(f"max_capacities has {len(max_capacities)} entries for {len(senders)} senders")
    d, n = S.d, S.n
    sender_elems = []
    for i in range(len(senders)):
        others = sorted(q for j, T in enumerate(senders) if j != i for q in T)
        if not others or not S.generators:
            sender_elems.append(list(S.generators))
            continue
        cols = [q - 1 for q in others] + [n + q - 1 for q in others]
        A = ResidueMatrix([[g.vector[c] for g in S.generators] for c in cols], d, ncols=S.k)
        K = kernel_mod(A)
        elems = []
        if K.nrows:
            for row in row_span_rank_profile(K).matrix.rows:
                e = _product(S.generators, row, d, n)
                if not e.is_scalar():
                    elems.append(e)
        sender_elems.append(elems)
    return _assemble(S, partition, sender_elems, list(S.generators), max_capacities)


def find_multipartite_decomposition(
    S: StabilizerGroup,
    parts: Sequence[Iterable[int]],
    receiver: int | None = None,
    max_capacities: Sequence[int] | None = None,
) -> Decomposition | None:
    return search_decomposition(S, parts, receiver, max_capacities).decomposition


def find_bipartite_decomposition(S: StabilizerGroup, T2: Iterable[int]) -> Decomposition | None:
    T2 = sorted(set(T2))
    T1 = [q for q in range(1, S.n + 1) if q not in T2]
    if not T1:
        raise PartitionError("the sender part (complement of T_2) is empty")
    return find_multipartite_decomposition(S, [T1, T2])


def certify_decomposition(
    S: StabilizerGroup,
    parts: Sequence[Iterable[int]],
    groups: Sequence[Sequence[int]],
    receiver: int | None = None,
) -> SearchOutcome:
    """Certify a user-supplied split of S's generators into ``P_1..P_{m+1}``.

    ``groups`` holds 1-based generator indices, one list per part in the
    same order as ``parts`` (the receiver's part lists ``P_{m+1}``).
    """
    partition = normalize_partition(S.n, parts, receiver)
    r = len(parts) if receiver is None else receiver
    if len(groups) != len(parts):
        return SearchOutcome(None, "input", f"{len(groups)} generator groups for {len(parts)} parts")
    groups = [list(g) for i, g in enumerate(groups, 1) if i != r] + [list(groups[r - 1])]
    flat = sorted(i for g in groups for i in g)
    if flat != list(range(1, S.k + 1)):
        return SearchOutcome(None, "input", f"groups must use each generator index 1..{S.k} exactly once")
    senders = partition[:-1]
    R = partition[-1]
    sender_elems = []
    for i, idxs in enumerate(groups[:-1]):
        elems = [S.generators[j - 1] for j in idxs]
        for j, g in zip(idxs, elems):
            for other, T in enumerate(senders):
                if other != i and not restrict(g, T).is_scalar():
                    return SearchOutcome(
                        None, "locality", f"generator {j} of P_{i + 1} acts on sender {other + 1}'s qudits"
                    )
        sender_elems.append(elems)
    rest = [S.generators[j - 1] for j in groups[-1]]
    flat_senders = [(i, g) for i, elems in enumerate(sender_elems) for g in elems]
    for i, g in flat_senders:
        for j, h in flat_senders:
            if i < j and commutation_exponent(restrict(g, R), restrict(h, R)):
                return SearchOutcome(None, "cross", f"P_{i + 1} and P_{j + 1} do not commute on the receiver")
        for h in rest:
            if commutation_exponent(restrict(g, R), restrict(h, R)):
                return SearchOutcome(None, "cross", f"P_{i + 1} and P_{len(groups)} do not commute on the receiver")
    pairs_left = [_extract_pairs(e, lambda g: restrict(g, R), S.d) for e in sender_elems]
    for i, (_, left) in enumerate(pairs_left):
        if any(not restrict(g, R).is_scalar() for g in left):
            return SearchOutcome(None, "sender", f"P_{i + 1} restricted to the receiver is not a product of conjugate pairs")
    # local sender elements carry no receiver action: fold them into the tail
    rest = rest + [g for _, left in pairs_left for g in left]
    return _assemble(S, partition, sender_elems, rest, None, stage_prefix="certify-")


def verify_decomposition(S: StabilizerGroup, dec: Decomposition) -> str | None:
    """Re-check every claimed property from scratch; None means certified."""
    d, n = S.d, S.n
    R = dec.receiver
    gens = dec.generators
    try:
        G = build_group(gens, d, n)
    except GroupValidationError as exc:
        return f"decomposition generators invalid: {exc}"
    if G.order() != S.order():
        return "decomposition generators do not generate S"
    for g in gens:
        if is_member(g, S) is None:
            return f"{g} is not an element of S"
    for i, pairs in enumerate(dec.sender_pairs):
        for A, B in pairs:
            for j, T in enumerate(dec.senders):
                if j != i and not (restrict(A, T).is_scalar() and restrict(B, T).is_scalar()):
                    return f"sender {i + 1}'s pair acts on sender {j + 1}'s qudits"
        sub = build_group([g for p in pairs for g in p], d, n) if pairs else None
        if sub is not None:
            Ri = restrict_group(sub, R)
            w = PatternWitness(tuple(restrict(a, R) for a, _ in pairs), tuple(restrict(b, R) for _, b in pairs))
            if certify_pattern(Ri, CanonicalPattern(len(pairs)), w) is None:
                return f"P_{i + 1} restricted to the receiver is not G_{len(pairs)}"
    groups = dec.groups
    for gi, idx_i in enumerate(groups):
        for gj in range(gi + 1, len(groups)):
            for a in idx_i:
                for b in groups[gj]:
                    if commutation_exponent(restrict(gens[a], R), restrict(gens[b], R)):
                        return f"P_{gi + 1} and P_{gj + 1} do not commute on the receiver"
    tail = [gens[i] for i in groups[-1]]
    if tail:
        Rt = restrict_group(build_group(tail, d, n), R)
        if certify_pattern(Rt, dec.pattern, dec.tail_witness()) is None:
            return "receiver tail does not match its canonical pattern"
    for te in dec.tail_isotropic:
        if power(te.zbar, te.exponent).vector != restrict(te.element, R).vector:
            return "tail element does not match its recorded Z-bar power"
    return None

"""Protocol synthesis: receiver unitary, sender measurements, corrections.

Message qudits are labelled separately from the shared register: sender i
owns ``a_i`` message qudits, and its measurement operators ``h''`` act on
the sender's sites ``T_i`` (ascending) followed by those message qudits.
Outcome vectors are interleaved per pair: ``x_{2l-1}`` labels the Z-type
operator and ``x_{2l}`` the X-type operator of the l-th pair overall.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .dense import CONSTRUCTION_TOL, pauli_matrix, projector
from .errors import NoDecompositionError
from .pauli import (
    PauliOperator,
    commutation_exponent,
    in_G_prime,
    restrict,
    tensor,
    vector_order,
)
from .stabilizer import (
    Decomposition,
    StabilizerGroup,
    _unit_phase_normalized,
    certify_decomposition,
    search_decomposition,
)

__all__ = [
    "CorrectionRule",
    "ProtocolSpec",
    "synthesize_receiver_unitary",
    "build_sender_measurement",
    "correction_unitary",
    "synthesize_protocol",
    "conjugation_residuals",
]

UNITARY_ORDERS = ("before", "after")


# -- Lemma 1: receiver unitary ---------------------------------------------------------


def _check_witness_operators(zbar, xbar, d, q):
    s, t = len(zbar), len(xbar)
    if t > s:
        raise ValueError(f"{t} X-bar operators but only {s} Z-bar operators")
    if s > q:
        raise ValueError(f"{s} independent Z-bar operators cannot act on {q} qudits")
    for name, ops in (("Zbar", zbar), ("Xbar", xbar)):
        for i, op in enumerate(ops, 1):
            if op.d != d or op.n != q:
                raise ValueError(f"{name}_{i} acts on (d={op.d}, n={op.n}); expected (d={d}, n={q})")
            if vector_order(op) != d or not in_G_prime(op):
                raise ValueError(f"{name}_{i} ({op}) does not have the spectrum of Z (order d, eigenvalue 1)")
    for i in range(s):
        for j in range(i + 1, s):
            if commutation_exponent(zbar[i], zbar[j]):
                raise ValueError(f"Zbar_{i + 1} and Zbar_{j + 1} do not commute")
    for i in range(t):
        for j in range(i + 1, t):
            if commutation_exponent(xbar[i], xbar[j]):
                raise ValueError(f"Xbar_{i + 1} and Xbar_{j + 1} do not commute")
    for i in range(s):
        for j in range(t):
            c = commutation_exponent(zbar[i], xbar[j])
            if c != (1 if i == j else 0):
                raise ValueError(
                    f"commutation exponent of Zbar_{i + 1} and Xbar_{j + 1} is {c}, expected {int(i == j)}"
                )


def _orthonormal_columns(P: np.ndarray, rank: int) -> np.ndarray:
    """Gram--Schmidt over the columns of a projector, in index order.

    A column is accepted when its residual norm exceeds 1e-3; since the
    residual projector has trace >= 1 while columns remain to be found, some
    column always has residual norm >= dim**-0.5, which is above that
    threshold for every dimension allowed by the memory budget.
    """
    basis: list[np.ndarray] = []
    for j in range(P.shape[1]):
        if len(basis) == rank:
            break
        v = P[:, j].copy()
        for _ in range(2):
            for b in basis:
                v -= b * np.vdot(b, v)
        nv = np.linalg.norm(v)
        if nv > 1e-3:
            basis.append(v / nv)
    if len(basis) != rank:
        raise ArithmeticError(f"eigenspace has dimension {len(basis)}, expected {rank}")
    return np.column_stack(basis)


def _labelled_basis(zbar, xbar, d, q):
    """Columns ``|psi(x; alpha)>`` grouped by label ``x`` in lexicographic order."""
    s, t = len(zbar), len(xbar)
    mult = d ** (q - s)
    X = [pauli_matrix(op) for op in xbar]
    out = []
    seeds = {}
    for z in itertools.product(range(d), repeat=s - t):
        P = projector(list(zbar), [0] * t + list(z), d=d, n=q)
        seeds[z] = _orthonormal_columns(P, mult)
    for label in itertools.product(range(d), repeat=s):
        y, z = label[:t], label[t:]
        B = seeds[z]
        for j, yj in enumerate(y):
            for _ in range(yj):
                B = X[j] @ B
        out.append(B)
    return out


def synthesize_receiver_unitary(
    zbar: Sequence[PauliOperator], xbar: Sequence[PauliOperator], d: int, q: int
) -> np.ndarray:
    """Unitary U with ``U Zbar_i U^dag = Z_i`` and ``U Xbar_j U^dag = X_j``."""
    zbar, xbar = list(zbar), list(xbar)
    _check_witness_operators(zbar, xbar, d, q)
    std_z = [PauliOperator.single(d, q, i + 1, z=1) for i in range(len(zbar))]
    std_x = [PauliOperator.single(d, q, i + 1, x=1) for i in range(len(xbar))]
    if q == 0:
        return np.eye(1, dtype=complex)
    bar = _labelled_basis(zbar, xbar, d, q)
    std = _labelled_basis(std_z, std_x, d, q)
    U = sum(S @ B.conj().T for S, B in zip(std, bar))
    return np.asarray(U, dtype=complex)


def conjugation_residuals(U, zbar, xbar) -> list[float]:
    """Max-entry residuals of ``U op U^dag - target`` for every witness op."""
    if not zbar and not xbar:
        return []
    d = (zbar or xbar)[0].d
    q = (zbar or xbar)[0].n
    res = []
    for i, op in enumerate(zbar):
        target = pauli_matrix(PauliOperator.single(d, q, i + 1, z=1))
        res.append(float(np.max(np.abs(U @ pauli_matrix(op) @ U.conj().T - target))))
    for j, op in enumerate(xbar):
        target = pauli_matrix(PauliOperator.single(d, q, j + 1, x=1))
        res.append(float(np.max(np.abs(U @ pauli_matrix(op) @ U.conj().T - target))))
    return res


# -- protocol data -----------------------------------------------------------------------


@dataclass(frozen=True)
class CorrectionRule:
    """``Z^(z_coeff * x[z_from]) X^(x_coeff * x[x_from])`` on one destination site.

    ``x_from``/``z_from`` are 1-based positions in the outcome vector.
    """
    site: int
    x_from: int
    x_coeff: int
    z_from: int
    z_coeff: int


@dataclass(frozen=True)
class ProtocolSpec:
    d: int
    n: int
    generators: tuple[PauliOperator, ...]  # of S, used to rebuild rho_S
    partition: tuple[tuple[int, ...], ...]  # senders..., receiver
    capacities: tuple[int, ...]
    unitary: np.ndarray = field(compare=False)
    zbar: tuple[PauliOperator, ...]
    xbar: tuple[PauliOperator, ...]
    measurements: tuple[tuple[PauliOperator, ...], ...]  # h'' per sender
    destinations: tuple[tuple[int, ...], ...]
    corrections: tuple[CorrectionRule, ...]
    unitary_order: str = "before"
    best_effort: bool = False

    @property
    def senders(self) -> tuple[tuple[int, ...], ...]:
        return self.partition[:-1]

    @property
    def receiver(self) -> tuple[int, ...]:
        return self.partition[-1]

    @property
    def b(self) -> int:
        return sum(self.capacities)

    @property
    def outcome_count(self) -> int:
        return self.d ** (2 * self.b)

    def with_corrections(self, rules: Sequence[CorrectionRule]) -> "ProtocolSpec":
        return replace(self, corrections=tuple(rules))

    def correction(self, x: Sequence[int]) -> PauliOperator:
        """The correction on the destination sites (ascending) for outcome ``x``."""
        return correction_from_rules(self.corrections, x, self.d, sorted(q for T in self.destinations for q in T))


def correction_from_rules(rules, x, d, sites) -> PauliOperator:
    pos = {q: i for i, q in enumerate(sites)}
    xs, zs = [0] * len(sites), [0] * len(sites)
    phase = 0
    for r in rules:
        a = r.x_coeff * x[r.x_from - 1]
        b = r.z_coeff * x[r.z_from - 1]
        i = pos[r.site]
        # Z^b X^a = omega^(a*b) X^a Z^b
        phase += 2 * a * b
        xs[i] += a
        zs[i] += b
    return PauliOperator(d, phase, tuple(xs), tuple(zs))


def correction_unitary(x: Sequence[int], b: int, d: int) -> PauliOperator:
    """``V(x) = (x)_{l=1..b} Z^(-x_{2l}) X^(x_{2l-1})`` on b qudits."""
    if len(x) != 2 * b:
        raise ValueError(f"outcome vector has length {len(x)}, expected {2 * b}")
    rules = [CorrectionRule(l + 1, 2 * l + 1, 1, 2 * l + 2, d - 1) for l in range(b)]
    return correction_from_rules(rules, x, d, list(range(1, b + 1)))


def _pair_operators(pair, sender_sites, receiver_sites):
    """``(R, Zbar)`` with ``g = R (x) Zbar`` exactly for a pair element g."""
    ops = []
    for g in pair:
        bar = _unit_phase_normalized(restrict(g, receiver_sites))
        R = restrict(g, sender_sites).with_phase(g.phase - bar.phase)
        ops.append((R, bar))
    return ops


def build_sender_measurement(dec: Decomposition, i: int) -> tuple[PauliOperator, ...]:
    """The ``2 a_i`` commuting operators ``h''`` of sender ``i`` (0-based).

    Each acts on ``T_i`` (ascending) followed by the sender's ``a_i``
    message qudits.
    """
    T = dec.senders[i]
    pairs = dec.sender_pairs[i]
    a = len(pairs)
    d = dec.d
    out = []
    for j, pair in enumerate(pairs):
        (Rz, _), (Rx, _) = _pair_operators(pair, T, dec.receiver)
        mz = PauliOperator.single(d, a, j + 1, z=1)
        mx = PauliOperator.single(d, a, j + 1, x=1)
        out.append(tensor(Rz, mz))
        out.append(tensor(Rx, mx))
    return tuple(out)


def synthesize_protocol(
    S: StabilizerGroup,
    parts: Sequence[Sequence[int]],
    receiver: int | None = None,
    decomposition: Decomposition | Sequence[Sequence[int]] | None = None,
    max_capacities: Sequence[int] | None = None,
    unitary_order: str = "before",
) -> ProtocolSpec:
    """Assemble a :class:`ProtocolSpec`.

    ``decomposition`` may be a ready :class:`Decomposition`, a list of
    1-based generator index groups to certify, or None to search.  A failed
    search raises :class:`NoDecompositionError` (which never means the
    capacity is unachievable).
    """
    if unitary_order not in UNITARY_ORDERS:
        raise ValueError(f"unitary_order must be one of {UNITARY_ORDERS}")
    if isinstance(decomposition, Decomposition):
        dec = decomposition
    else:
        if decomposition is None:
            outcome = search_decomposition(S, parts, receiver, max_capacities)
        else:
            outcome = certify_decomposition(S, parts, decomposition, receiver)
        if outcome.decomposition is None:
            raise NoDecompositionError(f"no decomposition found (stage {outcome.stage}: {outcome.message})")
        dec = outcome.decomposition
    if dec.t == 0:
        raise NoDecompositionError("no decomposition with nonzero capacity found")
    d = dec.d
    R = dec.receiver
    q = len(R)
    zbar, xbar = [], []
    for i, pairs in enumerate(dec.sender_pairs):
        for pair in pairs:
            (_, zb), (_, xb) = _pair_operators(pair, dec.senders[i], R)
            zbar.append(zb)
            xbar.append(xb)
    for A, B in dec.tail_pairs:
        zbar.append(_unit_phase_normalized(restrict(A, R)))
        xbar.append(_unit_phase_normalized(restrict(B, R)))
    # Lemma 1 order: paired Z-bars first (sender pairs, then tail pairs), then
    # the isotropic tail; the latter are optional for correctness and only
    # included when they have the exponent-1 form
    tail_z = [te.zbar for te in dec.tail_isotropic if _fits(te.zbar, zbar, xbar)]
    zbar_all = zbar + tail_z
    U = synthesize_receiver_unitary(zbar_all, xbar, d, q)
    res = conjugation_residuals(U, zbar_all, xbar)
    if res and max(res) > CONSTRUCTION_TOL:
        raise ArithmeticError(f"receiver unitary conjugation residual {max(res):.3e} exceeds tolerance")
    caps = dec.capacities
    destinations, rules = [], []
    pos = 0
    for a in caps:
        destinations.append(tuple(R[pos:pos + a]))
        for j in range(a):
            l = pos + j + 1  # 1-based pair index overall
            rules.append(CorrectionRule(R[l - 1], 2 * l - 1, 1, 2 * l, d - 1))
        pos += a
    return ProtocolSpec(
        d=d,
        n=dec.n,
        generators=tuple(S.generators),
        partition=dec.partition,
        capacities=caps,
        unitary=U,
        zbar=tuple(zbar_all),
        xbar=tuple(xbar),
        measurements=tuple(build_sender_measurement(dec, i) for i in range(dec.m)),
        destinations=tuple(destinations),
        corrections=tuple(rules),
        unitary_order=unitary_order,
        best_effort=dec.best_effort,
    )


def _fits(op, zbar, xbar) -> bool:
    """Whether an isotropic tail operator can join Lemma 1's Z-bar list."""
    if vector_order(op) != op.d or not in_G_prime(op):
        return False
    return all(commutation_exponent(op, o) == 0 for o in list(zbar) + list(xbar))


def sender_projector(spec: ProtocolSpec, i: int, x: Sequence[int]) -> np.ndarray:
    """``P(h''; x)`` for sender ``i`` (0-based) on ``T_i`` + message qudits."""
    ops = list(spec.measurements[i])
    nq = len(spec.senders[i]) + spec.capacities[i]
    return projector(ops, list(x), d=spec.d, n=nq)


def joint_measurement(spec: ProtocolSpec) -> tuple[PauliOperator, ...]:
    """The operators ``h'`` on all senders' sites followed by all message qudits."""
    sizes = [len(T) for T in spec.senders]
    total_sites = sum(sizes)
    b = spec.b
    d = spec.d
    out = []
    site_off, msg_off = 0, 0
    for i, ops in enumerate(spec.measurements):
        for h in ops:
            xs = [0] * (total_sites + b)
            zs = [0] * (total_sites + b)
            for k in range(sizes[i]):
                xs[site_off + k] = h.x[k]
                zs[site_off + k] = h.z[k]
            for k in range(spec.capacities[i]):
                xs[total_sites + msg_off + k] = h.x[sizes[i] + k]
                zs[total_sites + msg_off + k] = h.z[sizes[i] + k]
            out.append(PauliOperator(d, h.phase, tuple(xs), tuple(zs)))
        site_off += sizes[i]
        msg_off += spec.capacities[i]
    return tuple(out)


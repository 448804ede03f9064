"""Brute-force dense-matrix oracle.

Everything here materializes full complex matrices, so it is only meant for
small registers.  Site positions passed to the tensor helpers
(``apply_local``, ``partial_trace``) are 0-based axis positions, unlike the
1-based qudit labels used by the algebraic modules.
"""
from __future__ import annotations

from functools import lru_cache
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BudgetError, SimulationInconsistencyError
from .pauli import PauliOperator

DEFAULT_BUDGET = 2**13

CONSTRUCTION_TOL = 1e-10
EQUALITY_TOL = 1e-12
PERFECTION_TOL = 1e-8


def check_budget(dim: int, budget: int = DEFAULT_BUDGET) -> None:
    if dim > budget:
        raise BudgetError(f"dense dimension {dim} exceeds budget {budget}; raise --budget to allow it")


@lru_cache(maxsize=None)
def _shift(d: int) -> np.ndarray:
    X = np.zeros((d, d), dtype=complex)
    X[(np.arange(d) + 1) % d, np.arange(d)] = 1.0
    X.flags.writeable = False
    return X


@lru_cache(maxsize=None)
def _clock(d: int) -> np.ndarray:
    Z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    Z.flags.writeable = False
    return Z


def site_matrix(d: int, a: int, b: int) -> np.ndarray:
    """``X^a Z^b`` as a d x d matrix."""
    return np.linalg.matrix_power(_shift(d), a % d) @ np.linalg.matrix_power(_clock(d), b % d)


def pauli_matrix(g: PauliOperator, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    check_budget(g.d**g.n, budget)
    out = np.array([[np.exp(1j * np.pi * g.phase / g.d)]])
    for a, b in zip(g.x, g.z):
        out = np.kron(out, site_matrix(g.d, a, b))
    return out


def projector(gens: Sequence[PauliOperator], x: Sequence[int], d: int | None = None,
              n: int | None = None, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Projector onto the joint eigenspace ``g_i = omega**x_i``.

    ``d`` and ``n`` are only needed when ``gens`` is empty.
    """
    if len(gens) != len(x):
        raise ValueError(f"{len(gens)} operators but {len(x)} outcome labels")
    if gens:
        d, n = gens[0].d, gens[0].n
    if d is None or n is None:
        raise ValueError("d and n are required for an empty operator list")
    check_budget(d**n, budget)
    omega = np.exp(2j * np.pi / d)
    P = np.eye(d**n, dtype=complex)
    for g, xi in zip(gens, x):
        G = pauli_matrix(g, budget)
        acc = np.zeros_like(P)
        Gj = np.eye(d**n, dtype=complex)
        for j in range(d):
            acc += omega ** (-j * xi) * Gj
            Gj = Gj @ G
        P = P @ acc / d
    return P


def stabilizer_projector(gens: Sequence[PauliOperator], d: int, n: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    return projector(list(gens), [0] * len(gens), d=d, n=n, budget=budget)


def rho_S(S, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Maximally mixed state on the space stabilized by ``S``."""
    P = stabilizer_projector(S.generators, S.d, S.n, budget)
    tr = np.trace(P).real
    if tr < 0.5:
        raise ValueError("stabilized subspace is empty")
    expected = S.projector_rank()
    if abs(tr - expected) > 1e-9:
        raise ArithmeticError(f"tr(P_S) = {tr} but the group predicts {expected}")
    return P / tr


def random_density_matrix(dim: int, seed) -> np.ndarray:
    """Hilbert-Schmidt random state: ``G G^dag / tr`` for complex Gaussian G."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def is_density_matrix(rho: np.ndarray, tol: float = CONSTRUCTION_TOL) -> bool:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        return False
    if abs(np.trace(rho) - 1) > tol:
        return False
    return np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() > -1e-9


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return 0.5 * float(np.linalg.svd(a - b, compute_uv=False).sum())


def apply_local(rho: np.ndarray, op: np.ndarray, sites: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """``op rho op^dag`` with ``op`` acting on the listed tensor positions."""
    n = len(dims)
    sites = list(sites)
    if not sites:
        return rho
    k = len(sites)
    local = [dims[s] for s in sites]
    t = rho.reshape(list(dims) * 2)
    opt = op.reshape(local * 2)
    # rows
    t = np.tensordot(opt, t, axes=(list(range(k, 2 * k)), sites))
    t = np.moveaxis(t, list(range(k)), sites)
    # columns
    t = np.tensordot(t, opt.conj(), axes=([n + s for s in sites], list(range(k, 2 * k))))
    t = np.moveaxis(t, list(range(2 * n - k, 2 * n)), [n + s for s in sites])
    return t.reshape(rho.shape)


def partial_trace(rho: np.ndarray, keep: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Reduced state on ``keep`` (0-based positions, output in the given order)."""
    n = len(dims)
    keep = list(keep)
    if int(np.prod(dims)) != rho.shape[0]:
        raise ValueError(f"dims {list(dims)} do not match matrix size {rho.shape[0]}")
    if len(set(keep)) != len(keep) or any(not 0 <= s < n for s in keep):
        raise ValueError(f"invalid site list {keep}")
    t = rho.reshape(list(dims) * 2)
    row = list(range(n))
    col = [n + i if i in keep else i for i in range(n)]
    out = keep + [n + i for i in keep]
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return np.einsum(t, row + col, out).reshape(dk, dk)


def measure_and_discard(rho: np.ndarray, P: np.ndarray, sites: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """``tr_sites(P rho P)`` for a projector ``P`` on ``sites``; the rest keep their order.

    Uses ``tr_A(P rho P) = tr_A(P rho)`` (cyclicity inside A, P idempotent).
    """
    n = len(dims)
    sites = list(sites)
    rest = [i for i in range(n) if i not in sites]
    da = int(np.prod([dims[i] for i in sites])) if sites else 1
    db = int(np.prod([dims[i] for i in rest])) if rest else 1
    t = permute_sites(rho, sites + rest, dims).reshape(da, db, da, db)
    return np.tensordot(P, t, axes=([0, 1], [2, 0]))


def permute_sites(rho: np.ndarray, order: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: new position i holds old position ``order[i]``."""
    n = len(dims)
    t = rho.reshape(list(dims) * 2)
    t = np.transpose(t, list(order) + [n + i for i in order])
    return t.reshape(rho.shape)


ZERO_PROBABILITY = 1e-12
ENUMERATION_LIMIT = 4096


@dataclass(frozen=True)
class OutcomeRecord:
    x: tuple[int, ...]
    probability: float
    distance: float | None  # None for skipped zero-probability branches
    state: np.ndarray | None = field(default=None, compare=False, repr=False)


@dataclass
class SimulationResult:
    mode: str
    outcomes: list[OutcomeRecord]
    zero_probability: list[tuple[int, ...]]

    @property
    def evaluated(self) -> list[OutcomeRecord]:
        return [o for o in self.outcomes if o.distance is not None]

    @property
    def covered(self) -> int:
        return len(self.outcomes)

    @property
    def max_distance(self) -> float:
        return max((o.distance for o in self.evaluated), default=0.0)

    @property
    def mean_distance(self) -> float:
        ev = self.evaluated
        return sum(o.distance for o in ev) / len(ev) if ev else 0.0

    @property
    def probability_sum(self) -> float:
        return sum(o.probability for o in self.outcomes)

    @property
    def perfect(self) -> bool:
        return self.max_distance < PERFECTION_TOL

    @property
    def verdict(self) -> str:
        return "PERFECT" if self.perfect else "IMPERFECT"


def _kron_all(mats):
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def run_protocol(spec, inputs: Sequence[np.ndarray], mode: str = "auto", samples: int = 50,
                 seed=None, budget: int = DEFAULT_BUDGET, keep_states: bool = False) -> SimulationResult:
    """Execute a protocol spec on input states and score every branch.

    Register layout: the shared qudits 1..n, then each sender's message
    qudits in sender order.  Operations local to a sender are applied and
    that sender's qudits are traced out immediately (nothing later acts on
    them), which keeps the working matrices small; the receiver's qudits
    outside the destinations are likewise traced out once U has acted.

    ``mode`` is ``"enumerate"``, ``"sample"`` or ``"auto"`` (enumerate when
    there are at most 4096 outcomes).  Sampling draws ``samples`` outcome
    vectors sender by sender from the exact conditional probabilities.
    """
    from .stabilizer import build_group  # local import: stabilizer does not need numpy matrices

    d = spec.d
    caps = list(spec.capacities)
    m = len(caps)
    if len(inputs) != m:
        raise ValueError(f"{len(inputs)} input states for {m} senders")
    for i, (sigma, a) in enumerate(zip(inputs, caps)):
        if sigma.shape != (d**a, d**a):
            raise ValueError(f"input {i + 1} has shape {sigma.shape}, expected {(d**a, d**a)}")
    check_budget(d ** (spec.n + sum(caps)), budget)
    if mode == "auto":
        mode = "enumerate" if spec.outcome_count <= ENUMERATION_LIMIT else "sample"
    if mode not in ("enumerate", "sample"):
        raise ValueError(f"unknown mode {mode!r}")

    S = build_group(spec.generators, d, spec.n)
    rho = rho_S(S, budget)
    R = list(spec.receiver)
    dest = sorted(q for T in spec.destinations for q in T)
    # working register: list of (kind, label) with matching dims
    labels = [("q", q) for q in range(1, spec.n + 1)]
    if spec.unitary_order == "before":
        rho = apply_local(rho, spec.unitary, [q - 1 for q in R], [d] * spec.n)
        keep = [i for i, (_, q) in enumerate(labels) if q not in R or q in dest]
        rho = partial_trace(rho, keep, [d] * spec.n)
        labels = [labels[i] for i in keep]
    for i, a in enumerate(caps):
        rho = np.kron(rho, inputs[i])
        labels += [("m", (i, j)) for j in range(a)]

    projectors = []
    for i, ops in enumerate(spec.measurements):
        nq = len(spec.senders[i]) + caps[i]
        projectors.append({
            x: projector(list(ops), list(x), d=d, n=nq)
            for x in itertools.product(range(d), repeat=2 * caps[i])
        })
    target = _kron_all(inputs)
    rng = np.random.default_rng(seed)

    def sender_positions(i, labs):
        pos = [labs.index(("q", q)) for q in spec.senders[i]]
        return pos + [labs.index(("m", (i, j))) for j in range(caps[i])]

    def branch(i, state, labs):
        pos = sender_positions(i, labs)
        dims = [d] * len(labs)
        keep = [p for p in range(len(labs)) if p not in pos]
        new_labs = [labs[p] for p in keep]
        da = d ** len(pos)
        db = d ** len(keep)
        t = permute_sites(state, pos + keep, dims).reshape(da, db, da, db)
        for x, P in projectors[i].items():
            yield x, np.tensordot(P, t, axes=([0, 1], [2, 0])), new_labs

    def finish(state, labs, x):
        p = float(np.trace(state).real)
        if p < ZERO_PROBABILITY:
            return OutcomeRecord(x, p, None)
        out = state / p
        if spec.unitary_order == "after":
            out = apply_local(out, spec.unitary, [labs.index(("q", q)) for q in R], [d] * len(labs))
            keep = [labs.index(("q", q)) for q in dest]
            out = partial_trace(out, keep, [d] * len(labs))
        else:
            order = [labs.index(("q", q)) for q in dest]
            out = permute_sites(out, order, [d] * len(labs))
        if dest:
            out = apply_local(out, pauli_matrix(spec.correction(x)), list(range(len(dest))), [d] * len(dest))
        return OutcomeRecord(x, p, trace_distance(out, target), out if keep_states else None)

    records: list[OutcomeRecord] = []
    if mode == "enumerate":
        def walk(i, state, labs, prefix):
            if i == m:
                records.append(finish(state, labs, prefix))
                return
            for x, post, new_labs in branch(i, state, labs):
                walk(i + 1, post, new_labs, prefix + x)
        walk(0, rho, labels, ())
    else:
        for _ in range(samples):
            state, labs, prefix = rho, labels, ()
            for i in range(m):
                options = list(branch(i, state, labs))
                probs = np.array([max(np.trace(post).real, 0.0) for _, post, _ in options])
                total = probs.sum()
                if total < ZERO_PROBABILITY:
                    raise SimulationInconsistencyError("all measurement branches have zero probability")
                k = rng.choice(len(options), p=probs / total)
                x, post, labs = options[k]
                state, prefix = post, prefix + x
            records.append(finish(state, labs, prefix))
    evaluated = [r for r in records if r.distance is not None]
    if not evaluated:
        raise SimulationInconsistencyError("every outcome has probability below 1e-12; the protocol spec is broken")
    return SimulationResult(mode, records, [r.x for r in records if r.distance is None])

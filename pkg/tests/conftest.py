from __future__ import annotations

from functools import reduce

import numpy as np
import pytest

from stabtel.pauli import PauliOperator, parse_pauli
from stabtel.stabilizer import build_group

EX2 = ["X X^2 X Z Z", "Z^2 Z I X I", "Z Z Z I X", "X X Z X Z^2", "I I Z^2 X^2 I"]
EX3 = [
    "X Y I I I Z Y I",
    "X Z I I I X Y I",
    "I I Z Y Z I Y X",
    "I I Z I X I Y Z",
    "I I Z Z X Y X Y",
    "I I X X Z Y Z Y",
    "Z X I Z X I I I",
]
EX3_PARTITION_1 = [[1, 2], [3, 4, 5], [6, 7, 8]]
EX3_PARTITION_2 = [[1, 6], [3, 8], [2, 4, 5, 7]]


def bell_group(d):
    return build_group([parse_pauli("Z^-1 Z", d), parse_pauli("X X", d)])


def ex2_group():
    return build_group([parse_pauli(s, 3) for s in EX2])


def ex3_group():
    return build_group([parse_pauli(s, 2) for s in EX3])


def ex3_transformed_group():
    """g1, g2, g3, g4, g1g2g3g4g5, g1g2g6, g1g2g7 -- the same group as ex3."""
    g = [parse_pauli(s, 2) for s in EX3]
    return build_group(g[:4] + [g[0] * g[1] * g[2] * g[3] * g[4], g[0] * g[1] * g[5], g[0] * g[1] * g[6]])


# -- an independent dense construction, used as oracle against stabtel.dense --------


def ref_site(d, a, b):
    """X^a Z^b from the defining action X|j> = |j+1>, Z|j> = w^j |j>."""
    w = np.exp(2j * np.pi / d)
    M = np.zeros((d, d), dtype=complex)
    for j in range(d):
        M[(j + a) % d, j] = w ** (b * j)
    return M


def ref_matrix(g: PauliOperator):
    gamma = np.exp(1j * np.pi / g.d)
    mats = [ref_site(g.d, a, b) for a, b in zip(g.x, g.z)]
    return gamma**g.phase * reduce(np.kron, mats, np.eye(1))


def random_pauli(rng, d, n, phase=True):
    return PauliOperator(
        d,
        int(rng.integers(2 * d)) if phase else 0,
        tuple(int(v) for v in rng.integers(d, size=n)),
        tuple(int(v) for v in rng.integers(d, size=n)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance summary: PASS/FAIL lines printed at the end of every run ---------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    def emit(criterion: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

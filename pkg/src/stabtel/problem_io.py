"""Problem and protocol file formats.

Problem files come in two forms.

JSON::

    {"d": 3, "n": 5,
     "generators": ["X X^2 X Z Z", {"phase_gamma": 0, "x": [...], "z": [...]}],
     "partition": [[1, 2], [3, 4, 5]],
     "receiver": 2,                       # 1-based position in "partition"
     "decomposition": [[1, 2, 3, 4], [5]],  # optional, 1-based generator indices
     "inputs": [{"seed": 7}]}             # optional message inputs

Line-oriented text (``#`` starts a comment)::

    d 3
    n 5
    gen X X^2 X Z Z
    part 1 2
    part 3 4 5
    receiver 2
    decomp 1 2 3 4 | 5
    input seed 7

Qudit labels are 1-based.  ``receiver`` defaults to the last part.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Any

import numpy as np

from .errors import ParseError
from .pauli import PauliOperator, format_pauli, parse_pauli, pauli_from_json, pauli_to_json
from .protocol import CorrectionRule, ProtocolSpec

PROTOCOL_FORMAT = "stabtel-protocol/1"
DEMOS = ("example1", "example2", "example3a", "example3b")


@dataclass(frozen=True)
class InputSpec:
    """A message input: either a seed for ``random_density_matrix`` or an explicit matrix."""
    seed: int | None = None
    matrix: tuple[tuple[complex, ...], ...] | None = None

    def density_matrix(self, dim: int) -> np.ndarray:
        from .dense import random_density_matrix

        if self.matrix is not None:
            M = np.array(self.matrix, dtype=complex)
            if M.shape != (dim, dim):
                raise ParseError(f"explicit input has shape {M.shape}, expected {(dim, dim)}", "inputs")
            return M
        return random_density_matrix(dim, self.seed)


@dataclass(frozen=True)
class ProblemSpec:
    d: int
    n: int
    generators: tuple[PauliOperator, ...]
    partition: tuple[tuple[int, ...], ...]
    receiver: int
    decomposition: tuple[tuple[int, ...], ...] | None = None
    inputs: tuple[InputSpec, ...] | None = None


def _int(value, location: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"expected an integer, got {value!r}", location)
    if minimum is not None and value < minimum:
        raise ParseError(f"expected an integer >= {minimum}, got {value}", location)
    return value


def _check_partition(parts, n: int, location: str):
    seen = {}
    for i, part in enumerate(parts, 1):
        if not part:
            raise ParseError(f"part {i} is empty", location)
        for q in part:
            if not 1 <= q <= n:
                raise ParseError(f"qudit {q} in part {i} is outside 1..{n}", location)
            if q in seen:
                raise ParseError(f"qudit {q} appears in parts {seen[q]} and {i} (overlapping parts)", location)
            seen[q] = i
    missing = sorted(set(range(1, n + 1)) - set(seen))
    if missing:
        raise ParseError(f"qudits {missing} are not assigned to any part", location)


def _finish(d, n, gens, parts, receiver, decomp, inputs, loc) -> ProblemSpec:
    if d is None:
        raise ParseError("missing dimension d", loc("d"))
    if n is None:
        raise ParseError("missing qudit count n", loc("n"))
    if parts is None or len(parts) < 2:
        raise ParseError("partition needs at least a sender part and a receiver part", loc("partition"))
    _check_partition(parts, n, loc("partition"))
    if receiver is None:
        receiver = len(parts)
    if not 1 <= receiver <= len(parts):
        raise ParseError(f"receiver {receiver} outside 1..{len(parts)}", loc("receiver"))
    if decomp is not None:
        if len(decomp) != len(parts):
            raise ParseError(f"{len(decomp)} generator groups for {len(parts)} parts", loc("decomposition"))
        flat = sorted(i for g in decomp for i in g)
        if flat != list(range(1, len(gens) + 1)):
            raise ParseError(
                f"groups must use each generator index 1..{len(gens)} exactly once", loc("decomposition")
            )
    return ProblemSpec(
        d,
        n,
        tuple(gens),
        tuple(tuple(p) for p in parts),
        receiver,
        None if decomp is None else tuple(tuple(g) for g in decomp),
        None if inputs is None else tuple(inputs),
    )


def _parse_input_json(obj, loc: str) -> InputSpec:
    if not isinstance(obj, dict):
        raise ParseError("input must be an object with 'seed' or 'matrix'", loc)
    if "seed" in obj:
        return InputSpec(seed=_int(obj["seed"], loc + ".seed", 0))
    if "matrix" in obj:
        m = obj["matrix"]
        try:
            re_, im = np.array(m["real"], dtype=float), np.array(m.get("imag", np.zeros_like(m["real"])), dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad explicit matrix: {exc}", loc + ".matrix") from None
        M = re_ + 1j * im
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ParseError("explicit matrix must be square", loc + ".matrix")
        return InputSpec(matrix=tuple(tuple(complex(v) for v in row) for row in M))
    raise ParseError("input must have 'seed' or 'matrix'", loc)


def parse_problem_json(obj: Any) -> ProblemSpec:
    if not isinstance(obj, dict):
        raise ParseError("top level must be a JSON object")
    unknown = set(obj) - {"d", "n", "generators", "partition", "receiver", "decomposition", "inputs", "name", "comment"}
    if unknown:
        raise ParseError(f"unknown fields {sorted(unknown)}")
    d = _int(obj.get("d"), "d", 2) if "d" in obj else None
    n = _int(obj.get("n"), "n", 1) if "n" in obj else None
    gens = []
    raw = obj.get("generators", [])
    if not isinstance(raw, list):
        raise ParseError("generators must be a list", "generators")
    if d is None:
        raise ParseError("missing dimension d", "d")
    for i, g in enumerate(raw):
        try:
            op = pauli_from_json(g, d, n)
        except ValueError as exc:
            raise ParseError(str(exc), f"generators[{i}]") from None
        gens.append(op)
    parts = obj.get("partition")
    if not isinstance(parts, list) or not all(isinstance(p, list) for p in parts):
        raise ParseError("partition must be a list of lists of qudit indices", "partition")
    parts = [[_int(q, f"partition[{i}]") for q in p] for i, p in enumerate(parts)]
    receiver = _int(obj["receiver"], "receiver") if "receiver" in obj else None
    decomp = obj.get("decomposition")
    if decomp is not None:
        if not isinstance(decomp, list) or not all(isinstance(g, list) for g in decomp):
            raise ParseError("decomposition must be a list of lists of generator indices", "decomposition")
        decomp = [[_int(j, f"decomposition[{i}]") for j in g] for i, g in enumerate(decomp)]
    inputs = obj.get("inputs")
    if inputs is not None:
        if not isinstance(inputs, list):
            raise ParseError("inputs must be a list", "inputs")
        inputs = [_parse_input_json(x, f"inputs[{i}]") for i, x in enumerate(inputs)]
    return _finish(d, n, gens, parts, receiver, decomp, inputs, lambda f: f)


def parse_problem_text(text: str) -> ProblemSpec:
    d = n = receiver = None
    gen_lines: list[tuple[int, str]] = []
    parts: list[list[int]] = []
    decomp = None
    inputs = None
    lines: dict[str, int] = {}

    def ints(tokens, lineno):
        try:
            return [int(t) for t in tokens]
        except ValueError:
            raise ParseError(f"expected integers, got {' '.join(tokens)!r}", f"line {lineno}") from None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        tokens = rest.split()
        lines.setdefault(key, lineno)
        if key in ("d", "n", "receiver"):
            if len(tokens) != 1:
                raise ParseError(f"'{key}' takes exactly one integer", f"line {lineno}")
            (value,) = ints(tokens, lineno)
            if key == "d":
                if value < 2:
                    raise ParseError("d must be >= 2", f"line {lineno}")
                d = value
            elif key == "n":
                if value < 1:
                    raise ParseError("n must be >= 1", f"line {lineno}")
                n = value
            else:
                receiver = value
        elif key == "gen":
            gen_lines.append((lineno, rest))
        elif key == "part":
            parts.append(ints(tokens, lineno))
        elif key == "decomp":
            decomp = [ints(g.split(), lineno) for g in rest.split("|")]
        elif key == "input":
            if inputs is None:
                inputs = []
            if len(tokens) == 2 and tokens[0] == "seed":
                inputs.append(InputSpec(seed=ints(tokens[1:], lineno)[0]))
            else:
                raise ParseError("input lines have the form 'input seed N'", f"line {lineno}")
        else:
            raise ParseError(f"unknown keyword {key!r}", f"line {lineno}")
    if d is None:
        raise ParseError("missing 'd' line")
    gens = []
    for lineno, body in gen_lines:
        try:
            gens.append(parse_pauli(body, d, n))
        except ValueError as exc:
            raise ParseError(str(exc), f"line {lineno}") from None

    def loc(field):
        key = {"partition": "part", "decomposition": "decomp"}.get(field, field)
        return f"line {lines[key]}" if key in lines else field

    return _finish(d, n, gens, parts or None, receiver, decomp, inputs, loc)


def parse_problem(text: str) -> ProblemSpec:
    """Parse either format; JSON is detected by a leading ``{``."""
    if text.lstrip().startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}, column {exc.colno}") from None
        return parse_problem_json(obj)
    return parse_problem_text(text)


def problem_to_json(spec: ProblemSpec) -> dict:
    out: dict[str, Any] = {
        "d": spec.d,
        "n": spec.n,
        "generators": [pauli_to_json(g) for g in spec.generators],
        "partition": [list(p) for p in spec.partition],
        "receiver": spec.receiver,
    }
    if spec.decomposition is not None:
        out["decomposition"] = [list(g) for g in spec.decomposition]
    if spec.inputs is not None:
        out["inputs"] = [_input_to_json(x) for x in spec.inputs]
    return out


def _input_to_json(x: InputSpec) -> dict:
    if x.matrix is not None:
        M = np.array(x.matrix, dtype=complex)
        return {"matrix": {"real": M.real.tolist(), "imag": M.imag.tolist()}}
    return {"seed": x.seed}


def serialize_problem(spec: ProblemSpec) -> str:
    return json.dumps(problem_to_json(spec), indent=2, sort_keys=True) + "\n"


def problem_to_text(spec: ProblemSpec) -> str:
    lines = [f"d {spec.d}", f"n {spec.n}"]
    lines += [f"gen {format_pauli(g)}" for g in spec.generators]
    lines += ["part " + " ".join(map(str, p)) for p in spec.partition]
    lines.append(f"receiver {spec.receiver}")
    if spec.decomposition is not None:
        lines.append("decomp " + " | ".join(" ".join(map(str, g)) for g in spec.decomposition))
    if spec.inputs is not None:
        for x in spec.inputs:
            if x.matrix is not None:
                raise ValueError("explicit input matrices have no text form; use JSON")
            lines.append(f"input seed {x.seed}")
    return "\n".join(lines) + "\n"


def load_demo(name: str) -> ProblemSpec:
    if name not in DEMOS:
        raise ParseError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")
    text = resources.files("stabtel").joinpath("examples", f"{name}.json").read_text(encoding="utf-8")
    return parse_problem(text)


# -- protocol files ---------------------------------------------------------------


def protocol_to_json(spec: ProtocolSpec) -> dict:
    return {
        "format": PROTOCOL_FORMAT,
        "d": spec.d,
        "n": spec.n,
        "generators": [pauli_to_json(g) for g in spec.generators],
        "partition": [list(p) for p in spec.partition],
        "receiver": len(spec.partition),
        "capacities": list(spec.capacities),
        "unitary_order": spec.unitary_order,
        "best_effort": spec.best_effort,
        "receiver_unitary": {
            "sites": list(spec.receiver),
            "real": spec.unitary.real.tolist(),
            "imag": spec.unitary.imag.tolist(),
            "zbar": [format_pauli(z) for z in spec.zbar],
            "xbar": [format_pauli(x) for x in spec.xbar],
        },
        "measurements": [
            {
                "sender": i + 1,
                "sites": list(spec.senders[i]),
                "message_qudits": spec.capacities[i],
                "operators": [format_pauli(h) for h in ops],
            }
            for i, ops in enumerate(spec.measurements)
        ],
        "destinations": [list(T) for T in spec.destinations],
        "corrections": [
            {"site": r.site, "x_from": r.x_from, "x_coeff": r.x_coeff, "z_from": r.z_from, "z_coeff": r.z_coeff}
            for r in spec.corrections
        ],
        "outcomes": spec.outcome_count,
    }


def serialize_protocol(spec: ProtocolSpec) -> str:
    return json.dumps(protocol_to_json(spec), indent=1, sort_keys=True) + "\n"


def parse_protocol_json(obj: Any) -> ProtocolSpec:
    if not isinstance(obj, dict) or obj.get("format") != PROTOCOL_FORMAT:
        raise ParseError(f"not a protocol file (expected format {PROTOCOL_FORMAT!r})", "format")
    try:
        d = _int(obj["d"], "d", 2)
        n = _int(obj["n"], "n", 1)
        gens = tuple(pauli_from_json(g, d, n) for g in obj["generators"])
        partition = tuple(tuple(p) for p in obj["partition"])
        caps = tuple(_int(a, "capacities", 0) for a in obj["capacities"])
        ru = obj["receiver_unitary"]
        U = np.array(ru["real"], dtype=float) + 1j * np.array(ru["imag"], dtype=float)
        q = len(partition[-1])
        zbar = tuple(parse_pauli(s, d, q) for s in ru["zbar"])
        xbar = tuple(parse_pauli(s, d, q) for s in ru["xbar"])
        meas = []
        for i, mobj in enumerate(obj["measurements"]):
            nq = len(partition[i]) + caps[i]
            meas.append(tuple(parse_pauli(s, d, nq) for s in mobj["operators"]))
        rules = tuple(
            CorrectionRule(
                _int(r["site"], "corrections.site"),
                _int(r["x_from"], "corrections.x_from", 1),
                _int(r["x_coeff"], "corrections.x_coeff"),
                _int(r["z_from"], "corrections.z_from", 1),
                _int(r["z_coeff"], "corrections.z_coeff"),
            )
            for r in obj["corrections"]
        )
        order = obj.get("unitary_order", "before")
        if order not in ("before", "after"):
            raise ParseError(f"unitary_order must be 'before' or 'after', got {order!r}", "unitary_order")
        spec = ProtocolSpec(
            d=d,
            n=n,
            generators=gens,
            partition=partition,
            capacities=caps,
            unitary=U,
            zbar=zbar,
            xbar=xbar,
            measurements=tuple(meas),
            destinations=tuple(tuple(T) for T in obj["destinations"]),
            corrections=rules,
            unitary_order=order,
            best_effort=bool(obj.get("best_effort", False)),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ParseError(f"malformed protocol file: missing or invalid {exc}") from None
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed protocol file: {exc}") from None
    if len(spec.measurements) != len(spec.capacities) or len(spec.partition) != len(caps) + 1:
        raise ParseError("capacities, measurements and partition disagree in sender count")
    if U.shape != (d**q, d**q):
        raise ParseError(f"receiver unitary has shape {U.shape}, expected {(d**q, d**q)}", "receiver_unitary")
    bsum = sum(caps)
    for r in rules:
        if not (r.x_from <= 2 * bsum and r.z_from <= 2 * bsum):
            raise ParseError("correction refers to an outcome index beyond 2b", "corrections")
        if not any(r.site in T for T in spec.destinations):
            raise ParseError(f"correction site {r.site} is not a destination", "corrections")
    return spec

"""Command-line front end: ``chronoclock run <mode> [--config FILE] [flags]``.

Scenario files are YAML. Flags override file values, and the merged
scenario is schema-checked before anything runs. Exit status is 0 on
success, 1 on a validation or I/O error and 2 when ``verify`` finds a
failing check.
"""
from __future__ import annotations

import argparse
import ast
import math
import operator
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, Sequence

import jsonschema
import numpy as np
import yaml

from . import __version__
from . import tolerances
from .energy_time import majorization_check, schur_bound_check, spectral_spread, uncertainty_relation, ENTROPIC_FORMS
from .entanglement import entanglement_report, schmidt
from .exceptions import ChronoError, ConfigError, IoError
from .history import UnitarySchedule, build_history, fidelity, simulate_circuit
from .linalg import random_state
from .results import FORMATS, Results, emit, render
from .scenarios import bloch_path, qubit_clock
from .subsystem import concurrence_fidelity_identity, monogamy_check
from .verification import CHECKS, run_check

MODES = ("history", "circuit", "qubit-clock", "bloch-path", "spectrum", "uncertainty", "subsystem", "verify")

# ---------------------------------------------------------------- expressions

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi, "e": math.e, "inf": math.inf, "j": 1j, "i": 1j}
_FUNCS = {"sqrt": np.sqrt, "sin": np.sin, "cos": np.cos, "exp": np.exp}


def evaluate(expr) -> complex | float:
    """Arithmetic on numbers, ``pi``, ``e``, ``inf``, ``j`` and ``sqrt/sin/cos/exp``."""
    if isinstance(expr, bool):
        raise ConfigError(f"expected a number, got {expr!r}")
    if isinstance(expr, (int, float, complex)):
        return expr

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return node.value
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS
                and len(node.args) == 1 and not node.keywords):
            return complex(_FUNCS[node.func.id](ev(node.args[0])))
        raise ConfigError(f"unsupported expression {expr!r}")

    try:
        value = ev(ast.parse(str(expr).strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError, OverflowError) as exc:
        raise ConfigError(f"cannot evaluate {expr!r}: {exc}") from exc
    if isinstance(value, complex) and value.imag == 0:
        value = value.real
    return value


def real(expr) -> float:
    v = evaluate(expr)
    if isinstance(v, complex):
        raise ConfigError(f"expected a real number, got {expr!r}")
    return float(v)


def _items(value) -> list:
    if isinstance(value, str):
        return [x.strip() for x in value.split(",") if x.strip()]
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def parse_grid(value) -> list[float]:
    """Comma-separated points and inclusive ``start:stop:step`` ranges, sorted and deduplicated."""
    points: list[float] = []
    for item in _items(value):
        if isinstance(item, str) and ":" in item:
            parts = item.split(":")
            if len(parts) != 3:
                raise ConfigError(f"range {item!r} must be start:stop:step")
            a, b, step = (real(x) for x in parts)
            if step <= 0 or b < a:
                raise ConfigError(f"range {item!r} needs step > 0 and stop >= start")
            count = int(math.floor((b - a) / step + 1e-9)) + 1
            points.extend(a + k * step for k in range(count))
        else:
            points.append(real(item))
    if not points:
        raise ConfigError("empty grid")
    return sorted(set(points))


def parse_clock_sizes(value, allow_inf: bool) -> list[float]:
    out = []
    for item in _items(value):
        v = real(item)
        if v == math.inf and allow_inf:
            out.append(math.inf)
        elif math.isfinite(v) and v == int(v) and v >= 2:
            out.append(int(v))
        else:
            raise ConfigError(f"clock size must be an integer >= 2{' or inf' if allow_inf else ''}, got {item!r}")
    return sorted(set(out))


def gate(name: str) -> np.ndarray:
    """Named single-qubit gate, or ``rx:theta`` / ``ry:theta`` / ``rz:theta``."""
    fixed = {
        "identity": np.eye(2),
        "x": np.array([[0, 1], [1, 0]]),
        "y": np.array([[0, -1j], [1j, 0]]),
        "z": np.diag([1, -1]),
        "hadamard": np.array([[1, 1], [1, -1]]) / np.sqrt(2),
        "s": np.diag([1, 1j]),
        "t": np.diag([1, np.exp(1j * np.pi / 4)]),
    }
    key = str(name).strip().lower()
    if key in fixed:
        return np.asarray(fixed[key], dtype=complex)
    axis, _, angle = key.partition(":")
    if axis in ("rx", "ry", "rz") and angle:
        th = real(angle)
        c, s = math.cos(th / 2), math.sin(th / 2)
        return {"rx": np.array([[c, -1j * s], [-1j * s, c]]),
                "ry": np.array([[c, -s], [s, c]], dtype=complex),
                "rz": np.diag([np.exp(-0.5j * th), np.exp(0.5j * th)])}[axis]
    raise ConfigError(f"unknown gate {name!r}; use identity, x, y, z, hadamard, s, t or rx/ry/rz:angle")


def parse_state(value, dim: int | None = None) -> np.ndarray:
    """``0``, ``1``, ``+``, ``-`` or a list of amplitudes, normalized to unit length."""
    named = {"0": [1, 0], "1": [0, 1], "+": [1, 1], "-": [1, -1]}
    if isinstance(value, (str, int)) and str(value).strip() in named:
        amps = np.array(named[str(value).strip()], dtype=complex)
        if dim is not None and dim != 2:
            amps = np.zeros(dim, dtype=complex)
            if str(value).strip() not in ("0", "1"):
                raise ConfigError(f"state {value!r} is only defined for a qubit")
            amps[int(value)] = 1
    else:
        amps = np.array([complex(evaluate(x)) for x in _items(value)])
    if dim is not None and amps.size != dim:
        raise ConfigError(f"initial state has {amps.size} amplitudes, system needs {dim}")
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise ConfigError("initial state is the zero vector")
    return amps / norm


def parse_matrix(rows) -> np.ndarray:
    try:
        return np.array([[complex(evaluate(x)) for x in _items(r)] for r in rows])
    except ValueError as exc:
        raise ConfigError(f"matrix rows have unequal lengths: {exc}") from exc


# -------------------------------------------------------------------- schema

_EXPR = {"type": ["number", "string"]}
_EXPR_LIST = {"anyOf": [{"type": "array", "items": _EXPR, "minItems": 1}, {"type": "string"}]}
_STATE = {"anyOf": [{"type": "array", "items": _EXPR, "minItems": 1}, {"type": ["string", "integer"]}]}
_MATRIX = {"type": "array", "items": _EXPR_LIST, "minItems": 1}
_CLOCK = {"type": ["integer", "string"]}
_CLOCK_LIST = {"anyOf": [{"type": "array", "items": _CLOCK, "minItems": 1}, _CLOCK]}
_GATE = {"type": "string"}

PARAMETERS = {
    "history": {"N": _CLOCK, "energies": _EXPR_LIST, "basis": _MATRIX, "U": _GATE,
                "steps": {"anyOf": [{"type": "array", "items": _GATE}, {"type": "string"}]}, "psi0": _STATE},
    "circuit": {"n": {"type": "integer", "minimum": 0, "maximum": 20}, "energies": _EXPR_LIST,
                "basis": _MATRIX, "U": _GATE, "psi0": _STATE},
    "qubit-clock": {"U": _GATE, "psi0": _STATE},
    "bloch-path": {"phi_grid": _EXPR_LIST, "N": _CLOCK_LIST},
    "spectrum": {"energies": _EXPR_LIST, "basis": _MATRIX, "psi0": _STATE, "N": _CLOCK},
    "uncertainty": {"N": _CLOCK_LIST, "trials": {"type": "integer", "minimum": 1}},
    "subsystem": {"p": _EXPR, "U": _GATE, "psi0": _STATE},
    "verify": {"suite": {"anyOf": [{"type": "string"}, {"type": "array", "items": {"type": "string"}}]}},
}
REQUIRED = {"history": ["N"], "circuit": ["n"], "qubit-clock": ["U"], "spectrum": ["energies"],
            "subsystem": ["p", "U"]}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["mode"],
    "properties": {
        "mode": {"enum": list(MODES)},
        "seed": {"type": "integer", "minimum": 0},
        "parameters": {"type": "object"},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"path": {"type": "string"}, "format": {"enum": list(FORMATS)}},
        },
    },
}


def validate(config: dict) -> None:
    """Schema-check a scenario; unknown keys at any level are rejected."""
    prefix = []
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
        prefix = ["parameters"]
        jsonschema.validate(config.get("parameters", {}), {
            "type": "object",
            "additionalProperties": False,
            "properties": PARAMETERS[config["mode"]],
            "required": REQUIRED.get(config["mode"], []),
        })
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in prefix + list(exc.absolute_path)) or "top level"
        raise ConfigError(f"invalid scenario ({where}): {exc.message}") from None


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path} is not valid YAML: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path} must contain a mapping at top level")
    return doc


# ---------------------------------------------------------------- execution

def worker_count() -> int:
    raw = os.environ.get("CHRONO_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"CHRONO_THREADS must be a non-negative integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError(f"CHRONO_THREADS must be a non-negative integer, got {raw!r}")
    return n or (os.cpu_count() or 1)


def parallel_map(fn: Callable, items: Sequence) -> list:
    """``map`` over a thread pool; results come back in input order."""
    workers = min(worker_count(), max(len(items), 1))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _schedule(params: dict, n_clock: int) -> UnitarySchedule:
    chosen = [k for k in ("energies", "U", "steps") if k in params]
    if len(chosen) != 1:
        raise ConfigError("give exactly one of energies, U or steps to define the evolution")
    if "basis" in params and chosen != ["energies"]:
        raise ConfigError("basis is only meaningful together with energies")
    if "energies" in params:
        energies = np.array([real(x) for x in _items(params["energies"])])
        basis = parse_matrix(params["basis"]) if "basis" in params else None
        return UnitarySchedule.hamiltonian(energies, n_clock, basis)
    if "U" in params:
        return UnitarySchedule.constant(gate(params["U"]), n_clock)
    steps = [gate(g) for g in _items(params["steps"])]
    if len(steps) + 1 != n_clock:
        raise ConfigError(f"{len(steps)} steps define a clock of {len(steps) + 1} ticks, not N={n_clock}")
    return UnitarySchedule.explicit(steps)


def _amplitude_rows(amplitudes: np.ndarray) -> list[tuple]:
    m, n = amplitudes.shape
    return [(s, t, float(amplitudes[s, t].real), float(amplitudes[s, t].imag)) for s in range(m) for t in range(n)]


def _report_meta(hs) -> dict:
    rep = entanglement_report(hs)
    return {"E_vn": rep.E_vn, "E2": rep.E2, "tau_min": rep.tau_min, "rank": rep.rank,
            "system_dim": hs.system_dim, "n_clock": hs.n_clock}


def run_history(params: dict, seed: int) -> Results:
    n = int(real(params["N"]))
    if n < 1:
        raise ConfigError("N must be at least 1")
    sched = _schedule(params, n)
    psi0 = parse_state(params.get("psi0", "0"), sched.dim)
    hs = build_history(sched, psi0)
    return Results(("s", "t", "re", "im"), _amplitude_rows(hs.amplitudes), _report_meta(hs))


def run_circuit(params: dict, seed: int) -> Results:
    n = params["n"]
    sched = _schedule(params, 1 << n)
    psi0 = parse_state(params.get("psi0", "0"), sched.dim)
    hs = simulate_circuit(sched, psi0, n)
    meta = _report_meta(hs)
    meta["fidelity_with_dense"] = fidelity(hs, build_history(sched, psi0))
    return Results(("s", "t", "re", "im"), _amplitude_rows(hs.amplitudes), meta)


def run_qubit_clock(params: dict, seed: int) -> Results:
    u = gate(params["U"])
    r = qubit_clock(parse_state(params.get("psi0", "0"), 2), u)
    cols = ("overlap_r", "p_plus", "p_minus", "E_vn", "E2", "gamma_phase")
    return Results(cols, [(r.overlap_r, r.p_plus, r.p_minus, r.E_vn, r.E2, r.gamma_phase)])


def _bloch_row(point) -> tuple:
    phi, n = point
    r = bloch_path(phi, n)
    diff = abs(r.E2_dense - r.E2_N) if n != math.inf else math.nan
    return (phi, n, r.E2_N, r.E2_dense, diff)


def run_bloch_path(params: dict, seed: int) -> Results:
    grid = parse_grid(params.get("phi_grid", "0:3.2:0.05"))
    sizes = parse_clock_sizes(params.get("N", [2, 4, 16, 64, "inf"]), allow_inf=True)
    points = [(phi, n) for phi in grid for n in sizes]
    return Results(("phi", "N", "E2_closed", "E2_dense", "abs_diff"), parallel_map(_bloch_row, points))


def run_spectrum(params: dict, seed: int) -> Results:
    energies = np.array([real(x) for x in _items(params["energies"])])
    basis = parse_matrix(params["basis"]) if "basis" in params else np.eye(energies.size)
    if basis.shape != (energies.size, energies.size):
        raise ConfigError("basis must be square with one column per energy")
    h = (basis * energies) @ basis.conj().T
    psi0 = parse_state(params.get("psi0", [1] * energies.size), energies.size)
    n = int(real(params["N"])) if "N" in params else None
    spread = spectral_spread(h, psi0, n)
    rung = (lambda k: int(spread.ladder_index[k])) if spread.is_cyclic else (lambda k: None)
    rows = [(k, float(spread.energies[k]), float(spread.weights[k]), float(spread.coefficients[k].real),
             float(spread.coefficients[k].imag), rung(k)) for k in range(spread.energies.size)]
    meta: dict[str, Any] = {"spread_entropy": spread.spread_entropy, "cyclic": spread.is_cyclic}
    if n is not None:
        hs = build_history(UnitarySchedule.hamiltonian(energies, n, basis), psi0)
        sd = schmidt(hs)
        meta.update(_report_meta(hs))
        meta["majorized"] = majorization_check(spread, sd).ok
        meta["schur_bounds"] = {name: schur_bound_check(spread, sd, f).ok for name, f in ENTROPIC_FORMS.items()}
        if spread.is_cyclic:
            meta["conjugate_entropy"] = spread.conjugate_entropy
    return Results(("level", "energy", "weight", "c_re", "c_im", "rung"), rows, meta)


def run_uncertainty(params: dict, seed: int) -> Results:
    sizes = parse_clock_sizes(params.get("N", [2, 4, 8, 16]), allow_inf=False)
    trials = params.get("trials", 50)
    jobs = [(n, k) for n in sizes for k in range(trials)]

    def one(job):
        n, k = job
        rng = np.random.default_rng([seed, n, k])
        spread = spectral_spread(np.diag(2 * np.pi * np.arange(n) / n), random_state(n, rng), n)
        rep = uncertainty_relation(spread)
        return (n, k, rep.E, rep.E_tilde, rep.total, rep.bound, rep.support_product, rep.ok)

    cols = ("N", "trial", "E", "E_tilde", "total", "bound", "support_product", "ok")
    return Results(cols, parallel_map(one, jobs))


def run_subsystem(params: dict, seed: int) -> Results:
    p = real(params["p"])
    b0 = parse_state(params.get("psi0", "0"), 2)
    ub = gate(params["U"])
    rep = concurrence_fidelity_identity(p, b0, ub)
    b1 = np.array([-np.conj(b0[1]), np.conj(b0[0])])
    psi0 = np.sqrt(p) * np.kron([1, 0], b0) + np.sqrt(1 - p) * np.kron([0, 1], b1)
    mono = monogamy_check(build_history(UnitarySchedule.constant(np.kron(np.eye(2), ub), 2), psi0))
    cols = ("p", "C", "C_squared", "fidelity_F", "E2_total", "closed_form_overlap", "closed_form_fidelity",
            "monogamy_gap", "analytic_gap", "ok")
    row = (p, rep.C, rep.C_squared, rep.fidelity_F, rep.E2_total, rep.closed_form_overlap,
           rep.closed_form_fidelity, mono.gap, mono.analytic_gap, rep.ok and mono.ok)
    return Results(cols, [row])


RUNNERS = {
    "history": run_history,
    "circuit": run_circuit,
    "qubit-clock": run_qubit_clock,
    "bloch-path": run_bloch_path,
    "spectrum": run_spectrum,
    "uncertainty": run_uncertainty,
    "subsystem": run_subsystem,
}


def _suite(value) -> list[str]:
    names = _items(value)
    if names == ["all"]:
        return list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown or not names:
        raise ConfigError(f"unknown checks {unknown}; available: all, {', '.join(CHECKS)}")
    return names


def run_verify(params: dict, seed: int, out: Callable[[str], None]) -> tuple[Results, str | None]:
    """Run the checks in order, stopping at the first failure. Returns the report and that failure."""
    names = _suite(params.get("suite", "all"))
    rows = []
    failed = None
    workers = min(worker_count(), len(names))
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        futures = [pool.submit(run_check, n, seed) for n in names] if pool else None
        for i, name in enumerate(names):
            res = futures[i].result() if pool else run_check(name, seed)
            rows.append((res.name, res.passed, res.worst, res.tolerance, res.detail))
            tail = f" ({res.detail})" if res.detail else ""
            out(f"{'PASS' if res.passed else 'FAIL'} {res.name}: worst {res.worst:.3e}, "
                f"tolerance {res.tolerance:.0e}{tail}")
            if not res.passed:
                failed = name
                break
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)
    return Results(("check", "passed", "worst", "tolerance", "detail"), rows), failed


# ---------------------------------------------------------------------- argv

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


FLAG_KEYS = ("N", "n", "phi_grid", "psi0", "energies", "U", "steps", "p", "trials", "suite")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chronoclock", description="Discrete-clock history states and their entanglement.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("mode", choices=MODES)
    run.add_argument("--config", help="YAML scenario file")
    run.add_argument("--seed", type=int)
    run.add_argument("--output", help="output path, '-' for stdout")
    run.add_argument("--format", choices=FORMATS)
    run.add_argument("--N", dest="N", help="clock size, or comma list (may include inf)")
    run.add_argument("--n", dest="n", type=int, help="number of time qubits (circuit)")
    run.add_argument("--phi-grid", dest="phi_grid", help="points and start:stop:step ranges, comma separated")
    run.add_argument("--psi0", help="0, 1, +, - or comma-separated amplitudes")
    run.add_argument("--energies", help="comma-separated energy levels")
    run.add_argument("--U", dest="U", help="named gate for the step unitary")
    run.add_argument("--steps", help="comma-separated gates, one per step")
    run.add_argument("--p", dest="p", help="weight of the first purifying branch (subsystem)")
    run.add_argument("--trials", type=int)
    run.add_argument("--suite", help="'all' or comma-separated check names")
    return parser


def scenario_from_args(args: argparse.Namespace) -> dict:
    config = load_config(args.config) if args.config else {}
    if "mode" in config and config["mode"] != args.mode:
        raise ConfigError(f"config file is for mode {config['mode']!r}, not {args.mode!r}")
    config["mode"] = args.mode
    params = dict(config.get("parameters") or {})
    for key in FLAG_KEYS:
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    config["parameters"] = params
    if args.seed is not None:
        config["seed"] = args.seed
    output = dict(config.get("output") or {})
    if args.output is not None:
        output["path"] = args.output
    if args.format is not None:
        output["format"] = args.format
    config["output"] = output
    return config


def _tolerances() -> dict:
    return {k: getattr(tolerances, k) for k in dir(tolerances) if k.isupper()}


def execute(config: dict, stdout=None) -> int:
    """Validate and run a scenario dict, returning the process exit status."""
    stdout = stdout or sys.stdout
    validate(config)
    mode, params = config["mode"], config.get("parameters", {})
    seed = config.get("seed", 0)
    output = config.get("output", {})
    fmt = output.get("format", "csv")
    path = output.get("path")

    failed = None
    if mode == "verify":
        results, failed = run_verify(params, seed, lambda line: print(line, file=stdout, flush=True))
    else:
        results = RUNNERS[mode](params, seed)
    results.meta = {**results.meta, "version": __version__, "mode": mode, "seed": seed, "rng": "PCG64",
                    "parameters": params, "tolerances": _tolerances()}
    if path is not None or mode != "verify":
        if path in (None, "-"):
            stdout.write(render(results, fmt))
        else:
            emit(results, path, fmt)
    if failed is not None:
        print(f"verification failed: check {failed!r}", file=sys.stderr)
        return 2
    return 0


def main(argv: Iterable[str] | None = None) -> int:
    args = build_parser().parse_args(None if argv is None else list(argv))
    try:
        return execute(scenario_from_args(args))
    except ArithmeticError as exc:
        print(f"chronoclock: numerical check failed: {exc}", file=sys.stderr)
        return 2
    except (ChronoError, ValueError) as exc:
        print(f"chronoclock: error: {exc}", file=sys.stderr)
        return 1

"""Single-parameter circuits, their cosine form, and fitting from data.

For a circuit with exactly one gate ``exp(-i theta/2 A)`` where ``A**2 = I``
the expectation value of any observable is ``alpha*cos(theta - beta) +
gamma``. Three samples pin it down, which is the whole point of the demo:
a few examples make an otherwise expensive function cheap to evaluate.

Qubit k is tensor axis k of the statevector, so Pauli string character k
acts on qubit k and qubit 0 is the most significant bit of a basis index.
"""
import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import DegenerateSampleError, IllConditionedError, ParameterRangeError, TooLargeError

MAX_QUBITS = 10
COND_LIMIT = 1e12
NORM_TOL = 1e-12

_SQ2 = 1 / math.sqrt(2)
PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
FIXED_1Q = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.diag([1, 1j]),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
    "X": PAULI["X"],
    "Y": PAULI["Y"],
    "Z": PAULI["Z"],
}
FIXED_2Q = {
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}
ROTATIONS = ("RX", "RY", "RZ")


def rotation(axis, angle):
    """exp(-i angle/2 P) for P in X, Y, Z."""
    return math.cos(angle / 2) * PAULI["I"] - 1j * math.sin(angle / 2) * PAULI[axis]


@dataclass(frozen=True)
class Gate:
    """One gate. ``name`` is a fixed gate, RX/RY/RZ with ``angle``, or FREE.

    FREE carries a full-register Pauli string ``generator`` and is applied
    as exp(-i theta/2 A).
    """

    name: str
    qubits: Tuple[int, ...] = ()
    angle: Optional[float] = None
    generator: Optional[str] = None


FREE = "FREE"


def _pauli_matrix(label):
    out = np.array([[1.0 + 0j]])
    for ch in label:
        out = np.kron(out, PAULI[ch])
    return out


@dataclass(frozen=True)
class CircuitSpec:
    qubits: int
    gates: Tuple[Gate, ...]
    observable: str

    def __post_init__(self):
        n = self.qubits
        if n < 1:
            raise ParameterRangeError("a circuit needs at least one qubit")
        if n > MAX_QUBITS:
            raise TooLargeError(f"{n} qubits exceeds the simulator cap of {MAX_QUBITS}")
        object.__setattr__(self, "gates", tuple(self.gates))
        free = [g for g in self.gates if g.name == FREE]
        if len(free) != 1:
            raise ValueError(f"exactly one free-parameter gate required, found {len(free)}")
        if len(self.observable) != n or set(self.observable) - set(PAULI):
            raise ValueError(f"observable must be a length-{n} Pauli string, got {self.observable!r}")
        for g in self.gates:
            self._check_gate(g)

    def _check_gate(self, g):
        n = self.qubits
        if g.name == FREE:
            A = g.generator or ""
            if len(A) != n or set(A) - set(PAULI):
                raise ValueError(f"free gate generator must be a length-{n} Pauli string, got {A!r}")
            if n <= 6:
                M = _pauli_matrix(A)
                if not np.allclose(M @ M, np.eye(2**n), atol=1e-12, rtol=0):
                    raise ValueError("free gate generator does not square to the identity")
            return
        arity = 2 if g.name in FIXED_2Q else 1
        if g.name not in FIXED_1Q and g.name not in FIXED_2Q and g.name not in ROTATIONS:
            raise ValueError(f"unknown gate {g.name!r}")
        if len(g.qubits) != arity or len(set(g.qubits)) != arity or not all(0 <= q < n for q in g.qubits):
            raise ValueError(f"bad qubits {g.qubits} for {g.name}")
        if g.name in ROTATIONS and (g.angle is None or not math.isfinite(g.angle)):
            raise ValueError(f"{g.name} needs a finite fixed angle")

    @property
    def free_gate(self):
        return next(g for g in self.gates if g.name == FREE)


def _apply_1q(state, U, q):
    state = np.tensordot(U, state, axes=([1], [q]))
    return np.moveaxis(state, 0, q)


def _apply_2q(state, U, q0, q1):
    U = U.reshape(2, 2, 2, 2)
    state = np.tensordot(U, state, axes=([2, 3], [q0, q1]))
    return np.moveaxis(state, (0, 1), (q0, q1))


def _apply_pauli(state, label):
    for q, ch in enumerate(label):
        if ch != "I":
            state = _apply_1q(state, PAULI[ch], q)
    return state


def _check_norm(state):
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > NORM_TOL:
        raise FloatingPointError(f"state norm drifted to {norm!r}")


def final_state(spec, theta):
    n = spec.qubits
    state = np.zeros((2,) * n, dtype=complex)
    state[(0,) * n] = 1.0
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    for g in spec.gates:
        if g.name == FREE:
            state = c * state - 1j * s * _apply_pauli(state, g.generator)
        elif g.name in FIXED_2Q:
            state = _apply_2q(state, FIXED_2Q[g.name], *g.qubits)
        elif g.name in ROTATIONS:
            state = _apply_1q(state, rotation(g.name[1], g.angle), g.qubits[0])
        else:
            state = _apply_1q(state, FIXED_1Q[g.name], g.qubits[0])
        _check_norm(state)
    return state


def simulate_expectation(spec, theta):
    """<0|U(theta)^dag M U(theta)|0> by dense statevector simulation."""
    state = final_state(spec, float(theta))
    value = np.vdot(state, _apply_pauli(state, spec.observable)).real
    return float(value)


def simulate_grid(spec, thetas):
    return np.array([simulate_expectation(spec, t) for t in np.asarray(thetas, dtype=float)])


def random_circuit(rng, qubits, depth=8):
    """Random fixed gates with one free gate at a random position.

    Generator and observable are random Pauli strings of weight 1 or 2.
    Low weight keeps the expectation from averaging out to a constant on
    wider registers.
    """
    if qubits > MAX_QUBITS:
        raise TooLargeError(f"{qubits} qubits exceeds the simulator cap of {MAX_QUBITS}")

    def pauli_string():
        weight = int(rng.integers(1, min(2, qubits) + 1))
        chars = ["I"] * qubits
        for q in rng.choice(qubits, size=weight, replace=False):
            chars[int(q)] = str(rng.choice(list("XYZ")))
        return "".join(chars)

    one_q = sorted(FIXED_1Q) + list(ROTATIONS)
    gates = []
    for _ in range(depth):
        if qubits > 1 and rng.random() < 0.3:
            q0, q1 = rng.choice(qubits, size=2, replace=False)
            gates.append(Gate(str(rng.choice(sorted(FIXED_2Q))), (int(q0), int(q1))))
        else:
            name = str(rng.choice(one_q))
            angle = float(rng.uniform(0, 2 * math.pi)) if name in ROTATIONS else None
            gates.append(Gate(name, (int(rng.integers(qubits)),), angle))
    gates.insert(int(rng.integers(len(gates) + 1)), Gate(FREE, generator=pauli_string()))
    return CircuitSpec(qubits, tuple(gates), pauli_string())


# --------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class CosineModel:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.alpha, self.beta, self.gamma)):
            raise ValueError("cosine model coefficients must be finite")


@dataclass(frozen=True)
class FourierModel:
    K: int
    a0: float
    coefficients: Tuple[Tuple[float, float], ...] = ()
    residual_rms: float = field(default=0.0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(tuple(map(float, c)) for c in self.coefficients))
        if len(self.coefficients) != self.K:
            raise ValueError(f"expected {self.K} coefficient pairs, got {len(self.coefficients)}")


def canonical(alpha, beta, gamma):
    """Representative with alpha >= 0 and beta in [0, 2pi)."""
    if alpha < 0:
        alpha, beta = -alpha, beta + math.pi
    beta = math.fmod(beta, 2 * math.pi)
    if beta < 0:
        beta += 2 * math.pi
    if beta >= 2 * math.pi:
        beta = 0.0
    return CosineModel(float(alpha), float(beta), float(gamma))


def _design(thetas, K):
    thetas = np.asarray(thetas, dtype=float)
    cols = [np.ones_like(thetas)]
    for k in range(1, K + 1):
        cols += [np.cos(k * thetas), np.sin(k * thetas)]
    return np.column_stack(cols)


def fit_cosine(points):
    """Exact cosine model through three (theta, value) points."""
    points = list(points)
    if len(points) != 3:
        raise ValueError(f"fit_cosine takes exactly 3 points, got {len(points)}")
    thetas = np.array([float(t) for t, _ in points])
    values = np.array([float(v) for _, v in points])
    A = np.column_stack([np.cos(thetas), np.sin(thetas), np.ones(3)])
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise DegenerateSampleError(f"theta sample {thetas.tolist()} is degenerate (condition number {cond:.3g})")
    c, s, gamma = np.linalg.solve(A, values)
    alpha = math.hypot(c, s)
    beta = math.atan2(s, c) if alpha > 0 else 0.0
    return canonical(alpha, beta, gamma)


def fit_fourier(points, K):
    """Least-squares truncated Fourier series of order ``K``."""
    if K < 0:
        raise ParameterRangeError("K must be >= 0")
    points = list(points)
    if len(points) < 2 * K + 1:
        raise ParameterRangeError(f"need at least {2 * K + 1} points for K={K}, got {len(points)}")
    thetas = np.array([float(t) for t, _ in points])
    values = np.array([float(v) for _, v in points])
    A = _design(thetas, K)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedError(f"Fourier design matrix condition number {cond:.3g} exceeds {COND_LIMIT:g}")
    coef, *_ = np.linalg.lstsq(A, values, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - values) ** 2)))
    pairs = tuple((float(coef[2 * k - 1]), float(coef[2 * k])) for k in range(1, K + 1))
    return FourierModel(K, float(coef[0]), pairs, rms)


def predict(model, theta):
    """Evaluate a model; scalar in, float out, arrays broadcast."""
    t = np.asarray(theta, dtype=float)
    if isinstance(model, CosineModel):
        out = model.alpha * np.cos(t - model.beta) + model.gamma
    elif isinstance(model, FourierModel):
        out = np.full_like(t, model.a0)
        for k, (a, b) in enumerate(model.coefficients, start=1):
            out = out + a * np.cos(k * t) + b * np.sin(k * t)
    else:
        raise TypeError(f"cannot predict with {type(model).__name__}")
    return float(out) if out.ndim == 0 else out


def sample_fit_thetas(rng, max_cond=1e3):
    # random triples, rejecting near-coincident ones so round-off stays ~1e-13
    while True:
        thetas = rng.uniform(0, 2 * math.pi, size=3)
        A = np.column_stack([np.cos(thetas), np.sin(thetas), np.ones(3)])
        if np.linalg.cond(A) <= max_cond:
            return thetas


CSV_COLUMNS = ("circuit", "theta", "simulated", "predicted", "abs_error")


@dataclass
class DemoResult:
    rows: list
    models: list
    circuits: list

    @property
    def max_abs_error(self):
        return max((r[4] for r in self.rows), default=0.0)

    def to_csv(self, header_lines=()):
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c, t, s, p, e in self.rows:
            w.writerow([c, repr(float(t)), repr(float(s)), repr(float(p)), repr(float(e))])
        return buf.getvalue()


def run_demo(seed=0, circuits=20, qubits=3, depth=None, grid=50, min_alpha=1e-6, max_redraws=200):
    """Fit each random circuit from 3 samples and compare on a theta grid.

    Circuits whose expectation does not depend on theta (fitted alpha below
    ``min_alpha``) are redrawn, since a flat line says nothing about the
    cosine form. Pass ``min_alpha=0`` to keep them.
    """
    rng = np.random.default_rng(seed)
    depth = 4 * qubits if depth is None else depth
    thetas = np.linspace(0, 2 * math.pi, grid, endpoint=False)
    rows, models, specs = [], [], []
    for k in range(circuits):
        for _ in range(max_redraws):
            spec = random_circuit(rng, qubits, depth)
            fit_at = sample_fit_thetas(rng)
            model = fit_cosine([(t, simulate_expectation(spec, t)) for t in fit_at])
            if model.alpha >= min_alpha:
                break
        sim = simulate_grid(spec, thetas)
        pred = predict(model, thetas)
        rows += [(k, t, s, p, abs(s - p)) for t, s, p in zip(thetas, sim, pred)]
        models.append(model)
        specs.append(spec)
    return DemoResult(rows, models, specs)

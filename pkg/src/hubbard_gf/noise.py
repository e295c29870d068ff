"""Stochastic Pauli noise with device-table parameters, plus the four mitigation tools.

Noise channels are depolarizing Pauli errors attached to non-virtual gates, sampled
per trajectory (the simulator stays in the statevector picture).  Z-axis rotations
(RZ, PHASE, Z, GPHASE) are virtual: no error, no duration.  Idle qubits accumulate
a deterministic Z-phase drift at a per-qubit rate, which is what an XX decoupling
sequence refocuses; T1/T2 from the device tables ride along as metadata only.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .statevector import GateOp, gate_matrix, inverse_gate
from .pauli import PauliString
from .statevector import _pauli_action  # shared kernel plumbing

VIRTUAL_KINDS = {"RZ", "PHASE", "Z", "GPHASE", "DELAY"}
SINGLE_PAULIS = ("X", "Y", "Z")


def _is_noisy(g: GateOp) -> bool:
    return g.kind not in VIRTUAL_KINDS


@dataclass(frozen=True)
class NoiseModel:
    """Per-qubit / per-pair depolarizing rates, readout confusion, idle drift."""

    n_qubits: int
    p1: dict = field(default_factory=dict)          # qubit -> probability
    p2: dict = field(default_factory=dict)          # (min, max) pair -> probability
    readout: dict = field(default_factory=dict)     # qubit -> 2x2 row-stochastic matrix
    idle_rate: dict = field(default_factory=dict)   # qubit -> rad/s coherent Z drift
    durations: dict = field(default_factory=dict)   # gate kind -> seconds ("measure" too)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for p in list(self.p1.values()) + list(self.p2.values()):
            if not 0 <= p <= 1:
                raise ValueError(f"probability {p} outside [0, 1]")
        for q, c in self.readout.items():
            c = np.asarray(c, dtype=float)
            if c.shape != (2, 2) or np.any(c < -1e-12) or np.max(np.abs(c.sum(axis=1) - 1)) > 1e-9:
                raise ValueError(f"readout confusion for qubit {q} is not row-stochastic")

    def pair_p(self, a: int, b: int) -> float:
        return self.p2.get((min(a, b), max(a, b)), 0.0)

    def duration(self, g: GateOp) -> float:
        if g.kind == "DELAY":
            return float(g.angle)
        if g.kind in VIRTUAL_KINDS:
            return 0.0
        return float(self.durations.get(g.kind, self.durations.get("default", 0.0)))

    @property
    def has_any_noise(self) -> bool:
        return (
            any(p > 0 for p in self.p1.values())
            or any(p > 0 for p in self.p2.values())
            or any(
                np.max(np.abs(np.asarray(c) - np.eye(2))) > 0 for c in self.readout.values()
            )
        )

    @classmethod
    def zero(cls, n_qubits: int) -> "NoiseModel":
        return cls(n_qubits)

    def to_json(self, path) -> None:
        payload = {
            "n_qubits": self.n_qubits,
            "single_qubit": {str(q): {"error": p} for q, p in self.p1.items()},
            "two_qubit": {f"{a},{b}": {"error": p} for (a, b), p in self.p2.items()},
            "readout": {str(q): np.asarray(c).tolist() for q, c in self.readout.items()},
            "idle_rate": {str(q): r for q, r in self.idle_rate.items()},
            "durations": self.durations,
            "metadata": self.metadata,
        }
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, path) -> "NoiseModel":
        with open(path, encoding="utf-8") as f:
            d = json.load(f)
        return cls(
            n_qubits=int(d["n_qubits"]),
            p1={int(q): float(v["error"]) for q, v in d.get("single_qubit", {}).items()},
            p2={
                tuple(int(x) for x in k.split(",")): float(v["error"])
                for k, v in d.get("two_qubit", {}).items()
            },
            readout={int(q): np.asarray(c, dtype=float) for q, c in d.get("readout", {}).items()},
            idle_rate={int(q): float(r) for q, r in d.get("idle_rate", {}).items()},
            durations={k: float(v) for k, v in d.get("durations", {}).items()},
            metadata=d.get("metadata", {}),
        )


def confusion(p01: float, p10: float) -> np.ndarray:
    """Row-stochastic readout matrix: p01 = P(read 1 | true 0), p10 = P(read 0 | true 1)."""
    return np.array([[1 - p01, p01], [p10, 1 - p10]], dtype=float)


def kolkata_dimer_model(idle_rate: float = 0.0) -> NoiseModel:
    """Five-qubit model parameterized from the device calibration tables."""
    single = [1.98e-4, 4.22e-4, 2.59e-4, 1.73e-4, 1.65e-4]
    meas = [7.4e-3, 6.1e-3, 6.8e-3, 7.9e-3, 5.3e-3]
    cx = {(0, 1): 1.62e-2, (1, 2): 8.77e-3, (2, 3): 5.39e-3, (3, 4): 5.34e-3}
    cx_dur = {(0, 1): 5.05e-7, (1, 2): 4.91e-7, (2, 3): 3.63e-7, (3, 4): 2.84e-7}
    t1 = [10.93e-5, 9.08e-5, 10.13e-5, 8.45e-5, 11.41e-5]
    t2 = [6.99e-5, 3.53e-5, 10.98e-5, 10.78e-5, 2.61e-5]
    freq = [5.09e9, 5.24e9, 5.27e9, 5.14e9, 5.0e9]
    two = {pair: err for pair, err in cx.items()}
    # non-neighbor pairs fall back to the worst listed error
    worst = max(cx.values())
    for a in range(5):
        for b in range(a + 1, 5):
            two.setdefault((a, b), worst)
    return NoiseModel(
        n_qubits=5,
        p1={q: single[q] for q in range(5)},
        p2=two,
        readout={q: confusion(meas[q], meas[q]) for q in range(5)},
        idle_rate={q: idle_rate for q in range(5)},
        durations={
            "H": 3.56e-8,
            "X": 3.56e-8,
            "Y": 3.56e-8,
            "XHALF": 3.56e-8,
            "XHALF_DG": 3.56e-8,
            "U1": 3.56e-8,
            "CNOT": 5.05e-7,
            "CZ": 5.05e-7,
            "CY": 5.05e-7,
            "CPHASE": 5.05e-7,
            "U2": 5.05e-7,
            "measure": 6.76e-7,
            "default": 3.56e-8,
        },
        metadata={
            "pair_durations": {f"{a},{b}": d for (a, b), d in cx_dur.items()},
            "T1": t1,
            "T2": t2,
            "frequency": freq,
        },
    )


# -- scheduling ----------------------------------------------------------------


def schedule_ops(circuit: Circuit, model: NoiseModel):
    """ASAP schedule; yields (gate, idle_gaps) where idle_gaps lists
    (qubit, seconds) of idle time each target accumulated before the gate."""
    ready = [0.0] * circuit.n_qubits
    out = []
    for g in circuit.gates:
        if not g.targets:
            out.append((g, ()))
            continue
        start = max(ready[t] for t in g.targets)
        gaps = tuple((t, start - ready[t]) for t in g.targets if start - ready[t] > 0)
        dur = model.duration(g)
        for t in g.targets:
            ready[t] = start + dur
        out.append((g, gaps))
    end = max(ready) if ready else 0.0
    tail = tuple((q, end - ready[q]) for q in range(circuit.n_qubits) if end - ready[q] > 0)
    return out, tail, end


def idle_windows(circuit: Circuit, model: NoiseModel) -> dict[int, list[tuple[int, float]]]:
    """Per qubit: (gate index before which the window sits, window seconds)."""
    ready = [0.0] * circuit.n_qubits
    used = [False] * circuit.n_qubits
    windows: dict[int, list[tuple[int, float]]] = {q: [] for q in range(circuit.n_qubits)}
    for i, g in enumerate(circuit.gates):
        if not g.targets:
            continue
        start = max(ready[t] for t in g.targets)
        for t in g.targets:
            if used[t] and start - ready[t] > 0:
                windows[t].append((i, start - ready[t]))
            ready[t] = start + model.duration(g)
            used[t] = True
    return windows


# -- trajectory simulation -------------------------------------------------------

# gates compiled to batched column ops: diagonal multiply, signed column
# permutation, or a dense matmul; keyed so repeated Trotter gates hit the cache
_COMPILED_CACHE: dict = {}

_DIAG_KINDS = {"Z", "RZ", "PHASE", "CZ", "CPHASE", "GPHASE"}
_MONOMIAL_KINDS = {"X", "Y", "CNOT", "CY"}


def _compile_gate(g: GateOp, n: int):
    key = (g.kind, g.targets, g.angle, n) if g.matrix is None else None
    if key is not None and key in _COMPILED_CACHE:
        return _COMPILED_CACHE[key]
    dim = 1 << n
    full = np.zeros((dim, dim), dtype=complex)
    m = gate_matrix(g)
    if g.kind == "GPHASE":
        op = ("diag", np.full(dim, m[0, 0]))
    else:
        for b in range(dim):
            sub = 0
            for pos, q in enumerate(g.targets):
                sub |= ((b >> q) & 1) << pos
            base = b
            for q in g.targets:
                base &= ~(1 << q)
            for sub_out in range(m.shape[0]):
                amp = m[sub_out, sub]
                if amp != 0:
                    b_out = base
                    for pos, q in enumerate(g.targets):
                        b_out |= ((sub_out >> pos) & 1) << q
                    full[b_out, b] = amp
        if g.kind in _DIAG_KINDS or g.kind == "DELAY":
            op = ("diag", np.diag(full).astype(np.complex64))
        elif g.kind in _MONOMIAL_KINDS:
            src = np.argmax(np.abs(full), axis=1)
            op = ("perm", src, full[np.arange(dim), src].astype(np.complex64))
        else:
            op = ("dense", full.T.astype(np.complex64))  # arr @ full.T applies the gate
    if key is not None:
        if len(_COMPILED_CACHE) > 4096:
            _COMPILED_CACHE.clear()
        _COMPILED_CACHE[key] = op
    return op


def _apply_compiled(arr: np.ndarray, op) -> np.ndarray:
    if op[0] == "diag":
        arr *= op[1]
        return arr
    if op[0] == "perm":
        return arr[:, op[1]] * op[2]
    return arr @ op[1]


def _compile_run(circuit: Circuit, model: NoiseModel, n: int):
    """Flatten schedule, idle drifts and per-gate noise into a lean op list.

    Consecutive diagonal factors merge into one vector; global phases drop (they
    cannot affect any measurement).  Each entry is (op, noise) with noise either
    None or (probability, targets).
    """
    ops, tail, _ = schedule_ops(circuit, model)
    out = []
    pending_diag = None

    def flush():
        nonlocal pending_diag
        if pending_diag is not None:
            out.append((("diag", pending_diag), None))
            pending_diag = None

    def push(op, noise):
        nonlocal pending_diag
        if op[0] == "diag" and noise is None:
            pending_diag = op[1].copy() if pending_diag is None else pending_diag * op[1]
            return
        flush()
        out.append((op, noise))

    for g, gaps in ops:
        for q, dt in gaps:
            rate = model.idle_rate.get(q, 0.0)
            if rate and dt > 0:
                push(_compile_gate(GateOp("RZ", (q,), 2 * rate * dt), n), None)
        if g.kind == "GPHASE":
            continue
        noise = None
        if _is_noisy(g) and g.kind != "DELAY":
            prob = (
                model.p1.get(g.targets[0], 0.0)
                if len(g.targets) == 1
                else model.pair_p(*g.targets)
            )
            if prob > 0:
                noise = (prob, g.targets)
        if g.kind == "DELAY":
            continue
        op = _compile_gate(g, n)
        if noise is None:
            push(op, None)
        else:
            flush()
            out.append((op, noise))
    for q, dt in tail:
        rate = model.idle_rate.get(q, 0.0)
        if rate and dt > 0:
            push(_compile_gate(GateOp("RZ", (q,), 2 * rate * dt), n), None)
    flush()
    return out


def _apply_pauli_rows(arr: np.ndarray, rows: np.ndarray, p: PauliString) -> None:
    perm, coef = _pauli_action(p)
    arr[np.ix_(rows, perm)] = coef * arr[rows]


def _depolarize(arr, shots, prob, qubits, n, rng):
    if prob <= 0:
        return False
    hits = rng.random(shots) < prob
    rows = np.nonzero(hits)[0]
    if len(rows) == 0:
        return False
    if len(qubits) == 1:
        choices = rng.integers(0, 3, size=len(rows))
        for letter_idx in range(3):
            sel = rows[choices == letter_idx]
            if len(sel):
                p = PauliString.from_letter_map(n, {qubits[0]: SINGLE_PAULIS[letter_idx]})
                _apply_pauli_rows(arr, sel, p)
    else:
        choices = rng.integers(1, 16, size=len(rows))
        for combo in np.unique(choices):
            sel = rows[choices == combo]
            letters = {}
            for pos, q in enumerate(qubits):
                letter = "IXYZ"[(combo >> (2 * pos)) & 3]
                if letter != "I":
                    letters[q] = letter
            p = PauliString.from_letter_map(n, letters)
            _apply_pauli_rows(arr, sel, p)
    return True


def run_noisy(
    circuit: Circuit,
    model: NoiseModel,
    shots: int,
    seed: int,
    measure_qubits: tuple[int, ...] | None = None,
) -> dict[str, int]:
    """Trajectory sampling: each gate is followed by a sampled Pauli error, idle
    windows accumulate coherent Z drift, readout flips follow the confusion rows.

    Seed schedule: final sampling uses the integer derived from SeedSequence
    ([seed, 0]); trajectory errors and readout flips draw from SeedSequence
    ([seed, 1]).  With an all-zero model no trajectory randomness is consumed and
    the final draw is the same multinomial as noiseless sample_counts with the
    derived sampling seed, bit for bit.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if circuit.n_qubits != model.n_qubits:
        raise ValueError(
            f"model covers {model.n_qubits} qubits, circuit has {circuit.n_qubits}"
        )
    if shots * (1 << circuit.n_qubits) > (1 << 26):
        raise ValueError("trajectory ensemble too large; lower shots or width")
    if measure_qubits is None:
        measure_qubits = tuple(range(circuit.n_qubits))
    n = circuit.n_qubits
    sample_seed = int(np.random.SeedSequence([seed, 0]).generate_state(1)[0])
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    from .circuit import simulate as _simulate
    from .statevector import StateVector, sample_counts

    pure = not (
        any(p > 0 for p in model.p1.values())
        or any(p > 0 for p in model.p2.values())
        or any(r != 0 for r in model.idle_rate.values())
    )
    if pure:
        # gate-exact double-precision path; bit-identical to noiseless sampling
        state = _simulate(circuit)
        counts = sample_counts(state, measure_qubits, shots, sample_seed)
        outcomes = _counts_to_rows(counts, measure_qubits, shots)
        outcomes = _apply_readout_flips(outcomes, measure_qubits, model, rng)
        out: dict[str, int] = {}
        for row in outcomes:
            key = "".join(str(int(b)) for b in row)
            out[key] = out.get(key, 0) + 1
        return out

    # single precision for the trajectory ensemble: statistical error dominates
    arr = np.zeros((shots, 1 << n), dtype=np.complex64)
    arr[:, 0] = 1.0
    diverged = False

    for op, noise in _compile_run(circuit, model, n):
        arr = _apply_compiled(arr, op)
        if noise is not None:
            prob, targets = noise
            if _depolarize(arr, shots, prob, targets, n, rng):
                diverged = True

    if not diverged:
        state = StateVector(arr[0].astype(complex), n)
        counts = sample_counts(state, measure_qubits, shots, sample_seed)
        outcomes = _counts_to_rows(counts, measure_qubits, shots)
    else:
        probs = np.abs(arr) ** 2
        probs /= probs.sum(axis=1, keepdims=True)
        cdf = np.cumsum(probs, axis=1)
        u = rng.random(shots)
        idx = (cdf < u[:, None]).sum(axis=1)
        outcomes = np.array(
            [[(b >> q) & 1 for q in measure_qubits] for b in idx], dtype=np.int8
        )
    outcomes = _apply_readout_flips(outcomes, measure_qubits, model, rng)
    out: dict[str, int] = {}
    for row in outcomes:
        key = "".join(str(int(b)) for b in row)
        out[key] = out.get(key, 0) + 1
    return out


def _counts_to_rows(counts: dict[str, int], measure_qubits, shots) -> np.ndarray:
    rows = np.empty((shots, len(measure_qubits)), dtype=np.int8)
    at = 0
    for key, c in counts.items():
        rows[at : at + c] = [int(ch) for ch in key]
        at += c
    return rows


def _idle_drift(arr, q, dt, model, n) -> np.ndarray:
    rate = model.idle_rate.get(q, 0.0)
    if rate and dt > 0:
        arr = _apply_compiled(arr, _compile_gate(GateOp("RZ", (q,), 2 * rate * dt), n))
    return arr


def _apply_readout_flips(outcomes: np.ndarray, measure_qubits, model: NoiseModel, rng):
    for col, q in enumerate(measure_qubits):
        conf = model.readout.get(q)
        if conf is None:
            continue
        conf = np.asarray(conf, dtype=float)
        if np.max(np.abs(conf - np.eye(2))) == 0:
            continue
        bits = outcomes[:, col]
        flip_prob = np.where(bits == 0, conf[0, 1], conf[1, 0])
        flips = rng.random(len(bits)) < flip_prob
        outcomes[:, col] = bits ^ flips
    return outcomes


# -- readout mitigation -----------------------------------------------------------


@dataclass(frozen=True)
class MitigatedDistribution:
    probs: dict
    clipped_mass: float


def mitigate_readout(counts: dict[str, int], confusions: list) -> MitigatedDistribution:
    """Invert the tensor-product confusion; clip negatives and renormalize.

    `confusions[i]` belongs to the qubit behind character i of the bitstring keys.
    """
    k = len(confusions)
    shots = sum(counts.values())
    p_obs = np.zeros(1 << k)
    for key, c in counts.items():
        idx = sum(int(ch) << i for i, ch in enumerate(key))
        p_obs[idx] = c / shots
    invs = []
    for c in confusions:
        c = np.asarray(c, dtype=float)
        if abs(np.linalg.det(c)) < 1e-12:
            raise ValueError("confusion matrix is singular")
        invs.append(np.linalg.inv(c))
    # p_obs = (tensor C)^T p_true, tensor axes follow bit positions
    t = p_obs.reshape((2,) * k)  # axis 0 = bit k-1, ..., axis k-1 = bit 0
    for i, inv in enumerate(invs):
        axis = k - 1 - i  # axis of character/bit i
        t = np.moveaxis(np.tensordot(inv.T, t, axes=([1], [axis])), 0, axis)
    p_true = t.reshape(-1)
    clipped = float(-p_true[p_true < 0].sum())
    p_true = np.clip(p_true, 0.0, None)
    total = p_true.sum()
    if total <= 0:
        raise ValueError("mitigated distribution vanished")
    p_true /= total
    probs = {}
    for idx, p in enumerate(p_true):
        if p > 0:
            key = "".join(str((idx >> i) & 1) for i in range(k))
            probs[key] = float(p)
    return MitigatedDistribution(probs, clipped)


# -- Pauli twirling -----------------------------------------------------------------


_TWIRL_KINDS = ("CNOT", "CZ")


def pauli_twirl(circuit: Circuit, n_variants: int, seed: int) -> list[Circuit]:
    """Sandwich every CX/CZ between random Pauli pairs that leave the gate invariant.

    Each variant's unitary equals the original exactly (a GPHASE absorbs the
    sandwich sign), so the twirled ensemble average is unbiased by construction.
    """
    if n_variants < 1:
        raise ValueError("n_variants must be >= 1")
    from .pauli import CliffordCircuit, clifford_conjugate

    rng = np.random.default_rng(seed)
    variants = []
    for _ in range(n_variants):
        gates: list[GateOp] = []
        for g in circuit.gates:
            if g.kind not in _TWIRL_KINDS:
                gates.append(g)
                continue
            a, b = g.targets
            la, lb = (str(x) for x in rng.choice(("I", "X", "Y", "Z"), size=2))
            pre = PauliString.from_letter_map(2, {0: la, 1: lb})
            post = clifford_conjugate(CliffordCircuit(((g.kind, (0, 1)),)), pre)
            for q, letter in ((a, la), (b, lb)):
                if letter != "I":
                    gates.append(GateOp(letter, (q,)))
            gates.append(g)
            for q, pos in ((a, 0), (b, 1)):
                letter = post.letter_at(pos)
                if letter != "I":
                    gates.append(GateOp(letter, (q,)))
            if post.phase_exp == 2:
                gates.append(GateOp("GPHASE", (), math.pi))
        variants.append(Circuit(circuit.n_qubits, tuple(gates), circuit.barriers))
    return variants


# -- dynamical decoupling --------------------------------------------------------------


def dynamical_decoupling(circuit: Circuit, model: NoiseModel, sequence: str = "XX") -> Circuit:
    """Insert X pairs (split by delays) into idle windows large enough to hold them.

    The pair flips the sign of the coherent idle drift halfway through the window,
    refocusing it; the composed unitary is unchanged.
    """
    if sequence != "XX":
        raise ValueError(f"unsupported sequence {sequence!r}")
    x_dur = model.durations.get("X", model.durations.get("default", 0.0))
    windows = idle_windows(circuit, model)
    insertions: dict[int, list[GateOp]] = {}
    for q, wins in windows.items():
        for gate_idx, width in wins:
            if width < 2 * x_dur or width <= 0:
                continue
            pad = (width - 2 * x_dur) / 2
            seq = []
            if pad > 0:
                seq.append(GateOp("DELAY", (q,), pad))
            seq.append(GateOp("X", (q,)))
            if pad > 0:
                seq.append(GateOp("DELAY", (q,), pad))
            seq.append(GateOp("X", (q,)))
            insertions.setdefault(gate_idx, []).extend(seq)
    if not insertions:
        return circuit
    gates: list[GateOp] = []
    for i, g in enumerate(circuit.gates):
        gates.extend(insertions.get(i, ()))
        gates.append(g)
    return Circuit(circuit.n_qubits, tuple(gates), circuit.barriers)


# -- zero-noise extrapolation -----------------------------------------------------------


def fold_circuit(circuit: Circuit, scale: float) -> tuple[Circuit, float]:
    """Global unitary folding G -> G (G^dag G)^k with a partial suffix fold for
    fractional factors; returns the folded circuit and the realized scale
    (counted over noisy gates only)."""
    if scale < 1:
        raise ValueError("scale must be >= 1")
    noisy_idx = [i for i, g in enumerate(circuit.gates) if _is_noisy(g) and g.kind != "DELAY"]
    n_noisy = len(noisy_idx)
    if n_noisy == 0 or scale == 1:
        return circuit, 1.0
    k_full = int((scale - 1) // 2)
    remainder = (scale - 1) / 2 - k_full
    m = int(round(remainder * n_noisy))
    gates = list(circuit.gates)
    inv_all = [inverse_gate(g) for g in reversed(circuit.gates)]
    for _ in range(k_full):
        gates += inv_all + list(circuit.gates)
    if m > 0:
        suffix_start = noisy_idx[n_noisy - m]
        suffix = list(circuit.gates[suffix_start:])
        gates += [inverse_gate(g) for g in reversed(suffix)] + suffix
    folded = Circuit(circuit.n_qubits, tuple(gates))
    realized = (n_noisy * (1 + 2 * k_full) + 2 * m) / n_noisy
    return folded, realized


@dataclass(frozen=True)
class ZneResult:
    value: float
    residual: float
    scales: tuple[float, ...]
    samples: tuple[float, ...]


def zne(runner, scales, order: int) -> ZneResult:
    """Least-squares polynomial extrapolation of runner(scale) to scale zero.

    The runner may return a float, or (value, realized_scale) when folding
    granularity makes the effective scale differ from the requested one; the
    realized scale is used as the fit abscissa.
    """
    scales = tuple(float(s) for s in scales)
    if sorted(scales) != list(scales) or any(s < 1 for s in scales):
        raise ValueError("scales must be sorted and >= 1")
    if len(scales) <= order:
        raise ValueError("need more scale points than the polynomial order")
    xs, ys = [], []
    for s in scales:
        out = runner(s)
        if isinstance(out, tuple):
            val, realized = out
        else:
            val, realized = out, s
        xs.append(float(realized))
        ys.append(float(val))
    if len(set(xs)) <= order:
        raise ValueError("degenerate fit: too few distinct realized scales")
    coeffs = np.polyfit(xs, ys, deg=order)
    poly = np.poly1d(coeffs)
    residual = float(np.sqrt(np.mean((poly(xs) - np.asarray(ys)) ** 2)))
    return ZneResult(float(poly(0.0)), residual, tuple(xs), tuple(ys))


# -- mitigation harness for the dimer experiment -------------------------------------------


@dataclass(frozen=True)
class MitigationConfig:
    readout: bool = True
    twirl_variants: int = 4
    dd_sequence: str = "none"  # none | XX
    zne_scales: tuple[float, ...] = (1.0, 1.5, 2.0, 2.5, 3.0)
    zne_order: int = 2

    def __post_init__(self):
        if self.zne_scales:
            if list(self.zne_scales) != sorted(self.zne_scales) or self.zne_scales[0] < 1:
                raise ValueError("scale factors must be sorted and >= 1")
            if self.zne_order >= len(self.zne_scales):
                raise ValueError("polynomial order must be below the number of factors")


NO_MITIGATION = MitigationConfig(readout=False, twirl_variants=1, dd_sequence="none", zne_scales=())


def parity_from_distribution(probs: dict[str, float]) -> float:
    return sum(p * (1 - 2 * (key.count("1") % 2)) for key, p in probs.items())


def noisy_parity_estimate(
    circuit: Circuit,
    meas_qubits: tuple[int, ...],
    model: NoiseModel,
    shots: int,
    seed: int,
    config: MitigationConfig,
) -> float:
    """Parity of meas_qubits under the noise model with the configured mitigation."""
    base = circuit
    if config.dd_sequence == "XX":
        base = dynamical_decoupling(base, model)
    variants = (
        pauli_twirl(base, config.twirl_variants, seed)
        if config.twirl_variants > 1
        else [base]
    )
    confusions = [model.readout.get(q, np.eye(2)) for q in meas_qubits]
    scale_list = tuple(config.zne_scales) or (1.0,)
    scale_index = {float(s): i for i, s in enumerate(scale_list)}
    seeds = np.random.SeedSequence(seed).generate_state(len(variants) * len(scale_list))

    def eval_at(scale: float):
        si = scale_index[float(scale)]
        vals, realized = [], []
        for vi, var in enumerate(variants):
            folded, r = fold_circuit(var, scale)
            realized.append(r)  # variants differ in noisy-gate count, so average
            run_seed = int(seeds[vi * len(scale_list) + si])
            counts = run_noisy(folded, model, shots, run_seed, meas_qubits)
            if config.readout:
                dist = mitigate_readout(counts, confusions).probs
            else:
                dist = {k: c / shots for k, c in counts.items()}
            vals.append(parity_from_distribution(dist))
        return float(np.mean(vals)), float(np.mean(realized))

    if config.zne_scales:
        return zne(eval_at, config.zne_scales, config.zne_order).value
    return eval_at(1.0)[0]


def noisy_dimer_series(
    name: str,
    t: float,
    u: float,
    plan,
    phi: float,
    shots: int,
    seed: int,
    model: NoiseModel,
    config: MitigationConfig,
    lam: float = math.pi / 2,
):
    """Anticommutator series <{probe(tau), source}> for one dimer pair under noise.

    Per time point the full gate-level point circuit runs through the configured
    mitigation stack; values carry the 2/sin(phi) estimator scaling.
    """
    from .greens import DIMER_PAIRS, dimer_ground_circuit, direct_point_circuit, time_grid

    source, probe = DIMER_PAIRS[name]
    ground = dimer_ground_circuit(t, u)
    taus = time_grid(plan)
    seeds = np.random.SeedSequence(seed).generate_state(len(taus))
    values = []
    for k, tau in enumerate(taus):
        circuit, meas_qubits, sign = direct_point_circuit(
            source, probe, t, u, plan, k, phi, lam, ground_circuit=ground
        )
        parity = noisy_parity_estimate(
            circuit, meas_qubits, model, shots, int(seeds[k]), config
        )
        values.append(2.0 * sign * parity / math.sin(phi))
    return taus, tuple(values)

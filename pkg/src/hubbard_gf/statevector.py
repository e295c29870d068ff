"""Dense statevector simulation: gate kernels, Pauli rotations, expectations, sampling.

Amplitudes are indexed so that bit q of the basis index is the value of qubit q
(qubit 0 = least significant).  Kernels operate on a trailing axis of length 2^n,
so a leading batch axis broadcasts; the noise module uses that for trajectory
ensembles.  Capacity is dense double precision up to 24 qubits.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliString

MAX_QUBITS = 24


# -- gate matrices (paper-table conventions) ---------------------------------

_SQ2 = 1.0 / np.sqrt(2.0)

_FIXED_1Q = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "XHALF": np.array([[_SQ2, -1j * _SQ2], [-1j * _SQ2, _SQ2]], dtype=complex),
    "XHALF_DG": np.array([[_SQ2, 1j * _SQ2], [1j * _SQ2, _SQ2]], dtype=complex),
}

ONE_QUBIT_KINDS = tuple(_FIXED_1Q) + ("RZ", "PHASE", "U1", "DELAY")
TWO_QUBIT_KINDS = ("CNOT", "CZ", "CY", "CPHASE", "U2")
ZERO_QUBIT_KINDS = ("GPHASE",)  # bookkeeping gate so builders are phase-exact


@dataclass(frozen=True)
class GateOp:
    """One gate application: named kind, target qubits, optional angle or raw matrix."""

    kind: str
    targets: tuple[int, ...]
    angle: float | None = None
    matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind in ONE_QUBIT_KINDS:
            n_targets = 1
        elif self.kind in TWO_QUBIT_KINDS:
            n_targets = 2
        elif self.kind in ZERO_QUBIT_KINDS:
            n_targets = 0
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.targets) != n_targets:
            raise ValueError(f"{self.kind} takes {n_targets} target(s), got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"duplicate targets in {self.kind}{self.targets}")
        if self.kind in ("RZ", "PHASE", "CPHASE", "GPHASE", "DELAY") and self.angle is None:
            raise ValueError(f"{self.kind} needs an angle")
        if self.kind in ("U1", "U2") and self.matrix is None:
            raise ValueError(f"{self.kind} needs a matrix")


def gate_matrix(g: GateOp) -> np.ndarray:
    """Dense matrix of the gate on its own targets (bit 0 of the index = first target)."""
    if g.kind in _FIXED_1Q:
        return _FIXED_1Q[g.kind]
    if g.kind == "GPHASE":
        return np.array([[np.exp(1j * g.angle)]], dtype=complex)
    if g.kind == "DELAY":  # identity placeholder; the angle is a duration in seconds
        return np.eye(2, dtype=complex)
    if g.kind == "RZ":
        return np.diag([np.exp(-1j * g.angle / 2), np.exp(1j * g.angle / 2)]).astype(complex)
    if g.kind == "PHASE":
        return np.diag([1.0, np.exp(1j * g.angle)]).astype(complex)
    if g.kind == "U1":
        return np.asarray(g.matrix, dtype=complex)
    # two-qubit: index bit0 = targets[0] (control where applicable), bit1 = targets[1]
    if g.kind == "CNOT":
        m = np.eye(4, dtype=complex)
        m[[1, 3]] = m[[3, 1]]
        return m
    if g.kind == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if g.kind == "CY":
        m = np.eye(4, dtype=complex)
        m[1, 1] = m[3, 3] = 0
        m[3, 1] = 1j
        m[1, 3] = -1j
        return m
    if g.kind == "CPHASE":
        return np.diag([1, 1, 1, np.exp(1j * g.angle)]).astype(complex)
    return np.asarray(g.matrix, dtype=complex)


def inverse_gate(g: GateOp) -> GateOp:
    """Gate with the inverse unitary (used for circuit folding and uncomputation)."""
    if g.kind in ("H", "X", "Y", "Z", "CNOT", "CZ", "CY", "DELAY"):
        return g
    if g.kind == "XHALF":
        return GateOp("XHALF_DG", g.targets)
    if g.kind == "XHALF_DG":
        return GateOp("XHALF", g.targets)
    if g.kind in ("RZ", "PHASE", "CPHASE", "GPHASE"):
        return GateOp(g.kind, g.targets, -g.angle)
    return GateOp(g.kind, g.targets, matrix=np.asarray(g.matrix).conj().T)


# -- state container ----------------------------------------------------------


@dataclass
class StateVector:
    """Normalized complex amplitudes over 2^n basis states."""

    amps: np.ndarray
    n: int

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        return cls.basis(n, 0)

    @classmethod
    def basis(cls, n: int, index: int) -> "StateVector":
        if n > MAX_QUBITS:
            raise ValueError(f"{n} qubits exceeds dense capacity {MAX_QUBITS}")
        amps = np.zeros(1 << n, dtype=complex)
        amps[index] = 1.0
        return cls(amps, n)

    @classmethod
    def from_amps(cls, amps: np.ndarray) -> "StateVector":
        amps = np.asarray(amps, dtype=complex)
        n = int(np.log2(len(amps)))
        if 1 << n != len(amps):
            raise ValueError("amplitude array length must be a power of two")
        return cls(amps, n)

    def copy(self) -> "StateVector":
        return StateVector(self.amps.copy(), self.n)

    def norm_error(self) -> float:
        return abs(float(np.linalg.norm(self.amps)) - 1.0)

    def fidelity(self, other: "StateVector") -> float:
        return abs(np.vdot(self.amps, other.amps)) ** 2

    def dump_binary(self, path) -> None:
        """Little-endian debug dump: int64 qubit count, then 2^n complex128 amplitudes."""
        with open(path, "wb") as f:
            f.write(struct.pack("<q", self.n))
            f.write(self.amps.astype("<c16").tobytes())

    @classmethod
    def load_binary(cls, path) -> "StateVector":
        with open(path, "rb") as f:
            (n,) = struct.unpack("<q", f.read(8))
            amps = np.frombuffer(f.read(), dtype="<c16").astype(complex)
        if len(amps) != 1 << n:
            raise ValueError("truncated state dump")
        return cls(amps, n)


# -- kernels ------------------------------------------------------------------


def _axis_views(arr: np.ndarray, n: int, qubits: tuple[int, ...]):
    """Reshape so the listed qubits become explicit axes; returns (view, axes)."""
    view = arr.reshape(arr.shape[:-1] + (2,) * n)
    lead = arr.ndim - 1
    axes = tuple(lead + (n - 1 - q) for q in qubits)  # axis of qubit q after reshape
    return view, axes


def _slice(view, axes, values):
    idx = [slice(None)] * view.ndim
    for ax, v in zip(axes, values):
        idx[ax] = slice(v, v + 1)  # keep dims so the result is always a view
    return tuple(idx)


def apply_gate_inplace(arr: np.ndarray, g: GateOp, n: int) -> None:
    """Apply one gate to amplitudes with a trailing 2^n axis, mutating in place."""
    for t in g.targets:
        if not 0 <= t < n:
            raise ValueError(f"target {t} out of range for {n} qubits")
    if g.kind == "GPHASE":
        arr *= np.exp(1j * g.angle)
        return
    if g.kind == "DELAY":
        return
    if g.kind in ("Z", "RZ", "PHASE"):  # diagonal, stride-free
        view, axes = _axis_views(arr, n, g.targets)
        hi = view[_slice(view, axes, (1,))]
        if g.kind == "Z":
            hi *= -1
        elif g.kind == "RZ":
            view[_slice(view, axes, (0,))] *= np.exp(-1j * g.angle / 2)
            hi *= np.exp(1j * g.angle / 2)
        else:
            hi *= np.exp(1j * g.angle)
        return
    if g.kind == "CZ":
        view, axes = _axis_views(arr, n, g.targets)
        view[_slice(view, axes, (1, 1))] *= -1
        return
    if g.kind == "CPHASE":
        view, axes = _axis_views(arr, n, g.targets)
        view[_slice(view, axes, (1, 1))] *= np.exp(1j * g.angle)
        return
    if g.kind == "CNOT":
        view, axes = _axis_views(arr, n, g.targets)
        i10 = _slice(view, axes, (1, 0))
        i11 = _slice(view, axes, (1, 1))
        tmp = view[i10].copy()
        view[i10] = view[i11]
        view[i11] = tmp
        return
    if g.kind == "CY":
        view, axes = _axis_views(arr, n, g.targets)
        i10 = _slice(view, axes, (1, 0))
        i11 = _slice(view, axes, (1, 1))
        tmp = view[i10].copy()
        view[i10] = -1j * view[i11]
        view[i11] = 1j * tmp
        return
    m = gate_matrix(g)
    if len(g.targets) == 1:
        view, axes = _axis_views(arr, n, g.targets)
        a0 = view[_slice(view, axes, (0,))].copy()
        a1 = view[_slice(view, axes, (1,))]
        view[_slice(view, axes, (0,))] = m[0, 0] * a0 + m[0, 1] * a1
        view[_slice(view, axes, (1,))] = m[1, 0] * a0 + m[1, 1] * a1
        return
    view, axes = _axis_views(arr, n, g.targets)
    blocks = [view[_slice(view, axes, ((k >> 0) & 1, (k >> 1) & 1))].copy() for k in range(4)]
    for out_k in range(4):
        acc = m[out_k, 0] * blocks[0]
        for in_k in range(1, 4):
            if m[out_k, in_k] != 0:
                acc = acc + m[out_k, in_k] * blocks[in_k]
        view[_slice(view, axes, ((out_k >> 0) & 1, (out_k >> 1) & 1))] = acc


def apply_gate(s: StateVector, g: GateOp) -> StateVector:
    """Pure gate application; returns a new state."""
    out = s.copy()
    apply_gate_inplace(out.amps, g, s.n)
    return out


# -- Pauli application, rotation, expectation ---------------------------------


def _parity(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> shift
    return v & 1


_PAULI_CACHE: dict[tuple, tuple] = {}


def _pauli_action(p: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """(source index permutation, coefficient array) so that (P s)[perm] = coef * s."""
    key = (p.width, p.xbits, p.zbits, p.phase_exp)
    hit = _PAULI_CACHE.get(key)
    if hit is not None:
        return hit
    dim = 1 << p.width
    idx = np.arange(dim, dtype=np.int64)
    signs = 1.0 - 2.0 * _parity(idx & np.int64(p.zbits))
    canon = (p.phase_exp + (p.xbits & p.zbits).bit_count()) % 4
    coef = (1j ** canon) * signs
    perm = idx ^ np.int64(p.xbits)
    if len(_PAULI_CACHE) > 256:
        _PAULI_CACHE.clear()
    _PAULI_CACHE[key] = (perm, coef)
    return perm, coef


def apply_pauli(s: StateVector, p: PauliString) -> StateVector:
    """Exact application of a Pauli string operator to the state."""
    if p.width != s.n:
        raise ValueError(f"width mismatch: string {p.width}, state {s.n}")
    perm, coef = _pauli_action(p)
    out = np.empty_like(s.amps)
    out[perm] = coef * s.amps
    return StateVector(out, s.n)


def pauli_times_batched(arr: np.ndarray, p: PauliString) -> np.ndarray:
    """(P s) for amplitudes with a trailing 2^n axis."""
    perm, coef = _pauli_action(p)
    out = np.empty_like(arr)
    out[..., perm] = coef * arr
    return out


def apply_pauli_rotation(s: StateVector, p: PauliString, theta: float) -> StateVector:
    """exp(-i theta/2 P) |s> as a fused kernel; P must be Hermitian."""
    if not p.is_hermitian:
        raise ValueError(f"rotation generator must be Hermitian, got {p.label}")
    if p.width != s.n:
        raise ValueError(f"width mismatch: string {p.width}, state {s.n}")
    ps = apply_pauli(s, p)
    amps = np.cos(theta / 2) * s.amps - 1j * np.sin(theta / 2) * ps.amps
    return StateVector(amps, s.n)


def expectation_pauli(s: StateVector, p: PauliString) -> float:
    """<s|P|s> for Hermitian P; the imaginary residue is checked and discarded."""
    if not p.is_hermitian:
        raise ValueError(f"expectation needs a Hermitian string, got {p.label}")
    val = complex(np.vdot(s.amps, apply_pauli(s, p).amps))
    if abs(val.imag) > 1e-10:
        raise ValueError(f"expectation came out complex: {val}")
    return val.real


# -- measurement --------------------------------------------------------------


def marginal_probs(s: StateVector, qubits: tuple[int, ...]) -> np.ndarray:
    """Born probabilities of the listed qubits; bit i of the result index = qubits[i]."""
    if not qubits:
        raise ValueError("need at least one qubit to measure")
    probs = np.abs(s.amps) ** 2
    view = probs.reshape((2,) * s.n)
    keep_axes = [s.n - 1 - q for q in qubits]
    other = tuple(ax for ax in range(s.n) if ax not in keep_axes)
    marg = view.sum(axis=other) if other else view
    # after summing, remaining axes are sorted by original axis id; permute to qubit order
    remaining = sorted(keep_axes)
    order = [remaining.index(ax) for ax in keep_axes]
    marg = np.transpose(marg, order)
    # axis i now corresponds to qubits[i]; flatten so bit i of the index = qubits[i]
    marg = np.transpose(marg, tuple(range(len(qubits) - 1, -1, -1))).reshape(-1)
    return marg


def sample_counts(s: StateVector, qubits: tuple[int, ...], shots: int, seed: int) -> dict[str, int]:
    """Multinomial draw from the marginal Born distribution; deterministic per seed.

    Keys are bitstrings whose i-th character is the outcome of qubits[i].
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = marginal_probs(s, tuple(qubits))
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    k = len(qubits)
    out = {}
    for index, c in enumerate(counts):
        if c:
            key = "".join(str((index >> i) & 1) for i in range(k))
            out[key] = int(c)
    return out


def parity_expectation_from_counts(counts: dict[str, int]) -> tuple[float, float]:
    """Mean and standard error of (-1)^(sum of bits) over a counts histogram."""
    shots = sum(counts.values())
    mean = sum(c * (1 - 2 * (key.count("1") % 2)) for key, c in counts.items()) / shots
    var = max(0.0, 1.0 - mean * mean)
    return mean, np.sqrt(var / shots)

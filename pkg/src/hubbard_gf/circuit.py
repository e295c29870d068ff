"""Circuit container and builders for Hubbard Trotter steps and measurement bases.

Builders are phase-exact: every composed unitary equals the matrix exponential of
its generator (a GPHASE bookkeeping gate absorbs what would otherwise be a global
phase), which keeps the dense oracles in the tests strict.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import FermionHamiltonian
from .pauli import PauliString, jw_string_remover
from .statevector import GateOp, StateVector, apply_gate_inplace

__all__ = [
    "Circuit",
    "TrotterPlan",
    "simulate",
    "circuit_unitary",
    "hopping_pair_block",
    "hopping_step",
    "repulsion_step",
    "dimer_interaction_step",
    "dimer_trotter_step",
    "trotter_evolution",
    "measurement_basis_circuit",
    "horizontal_hop_value",
    "pauli_rotation_gates",
    "controlled_pauli_gates",
]


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list with optional named stage barriers (position, label)."""

    n_qubits: int
    gates: tuple[GateOp, ...] = ()
    barriers: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        for g in self.gates:
            for t in g.targets:
                if not 0 <= t < self.n_qubits:
                    raise ValueError(f"gate {g.kind}{g.targets} exceeds {self.n_qubits} qubits")

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot concatenate circuits of different widths")
        shifted = tuple((pos + len(self.gates), label) for pos, label in other.barriers)
        return Circuit(self.n_qubits, self.gates + other.gates, self.barriers + shifted)

    def __len__(self) -> int:
        return len(self.gates)

    def with_barrier(self, label: str) -> "Circuit":
        return Circuit(self.n_qubits, self.gates, self.barriers + ((len(self.gates), label),))

    def widened(self, n_qubits: int) -> "Circuit":
        """Same gates on a wider register."""
        if n_qubits < self.n_qubits:
            raise ValueError("cannot shrink a circuit")
        return Circuit(n_qubits, self.gates, self.barriers)

    @property
    def two_qubit_count(self) -> int:
        return sum(1 for g in self.gates if len(g.targets) == 2)

    def text_dump(self) -> str:
        """One gate per line: NAME[(angle)] targets; barriers as 'barrier <label>' lines."""
        marks: dict[int, list[str]] = {}
        for pos, label in self.barriers:
            marks.setdefault(pos, []).append(label)
        lines = []
        for i, g in enumerate(self.gates):
            for label in marks.get(i, ()):
                lines.append(f"barrier {label}")
            ang = f"({g.angle:.12g})" if g.angle is not None else ""
            tgt = (" " + " ".join(str(t) for t in g.targets)) if g.targets else ""
            lines.append(f"{g.kind}{ang}{tgt}")
        for label in marks.get(len(self.gates), ()):
            lines.append(f"barrier {label}")
        return "\n".join(lines) + "\n"


def simulate(circuit: Circuit, initial: StateVector | None = None) -> StateVector:
    """Run the circuit on |0...0> or on a copy of the given initial state."""
    state = StateVector.zero(circuit.n_qubits) if initial is None else initial.copy()
    if state.n != circuit.n_qubits:
        raise ValueError("initial state width does not match circuit")
    for g in circuit.gates:
        apply_gate_inplace(state.amps, g, state.n)
    return state


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of the whole circuit (oracle use; <= 10 qubits)."""
    if circuit.n_qubits > 10:
        raise ValueError("circuit_unitary limited to 10 qubits")
    dim = 1 << circuit.n_qubits
    cols = np.eye(dim, dtype=complex)
    for g in circuit.gates:
        apply_gate_inplace(cols.T, g, circuit.n_qubits)  # trailing axis = state index
    return cols


@dataclass(frozen=True)
class TrotterPlan:
    """First-order splitting: `steps` slices of duration dtau, interaction before hopping."""

    dtau: float
    steps: int
    term_order: str = "interaction-then-hopping"

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not self.dtau > 0:
            raise ValueError("dtau must be positive")

    @property
    def total_time(self) -> float:
        return self.dtau * self.steps


# -- elementary blocks ---------------------------------------------------------


def _zz_rotation(m: int, n: int, theta: float) -> list[GateOp]:
    # exp(-i theta/2 Z_m Z_n), exactly
    return [GateOp("CNOT", (m, n)), GateOp("RZ", (n,), theta), GateOp("CNOT", (m, n))]


def hopping_pair_block(m: int, n: int, theta: float, n_qubits: int) -> Circuit:
    """exp(-i theta (X_m X_n + Y_m Y_n)/2) for string-free qubit pairs."""
    gates = [GateOp("H", (m,)), GateOp("H", (n,))]
    gates += _zz_rotation(m, n, theta)
    gates += [GateOp("H", (m,)), GateOp("H", (n,))]
    gates += [GateOp("XHALF", (m,)), GateOp("XHALF", (n,))]
    gates += _zz_rotation(m, n, theta)
    gates += [GateOp("XHALF_DG", (m,)), GateOp("XHALF_DG", (n,))]
    return Circuit(n_qubits, tuple(gates))


def _string_remover_gates(m: int, n: int) -> list[GateOp]:
    return [GateOp(name, targets) for name, targets in jw_string_remover(m, n).gates]


def hopping_step(i: int, j: int, sigma: str, theta: float, n_sites: int) -> Circuit:
    """One Trotter slice exp(-i theta h) of the hopping term h = c^dag_i c_j + h.c.

    Site-major Jordan-Wigner ordering (1-based sites); the Z string between the
    two mode qubits is removed by the CZ-fan similarity transform, then the XX
    and YY halves run as basis-changed ZZ rotations with the full angle theta.
    """
    if i == j:
        raise ValueError("hopping needs two distinct sites")
    for s in (i, j):
        if not 1 <= s <= n_sites:
            raise ValueError(f"site {s} out of range for {n_sites} sites")
    off = 0 if sigma == "up" else 1
    m, n = sorted((2 * (i - 1) + off, 2 * (j - 1) + off))
    n_qubits = 2 * n_sites
    remover = _string_remover_gates(m, n)
    inner = hopping_pair_block(m, n, theta, n_qubits)
    return Circuit(n_qubits, tuple(remover) + inner.gates + tuple(remover))


def repulsion_step(i: int, theta: float, n_sites: int) -> Circuit:
    """exp(-i theta n_up n_dn) on site i (1-based), site-major ordering."""
    if not 1 <= i <= n_sites:
        raise ValueError(f"site {i} out of range for {n_sites} sites")
    a, b = 2 * (i - 1), 2 * i - 1
    gates = [
        GateOp("GPHASE", (), -theta / 4),
        GateOp("RZ", (a,), -theta / 2),
        GateOp("RZ", (b,), -theta / 2),
        *_zz_rotation(a, b, theta / 2),
    ]
    return Circuit(2 * n_sites, tuple(gates))


def repulsion_pair_gates(a: int, b: int, theta: float) -> list[GateOp]:
    """exp(-i theta n_a n_b) for an explicit qubit pair."""
    return [
        GateOp("GPHASE", (), -theta / 4),
        GateOp("RZ", (a,), -theta / 2),
        GateOp("RZ", (b,), -theta / 2),
        *_zz_rotation(a, b, theta / 2),
    ]


DIMER_QUBITS = {"c_up": 0, "b_up": 1, "c_dn": 2, "b_dn": 3}


def dimer_interaction_step(theta: float, form: str = "cnot") -> Circuit:
    """exp(-i theta/4 (Z_0 Z_2 - 1)): the (U/2)(n_c^2 - 2 n_c) slice with theta = U dtau.

    Both printed forms are available: the CNOT-conjugated Z rotation and the
    controlled-phase variant; their unitaries are identical.
    """
    a, b = DIMER_QUBITS["c_up"], DIMER_QUBITS["c_dn"]
    if form == "cnot":
        gates = [GateOp("GPHASE", (), theta / 4), *_zz_rotation(a, b, theta / 2)]
    elif form == "cphase":
        gates = [
            GateOp("GPHASE", (), theta / 2),
            GateOp("RZ", (a,), theta / 2),
            GateOp("RZ", (b,), theta / 2),
            GateOp("CPHASE", (a, b), -theta),
        ]
    else:
        raise ValueError(f"unknown form {form!r}")
    return Circuit(4, tuple(gates))


def dimer_trotter_step(t: float, u: float, dtau: float, form: str = "cnot") -> Circuit:
    """One dimer Trotter slice: interaction with angle U*dtau, then both hopping
    pairs with angle -t*dtau (the variational layer reused as an evolution step)."""
    step = dimer_interaction_step(u * dtau, form=form)
    beta = -t * dtau
    step = step + hopping_pair_block(0, 1, beta, 4)
    step = step + hopping_pair_block(2, 3, beta, 4)
    return step


def trotter_evolution(h: FermionHamiltonian, plan: TrotterPlan) -> Circuit:
    """First-order product formula for exp(-i H tau), tau = steps * dtau.

    Within a slice the diagonal terms (repulsions, shifts) run first, then the
    hopping terms sorted by (spin, bond); same layer structure as the dimer's
    variational circuit.
    """
    n_qubits = h.n_modes
    out = Circuit(n_qubits)
    one = Circuit(n_qubits)
    for rep in sorted(h.repulsions, key=lambda r: r.site):
        a, b = h.mode_of(rep.site, "up"), h.mode_of(rep.site, "down")
        one = one + Circuit(n_qubits, tuple(repulsion_pair_gates(a, b, rep.strength * plan.dtau)))
    for sh in sorted(h.shifts, key=lambda s: s.site):
        # exp(-i dtau v n) = GPHASE-free diagonal: PHASE(-v dtau) on each mode qubit
        for spin in ("up", "down"):
            q = h.mode_of(sh.site, spin)
            one = one + Circuit(n_qubits, (GateOp("PHASE", (q,), -sh.value * plan.dtau),))
    for spin in ("up", "down"):
        for hop in sorted(h.hoppings, key=lambda b: (min(b.i, b.j), max(b.i, b.j))):
            m, n = sorted((h.mode_of(hop.i, spin), h.mode_of(hop.j, spin)))
            theta = hop.amplitude * plan.dtau
            remover = _string_remover_gates(m, n)
            inner = hopping_pair_block(m, n, theta, n_qubits)
            one = one + Circuit(n_qubits, tuple(remover) + inner.gates + tuple(remover))
    for _ in range(plan.steps):
        out = out + one
    return out


# -- measurement bases ----------------------------------------------------------


def measurement_basis_circuit(kind: str, m: int, n: int, n_qubits: int | None = None) -> Circuit:
    """Pre-measurement unitary B so a computational readout of (m, n) gives the target.

    yx_pair:  B^dag (Z_m Z_n) B = i y_m x_n   (string remover + Hadamards)
    xy_pair:  B^dag (Z_m Z_n) B = -i x_m y_n  (Hadamards replaced by X half-turns)
    horizontal_hop: diagonalizes (X_m X_n + Y_m Y_n)/2 into the difference of the
    |m=1,n=0> and |m=0,n=1> populations; see horizontal_hop_value.
    """
    if m >= n:
        raise ValueError(f"need m < n, got ({m}, {n})")
    width = n_qubits if n_qubits is not None else n + 1
    if kind == "yx_pair":
        gates = _string_remover_gates(m, n) + [GateOp("H", (m,)), GateOp("H", (n,))]
    elif kind == "xy_pair":
        gates = _string_remover_gates(m, n) + [GateOp("XHALF", (m,)), GateOp("XHALF", (n,))]
    elif kind == "horizontal_hop":
        gates = [GateOp("CNOT", (n, m)), GateOp("H", (n,)), GateOp("CNOT", (n, m))]
    else:
        raise ValueError(f"unknown measurement basis kind {kind!r}")
    return Circuit(width, tuple(gates))


def horizontal_hop_value(counts: dict[str, int]) -> tuple[float, float]:
    """Estimate of (X_m X_n + Y_m Y_n)/2 from counts sampled over qubits (m, n).

    Keys follow sample_counts order: character 0 is qubit m, character 1 is n.
    Value is P(10) - P(01); the 00 and 11 outcomes carry weight zero.
    """
    shots = sum(counts.values())
    p_plus = counts.get("10", 0) / shots
    p_minus = counts.get("01", 0) / shots
    mean = p_plus - p_minus
    var = max(0.0, p_plus + p_minus - mean * mean)
    return mean, float(np.sqrt(var / shots))


# -- Pauli-string gadgets --------------------------------------------------------


def _letter_basis_gates(p: PauliString) -> tuple[list[GateOp], list[GateOp]]:
    pre, post = [], []
    for q in p.support:
        letter = p.letter_at(q)
        if letter == "X":
            pre.append(GateOp("H", (q,)))
            post.append(GateOp("H", (q,)))
        elif letter == "Y":
            pre.append(GateOp("XHALF", (q,)))
            post.append(GateOp("XHALF_DG", (q,)))
    return pre, post


def pauli_rotation_gates(p: PauliString, theta: float) -> list[GateOp]:
    """Gate-level exp(-i theta/2 P): basis changes, CNOT chain, one Z rotation.

    Matches the fused statevector kernel exactly; the string's +-1 phase is folded
    into the rotation angle (imaginary phases are not rotations and are rejected).
    """
    if not p.is_hermitian:
        raise ValueError(f"rotation generator must be Hermitian, got {p.label}")
    support = p.support
    if not support:
        return [GateOp("GPHASE", (), -theta / 2 * (1 if p.phase_exp == 0 else -1))]
    angle = theta if p.phase_exp == 0 else -theta
    pre, post = _letter_basis_gates(p)
    chain = [GateOp("CNOT", (a, b)) for a, b in zip(support, support[1:])]
    return pre + chain + [GateOp("RZ", (support[-1],), angle)] + chain[::-1] + post


def controlled_pauli_gates(p: PauliString, control: int) -> list[GateOp]:
    """Controlled application of a Pauli string: one controlled gate per letter,
    plus an ancilla phase gate realizing the string's i^k prefactor."""
    gates = []
    for q in p.support:
        letter = p.letter_at(q)
        kind = {"X": "CNOT", "Y": "CY", "Z": "CZ"}[letter]
        gates.append(GateOp(kind, (control, q)))
    if p.phase_exp:
        gates.append(GateOp("PHASE", (control,), p.phase_exp * np.pi / 2))
    return gates

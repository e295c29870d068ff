"""Green's-function measurement protocols: Hadamard tests and the direct (response) scheme.

Sites here are 0-based and resolve to qubits through the Hamiltonian's mode order
(the dimer: c_up, b_up, c_dn, b_dn on qubits 0-3, ancilla d-mode on qubit 4).

The direct protocol prepares the ancilla occupied, kicks the system with
exp(Phi/2 * sigma_src x_d), evolves system and ancilla (the ancilla picks up the
phase lambda = eps_d * tau as one Z^dag rotation), measures the two-qubit-reduced
bilinear i sigma_probe x_d and divides by sin Phi.  lambda = pi/2 selects the
retarded (anticommutator) combination, lambda = 0 the Keldysh (commutator) one,
exactly at any Phi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    Circuit,
    TrotterPlan,
    dimer_trotter_step,
    pauli_rotation_gates,
    simulate,
)
from .model import FermionHamiltonian
from .oracle import build_matrix, diagonalize
from .pauli import MajoranaIndex, PauliString, jw_mode
from .statevector import (
    GateOp,
    StateVector,
    apply_gate,
    apply_pauli,
    expectation_pauli,
    sample_counts,
)

LAMBDA_BY_KIND = {"retarded": math.pi / 2, "keldysh": 0.0}


@dataclass(frozen=True)
class CorrelatorSpec:
    """Which two Majoranas to correlate, on which time grid, with which protocol."""

    source: MajoranaIndex  # acts at time 0 (the perturbation side)
    probe: MajoranaIndex   # measured at time tau
    taus: tuple[float, ...]
    kind: str = "retarded"
    protocol: str = "direct"
    mapping: str = "jw"

    def __post_init__(self):
        if self.kind not in LAMBDA_BY_KIND:
            raise ValueError(f"kind must be retarded or keldysh, got {self.kind!r}")
        if self.protocol not in ("hadamard", "advanced_hadamard", "direct"):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if len(self.taus) == 0 or self.taus[0] != 0.0:
            raise ValueError("time grid must start at 0")
        if any(b <= a for a, b in zip(self.taus, self.taus[1:])):
            raise ValueError("time grid must be strictly increasing")

    @property
    def lam(self) -> float:
        return LAMBDA_BY_KIND[self.kind]


@dataclass(frozen=True)
class MeasurementRecord:
    """Per-time-point estimates with shot statistics and full provenance."""

    taus: tuple[float, ...]
    estimates: tuple[float, ...]
    stderrs: tuple[float, ...]
    shots: int
    seed: int
    protocol: str
    phi: float
    lam: float
    histograms: tuple[dict, ...] = field(default=(), repr=False)

    def __post_init__(self):
        for v in self.estimates:
            if abs(v) > 2 + 1e-9:
                raise ValueError(f"estimate {v} violates the Majorana norm bound")
        for s in self.stderrs:
            if s < 0:
                raise ValueError("stderr must be nonnegative")


def time_grid(plan: TrotterPlan) -> tuple[float, ...]:
    return tuple(k * plan.dtau for k in range(plan.steps + 1))


def dimer_majorana(site: int, spin: str, flavor: str) -> MajoranaIndex:
    return MajoranaIndex(site, spin, flavor)


def _mode_pauli(m: MajoranaIndex, h: FermionHamiltonian, width: int) -> PauliString:
    return jw_mode(h.mode_of(m.site, m.spin), width, m.flavor)


def _steps_for(tau: float, plan: TrotterPlan) -> int:
    j = int(round(tau / plan.dtau))
    if abs(j * plan.dtau - tau) > 1e-9:
        raise ValueError(f"tau {tau} is not a multiple of dtau {plan.dtau}")
    return j


def _binomial_pm(p_plus: float, shots: int) -> float:
    mean = 2 * p_plus - 1
    return math.sqrt(max(0.0, 1 - mean * mean) / shots)


# -- Hadamard-test family ------------------------------------------------------------


def _hadamard_family(
    spec: CorrelatorSpec,
    ground_circuit: Circuit,
    plan: TrotterPlan,
    shots: int,
    seed: int,
    t: float,
    u: float,
    controlled_evolution: bool,
    advanced: bool,
) -> MeasurementRecord:
    h = FermionHamiltonian.dimer(t, u)
    width = h.n_modes
    src = _mode_pauli(spec.source, h, width)
    prb = _mode_pauli(spec.probe, h, width)
    psi = simulate(ground_circuit)
    step = dimer_trotter_step(t, u, plan.dtau)
    imag_part = spec.kind == "keldysh"
    seeds = np.random.SeedSequence(seed).generate_state(len(spec.taus))

    estimates, stderrs, hists = [], [], []
    for k, tau in enumerate(spec.taus):
        j = _steps_for(tau, plan)
        s1 = apply_pauli(psi, src)
        s0 = psi.copy()
        for _ in range(j):
            s1 = simulate(step, s1)
            if advanced or not controlled_evolution:
                s0 = simulate(step, s0)
        s1 = apply_pauli(s1, prb)
        if not advanced:
            # undo the evolution (controlled U^dag block, or plain U^dag on both)
            for _ in range(j):
                s1 = _unsimulate(step, s1)
                if not controlled_evolution:
                    s0 = _unsimulate(step, s0)
        overlap = complex(np.vdot(s0.amps, s1.amps))
        value = overlap.imag if imag_part else overlap.real
        if shots == 0:
            estimates.append(float(value))
            stderrs.append(0.0)
            hists.append({})
        else:
            p0 = min(1.0, max(0.0, (1 + value) / 2))
            rng = np.random.default_rng(int(seeds[k]))
            ones = int(rng.binomial(shots, 1 - p0))
            est = (shots - 2 * ones) / shots
            estimates.append(est)
            stderrs.append(_binomial_pm((shots - ones) / shots, shots))
            hists.append({"0": shots - ones, "1": ones})
    return MeasurementRecord(
        tuple(spec.taus),
        tuple(estimates),
        tuple(stderrs),
        shots,
        seed,
        "advanced_hadamard" if advanced else "hadamard",
        0.0,
        spec.lam,
        tuple(hists),
    )


def _unsimulate(step: Circuit, s: StateVector) -> StateVector:
    from .statevector import apply_gate_inplace, inverse_gate

    out = s.copy()
    for g in reversed(step.gates):
        apply_gate_inplace(out.amps, inverse_gate(g), out.n)
    return out


def hadamard_test(
    spec: CorrelatorSpec,
    ground_circuit: Circuit,
    plan: TrotterPlan,
    shots: int,
    seed: int,
    t: float = 1.0,
    u: float = 4.0,
    controlled_evolution: bool = True,
) -> MeasurementRecord:
    """Ancilla-interferometric estimate of Re <probe(tau) source> per time point.

    The printed form applies controlled forward and backward evolution blocks;
    controlled_evolution=False leaves both evolutions uncontrolled (identical
    statistics on a noiseless simulator).  Controlled Pauli strings act letter by
    letter with the ancilla as control; ancilla statistics are simulated on the
    two interferometer branches.
    """
    if spec.protocol != "hadamard":
        raise ValueError(f"spec requests protocol {spec.protocol!r}")
    return _hadamard_family(
        spec, ground_circuit, plan, shots, seed, t, u, controlled_evolution, advanced=False
    )


def advanced_hadamard_test(
    spec: CorrelatorSpec,
    ground_circuit: Circuit,
    plan: TrotterPlan,
    shots: int,
    seed: int,
    t: float = 1.0,
    u: float = 4.0,
) -> MeasurementRecord:
    """Same estimand with a single uncontrolled forward evolution.

    Requires controlled single-Majorana insertions, which only the plain JW
    mapping provides; local encodings expose even products only.
    """
    if spec.protocol != "advanced_hadamard":
        raise ValueError(f"spec requests protocol {spec.protocol!r}")
    if spec.mapping != "jw":
        raise ValueError(
            "advanced Hadamard test needs controlled single-fermion operators, "
            "which a locality-preserving mapping does not provide"
        )
    return _hadamard_family(spec, ground_circuit, plan, shots, seed, t, u, True, advanced=True)


# -- direct (linear-response) measurement ----------------------------------------------


def direct_measurement(
    spec: CorrelatorSpec,
    phi: float,
    ground_circuit: Circuit,
    plan: TrotterPlan,
    shots: int,
    seed: int,
    t: float = 1.0,
    u: float = 4.0,
    lam: float | None = None,
    evolution: str = "trotter",
) -> MeasurementRecord:
    """Kubo-style estimate of the probe-source correlator, exact at any Phi.

    Per time point: occupy the ancilla, rotate by exp(Phi/2 sigma_src x_d), evolve
    (Trotterized or dense-exact), apply the ancilla Z^dag phase lambda, reduce
    i sigma_probe x_d to a two-qubit parity, estimate and divide by sin Phi.
    """
    if spec.protocol != "direct":
        raise ValueError(f"spec requests protocol {spec.protocol!r}")
    if abs(math.sin(phi)) < 1e-12:
        raise ValueError("Phi must not be a multiple of pi (zero response)")
    if evolution not in ("trotter", "exact"):
        raise ValueError(f"unknown evolution mode {evolution!r}")
    lam = spec.lam if lam is None else lam
    h = FermionHamiltonian.dimer(t, u)
    n_sys = h.n_modes
    width = n_sys + 1
    anc = n_sys

    src5 = jw_mode(h.mode_of(spec.source.site, spec.source.spin), width, spec.source.flavor)
    prb5 = jw_mode(h.mode_of(spec.probe.site, spec.probe.spin), width, spec.probe.flavor)
    xd = jw_mode(anc, width, "x")
    pert_gen = (src5 * xd).times_i()
    observable = (prb5 * xd).times_i()
    if not (pert_gen.is_hermitian and observable.is_hermitian):
        raise AssertionError("bilinears must be Hermitian")

    psi_sys = simulate(ground_circuit)
    base = np.zeros(1 << width, dtype=complex)
    base[1 << anc :] = psi_sys.amps  # ancilla occupied
    base_state = StateVector(base, width)

    step = dimer_trotter_step(t, u, plan.dtau).widened(width)
    if evolution == "exact":
        spect = diagonalize(build_matrix(h))
        v = spect.eigenvectors

    rotation = Circuit(width, tuple(pauli_rotation_gates(pert_gen, phi)))
    basis = _parity_basis_circuit(observable, width)
    sign = 1.0 if observable.phase_exp == 0 else -1.0
    meas_qubits = (observable.support[0], observable.support[-1])
    seeds = np.random.SeedSequence(seed).generate_state(len(spec.taus))

    estimates, stderrs, hists = [], [], []
    for k, tau in enumerate(spec.taus):
        state = simulate(rotation, base_state)
        if evolution == "trotter":
            for _ in range(_steps_for(tau, plan)):
                state = simulate(step, state)
        else:
            state = _exact_evolve(state, v, spect.eigenvalues, tau, n_sys)
        state = apply_gate(state, GateOp("RZ", (anc,), -lam))
        if shots == 0:
            val = expectation_pauli(state, observable) / math.sin(phi)
            estimates.append(float(val))
            stderrs.append(0.0)
            hists.append({})
        else:
            rotated = simulate(basis, state)
            counts = sample_counts(rotated, meas_qubits, shots, int(seeds[k]))
            parity = sum(c * (1 - 2 * (key.count("1") % 2)) for key, c in counts.items()) / shots
            err = math.sqrt(max(0.0, 1 - parity * parity) / shots)
            estimates.append(sign * parity / math.sin(phi))
            stderrs.append(err / abs(math.sin(phi)))
            hists.append(counts)
    return MeasurementRecord(
        tuple(spec.taus),
        tuple(estimates),
        tuple(stderrs),
        shots,
        seed,
        "direct",
        phi,
        lam,
        tuple(hists),
    )


def _parity_basis_circuit(observable: PauliString, width: int) -> Circuit:
    """Clifford basis change so the observable becomes the parity of its endpoints."""
    support = observable.support
    m, n = support[0], support[-1]
    gates = [GateOp("CZ", (k, n)) for k in support[1:-1]]
    for q in (m, n):
        letter = observable.letter_at(q)
        if letter == "X":
            gates.append(GateOp("H", (q,)))
        elif letter == "Y":
            gates.append(GateOp("XHALF", (q,)))
    return Circuit(width, tuple(gates))


def _exact_evolve(state: StateVector, v, evals, tau: float, n_sys: int) -> StateVector:
    """Dense exp(-i H tau) on the system factor, identity on the ancilla."""
    dim = 1 << n_sys
    amps = state.amps.reshape(2, dim).T  # columns: ancilla 0/1 blocks
    phases = np.exp(-1j * evals * tau)
    evolved = v @ (phases[:, None] * (v.conj().T @ amps))
    return StateVector(evolved.T.reshape(-1).copy(), state.n)


def direct_point_circuit(
    source: MajoranaIndex,
    probe: MajoranaIndex,
    t: float,
    u: float,
    plan: TrotterPlan,
    n_steps: int,
    phi: float,
    lam: float,
    ground_circuit: Circuit | None = None,
) -> tuple[Circuit, tuple[int, int], float]:
    """Fully gate-level 5-qubit circuit for one direct-protocol time point.

    Returns (circuit, parity qubits, estimator sign); the estimate is
    sign * parity / sin(phi).  The ancilla phase is spread as one Z^dag rotation
    per Trotter step.  Used by the noisy pipeline; the noiseless runner applies
    the same pieces as fused kernels.
    """
    h = FermionHamiltonian.dimer(t, u)
    width = h.n_modes + 1
    anc = h.n_modes
    ground = (ground_circuit or dimer_ground_circuit(t, u)).widened(width)
    src5 = jw_mode(h.mode_of(source.site, source.spin), width, source.flavor)
    prb5 = jw_mode(h.mode_of(probe.site, probe.spin), width, probe.flavor)
    xd = jw_mode(anc, width, "x")
    pert_gen = (src5 * xd).times_i()
    observable = (prb5 * xd).times_i()

    circ = ground + Circuit(width, (GateOp("X", (anc,)),))
    circ = circ.with_barrier("perturbation")
    circ = circ + Circuit(width, tuple(pauli_rotation_gates(pert_gen, phi)))
    circ = circ.with_barrier("evolution")
    step = dimer_trotter_step(t, u, plan.dtau).widened(width)
    if n_steps == 0:
        circ = circ + Circuit(width, (GateOp("RZ", (anc,), -lam),))
    else:
        per_step = Circuit(width, (GateOp("RZ", (anc,), -lam / n_steps),))
        for _ in range(n_steps):
            circ = circ + step + per_step
    circ = circ.with_barrier("measurement")
    circ = circ + _parity_basis_circuit(observable, width)
    sign = 1.0 if observable.phase_exp == 0 else -1.0
    return circ, (observable.support[0], observable.support[-1]), sign


# -- correlator assembly ------------------------------------------------------------


UNITARY_M = np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2)


def assemble_complex_green(entries: dict, fill_symmetric: bool = True) -> np.ndarray:
    """Rebuild the complex fermion block G = (1/2) M^dag g M from measured parts.

    `entries` maps flavor pairs 'xx', 'xy', 'yx', 'yy' to (retarded, keldysh)
    series; retarded = Re and keldysh = Im of <sigma_a(tau) sigma_b>.  Missing
    'yy' is filled from 'xx' and missing 'yx' from -'xy' (the dimer symmetries).
    Returns an array of shape (T, 2, 2).
    """
    data = dict(entries)
    if fill_symmetric:
        if "yy" not in data and "xx" in data:
            data["yy"] = data["xx"]
        if "yx" not in data and "xy" in data:
            ret, kel = data["xy"]
            data["yx"] = (-np.asarray(ret), -np.asarray(kel))
    missing = {"xx", "xy", "yx", "yy"} - set(data)
    if missing:
        raise ValueError(f"missing correlator entries: {sorted(missing)}")
    series = {}
    length = None
    for key, (ret, kel) in data.items():
        ret, kel = np.asarray(ret, dtype=float), np.asarray(kel, dtype=float)
        if ret.shape != kel.shape:
            raise ValueError("retarded/keldysh grids differ")
        if length is None:
            length = len(ret)
        elif len(ret) != length:
            raise ValueError("correlator series share no common time grid")
        series[key] = ret + 1j * kel
    out = np.empty((length, 2, 2), dtype=complex)
    for k in range(length):
        g = np.array(
            [[series["xx"][k], series["xy"][k]], [series["yx"][k], series["yy"][k]]]
        ) / 1j
        out[k] = 0.5 * UNITARY_M.conj().T @ g @ UNITARY_M
    return out


# -- the dimer experiment ---------------------------------------------------------------


DIMER_PAIRS = {
    "y2y2": (dimer_majorana(0, "down", "y"), dimer_majorana(0, "down", "y")),
    "y3y3": (dimer_majorana(1, "down", "y"), dimer_majorana(1, "down", "y")),
    "x3y2": (dimer_majorana(0, "down", "y"), dimer_majorana(1, "down", "x")),
}

DIMER_ANALYTIC_REF = {"y2y2": "xx_0", "y3y3": "xx_1", "x3y2": "xy_01"}


def dimer_ground_circuit(t: float, u: float) -> Circuit:
    from .vha import VhaParams, optimal_angles, vha_circuit

    return vha_circuit(VhaParams.single(*optimal_angles(t, u)))


def dimer_suite(
    t: float,
    u: float,
    plan: TrotterPlan,
    phi: float,
    shots: int,
    seed: int,
    evolution: str = "trotter",
    kind: str = "retarded",
) -> dict[str, MeasurementRecord]:
    """The three dimer series exactly as in the experiment pipeline.

    Retarded values are the full anticommutators <{probe(tau), source}> = 2 Re
    of the analytic correlators, Keldysh ones -i<[probe(tau), source]> = 2 Im
    (the protocol-native estimate is half of either).
    """
    ground = dimer_ground_circuit(t, u)
    taus = time_grid(plan)
    out = {}
    seeds = np.random.SeedSequence(seed).generate_state(len(DIMER_PAIRS))
    for k, (name, (source, probe)) in enumerate(DIMER_PAIRS.items()):
        spec = CorrelatorSpec(source, probe, taus, kind=kind, protocol="direct")
        rec = direct_measurement(
            spec, phi, ground, plan, shots, int(seeds[k]), t=t, u=u, evolution=evolution
        )
        out[name] = MeasurementRecord(
            rec.taus,
            tuple(2 * v for v in rec.estimates),
            tuple(2 * s for s in rec.stderrs),
            rec.shots,
            rec.seed,
            rec.protocol,
            rec.phi,
            rec.lam,
            rec.histograms,
        )
    return out

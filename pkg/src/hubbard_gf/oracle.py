"""Classical ground truth: dense diagonalization, Lehmann correlators, dimer closed forms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import FermionHamiltonian
from .pauli import PauliString, jw_mode
from .statevector import StateVector

MAX_MATRIX_QUBITS = 12


def majorana_operator(h: FermionHamiltonian, site: int, spin: str, flavor: str) -> PauliString:
    """Jordan-Wigner image of the (site, spin) Majorana in this Hamiltonian's mode order."""
    return jw_mode(h.mode_of(site, spin), h.n_modes, flavor)


def hopping_pauli_terms(m: int, n: int, width: int) -> list[tuple[float, PauliString]]:
    """c^dag_m c_n + h.c. as (i/2) y_m x_n - (i/2) x_m y_n, each summand Hermitian."""
    ym_xn = (jw_mode(m, width, "y") * jw_mode(n, width, "x")).times_i()
    xm_yn = (jw_mode(m, width, "x") * jw_mode(n, width, "y")).times_i()
    return [(0.5, ym_xn), (-0.5, xm_yn)]


def number_pauli_terms(q: int, width: int) -> list[tuple[float, PauliString]]:
    """n_q = (1 - Z_q)/2."""
    return [
        (0.5, PauliString.identity(width)),
        (-0.5, PauliString.from_letter_map(width, {q: "Z"})),
    ]


def hamiltonian_pauli_terms(h: FermionHamiltonian) -> list[tuple[float, PauliString]]:
    """The full Hamiltonian as a weighted list of Hermitian Pauli strings."""
    width = h.n_modes
    terms: list[tuple[float, PauliString]] = []
    for hop in h.hoppings:
        for spin in ("up", "down"):
            m, n = h.mode_of(hop.i, spin), h.mode_of(hop.j, spin)
            terms += [(hop.amplitude * c, p) for c, p in hopping_pauli_terms(m, n, width)]
    for rep in h.repulsions:
        a, b = h.mode_of(rep.site, "up"), h.mode_of(rep.site, "down")
        u = rep.strength
        terms += [
            (u / 4, PauliString.identity(width)),
            (-u / 4, PauliString.from_letter_map(width, {a: "Z"})),
            (-u / 4, PauliString.from_letter_map(width, {b: "Z"})),
            (u / 4, PauliString.from_letter_map(width, {a: "Z", b: "Z"})),
        ]
    for sh in h.shifts:
        for spin in ("up", "down"):
            q = h.mode_of(sh.site, spin)
            terms += [(sh.value * c, p) for c, p in number_pauli_terms(q, width)]
    return terms


def split_pauli_terms(h: FermionHamiltonian) -> tuple[list, list]:
    """(hopping terms, interaction terms incl. shifts) as weighted Pauli lists."""
    hop = FermionHamiltonian(h.n_sites, hoppings=h.hoppings, mode_order=h.mode_order)
    inter = FermionHamiltonian(
        h.n_sites, repulsions=h.repulsions, shifts=h.shifts, mode_order=h.mode_order
    )
    return hamiltonian_pauli_terms(hop), hamiltonian_pauli_terms(inter)


def build_matrix(h: FermionHamiltonian) -> np.ndarray:
    """Dense Hermitian matrix assembled from the Jordan-Wigner Pauli terms."""
    if h.n_modes > MAX_MATRIX_QUBITS:
        raise ValueError(f"{h.n_modes} qubits exceeds dense oracle capacity {MAX_MATRIX_QUBITS}")
    dim = 1 << h.n_modes
    out = np.zeros((dim, dim), dtype=complex)
    for coef, p in hamiltonian_pauli_terms(h):
        out += coef * p.to_matrix()
    herm_defect = np.max(np.abs(out - out.conj().T))
    if herm_defect > 1e-12:
        raise AssertionError(f"assembled matrix not Hermitian (defect {herm_defect})")
    return out


@dataclass(frozen=True)
class SpectralData:
    """Eigendecomposition with deterministic eigenvector phases."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    ground_index: int = 0

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[self.ground_index])

    @property
    def ground_vector(self) -> np.ndarray:
        return self.eigenvectors[:, self.ground_index]


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for k in range(out.shape[1]):
        v = out[:, k]
        idx = int(np.argmax(np.abs(v) > 1e-9))
        ph = v[idx] / abs(v[idx])
        out[:, k] = v * np.conj(ph)
    return out


def diagonalize(m: np.ndarray) -> SpectralData:
    """Full Hermitian eigendecomposition; first nonzero component of each vector
    is made real positive so goldens are reproducible."""
    if np.max(np.abs(m - m.conj().T)) > 1e-10:
        raise ValueError("input is not Hermitian")
    evals, evecs = np.linalg.eigh(m)
    evecs = _fix_phases(evecs)
    resid = np.max(np.abs(m @ evecs - evecs * evals[None, :]))
    if resid > 1e-9:
        raise AssertionError(f"eigenpair residual too large: {resid}")
    return SpectralData(evals, evecs, 0)


def ground_state(m: np.ndarray) -> tuple[float, StateVector]:
    spec = diagonalize(m)
    return spec.ground_energy, StateVector.from_amps(spec.ground_vector)


def lehmann_correlator(
    opA: PauliString,
    opB: PauliString,
    h: FermionHamiltonian,
    tau,
    spectral: SpectralData | None = None,
    state: np.ndarray | None = None,
):
    """<psi| A(tau) B |psi> via the eigenstate decomposition of the propagator.

    A(tau) = e^{iHt} A e^{-iHt}; psi defaults to the ground state.  `tau` may be
    a scalar or an array; the return matches.
    """
    if opA.width != opB.width:
        raise ValueError("operator widths differ")
    if spectral is None:
        spectral = diagonalize(build_matrix(h))
    if opA.width != int(np.log2(len(spectral.eigenvalues))):
        raise ValueError("operator width does not match the Hamiltonian")
    psi = spectral.ground_vector if state is None else np.asarray(state, dtype=complex)
    v = spectral.eigenvectors
    wb = v.conj().T @ (opB.to_matrix() @ psi)
    u_psi = v.conj().T @ psi
    a_eig = v.conj().T @ opA.to_matrix() @ v
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    # <psi| e^{iHt} A e^{-iHt} B |psi> = (e^{-iHt} psi)^dag A (e^{-iHt} B psi), in eigenbasis
    phases = np.exp(-1j * np.outer(taus, spectral.eigenvalues))
    out = np.einsum("tm,mk,tk->t", np.conj(phases * u_psi[None, :]), a_eig, phases * wb[None, :])
    return complex(out[0]) if np.ndim(tau) == 0 else out


def dimer_energy_scales(t: float, u: float) -> tuple[float, float]:
    """The two combinations sqrt(U^2 + 16 t^2), sqrt(U^2 + 64 t^2)."""
    return float(np.sqrt(u * u + 16 * t * t)), float(np.sqrt(u * u + 64 * t * t))


def dimer_ground_energy(t: float, u: float) -> float:
    return -0.25 * (u + np.sqrt(u * u + 64 * t * t))


def dimer_sector_energies(t: float, u: float) -> tuple[float, float]:
    """Ground-state expectations of the hopping and interaction parts."""
    u2 = np.sqrt(u * u + 64 * t * t)
    e_hop = -16 * t * t / u2
    e_int = -(u / 4) * (1 + u / u2)
    return float(e_hop), float(e_int)


def dimer_analytic(which: str, t: float, u: float, tau):
    """Closed-form dimer correlators; `which` is xx_0, xx_1 or xy_01."""
    if not t > 0:
        raise ValueError("t must be positive")
    u1, u2 = dimer_energy_scales(t, u)
    taus = np.asarray(tau, dtype=float)
    envelope = np.exp(-0.25j * taus * u2)
    c, s = np.cos(taus * u1 / 4), np.sin(taus * u1 / 4)
    if which == "xx_0":
        out = envelope * (c - 1j * (u * u - 32 * t * t) / (u1 * u2) * s)
    elif which == "xx_1":
        out = envelope * (c + 1j * (u * u + 32 * t * t) / (u1 * u2) * s)
    elif which == "xy_01":
        out = 4 * envelope * (2j * t / u2 * c - t / u1 * s)
    else:
        raise ValueError(f"unknown correlator {which!r}")
    return complex(out) if np.ndim(tau) == 0 else out


def dimer_spectral(t: float, u: float) -> tuple[FermionHamiltonian, SpectralData]:
    h = FermionHamiltonian.dimer(t, u)
    return h, diagonalize(build_matrix(h))

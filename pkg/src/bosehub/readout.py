"""Simulated noisy readout and its mitigation toolkit.

The device model is classical per-qubit readout flips only: each qubit
carries a 2x2 column-stochastic confusion matrix P with p_ij the probability
that true state j is recorded as i. Calibration estimates P from prepared
|0> and |1> runs; its inverse maps observed frequencies back to true ones,
and tr(P~)/2 >= 1 ranks qubits (1 means perfect readout). The hardware
layout is reproduced: each of the 25 non-anchor coefficients is measured on
5 replica qubits, so five wave functions come out of one run and the best
qubit per coefficient can be postselected.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .basis import feature_matrix
from .circuit import CircuitParams, ShotResult, batch_weights
from .hamiltonian import HamiltonianMatrix
from .variational import rayleigh_energy

log = logging.getLogger(__name__)

INVERSE_TOL = 1e-12
DEFAULT_QUBITS = 125
DEFAULT_REPLICAS = 5
DEFAULT_ERROR_RANGE = (0.005, 0.05)


class CorrectionMode(str, Enum):
    UNCORRECTED = "uncorrected"
    CORRECTED = "corrected"
    POSTSELECTED = "postselected"
    POSTSELECTED_CORRECTED = "postselected-corrected"


@dataclass(frozen=True)
class ConfusionMatrix:
    """Column-stochastic readout matrix; p_ij = P(recorded i | true j)."""

    p00: float
    p01: float
    p10: float
    p11: float

    def __post_init__(self):
        probs = (self.p00, self.p01, self.p10, self.p11)
        if any(p < 0 or p > 1 for p in probs):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(self.p00 + self.p10 - 1.0) > 1e-9 or abs(self.p01 + self.p11 - 1.0) > 1e-9:
            raise ValueError("columns must sum to 1")
        if self.p00 + self.p11 <= 1.0:
            raise ValueError(
                "p00 + p11 must exceed 1 for an invertible, physical readout")

    @classmethod
    def from_flip_rates(cls, eps0: float, eps1: float) -> "ConfusionMatrix":
        """eps0 = P(0 recorded as 1), eps1 = P(1 recorded as 0)."""
        return cls(1.0 - eps0, eps1, eps0, 1.0 - eps1)

    def matrix(self) -> np.ndarray:
        return np.array([[self.p00, self.p01], [self.p10, self.p11]])

    def invert(self) -> "InverseConfusion":
        det = self.p00 * self.p11 - self.p01 * self.p10
        inv = np.array([[self.p11, -self.p01], [-self.p10, self.p00]]) / det
        return InverseConfusion(inv, float(np.trace(inv) / 2.0))


@dataclass(frozen=True)
class InverseConfusion:
    """P~ = P^{-1} with its figure of merit tr(P~)/2 (>= 1, 1 iff perfect)."""

    matrix: np.ndarray
    figure_of_merit: float

    def __post_init__(self):
        if self.matrix.shape != (2, 2):
            raise ValueError("inverse confusion must be 2x2")
        if self.matrix[0, 0] < 1.0 - 1e-9 or self.matrix[1, 1] < 1.0 - 1e-9:
            raise ValueError("diagonal of the inverse must be >= 1")


@dataclass
class SimulatedDevice:
    """A bank of qubits with independent readout-flip confusion matrices."""

    confusions: list[ConfusionMatrix]

    @classmethod
    def random(cls, n_qubits: int = DEFAULT_QUBITS,
               error_range: tuple[float, float] = DEFAULT_ERROR_RANGE,
               seed: int = 0) -> "SimulatedDevice":
        """Flip rates drawn uniformly per qubit and direction."""
        rng = np.random.default_rng(seed)
        lo, hi = error_range
        return cls([
            ConfusionMatrix.from_flip_rates(rng.uniform(lo, hi),
                                            rng.uniform(lo, hi))
            for _ in range(n_qubits)
        ])

    @classmethod
    def noiseless(cls, n_qubits: int = DEFAULT_QUBITS) -> "SimulatedDevice":
        return cls([ConfusionMatrix(1.0, 0.0, 0.0, 1.0)] * n_qubits)

    @property
    def n_qubits(self) -> int:
        return len(self.confusions)

    def measure(self, qubit: int, prob0: float, shots: int,
                rng: np.random.Generator) -> ShotResult:
        """Sample recorded counts: true outcomes first, then readout flips."""
        cm = self.confusions[qubit]
        true0 = rng.binomial(shots, min(max(prob0, 0.0), 1.0))
        kept0 = rng.binomial(true0, cm.p00) if true0 else 0
        flipped_to_0 = rng.binomial(shots - true0, cm.p01) if shots - true0 else 0
        return ShotResult(shots, int(kept0 + flipped_to_0))


def calibrate(device: SimulatedDevice, qubit: int, shots: int,
              rng) -> ConfusionMatrix:
    """Estimate a qubit's confusion matrix from |0> and |1> preparation runs."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    run0 = device.measure(qubit, 1.0, shots, rng)
    run1 = device.measure(qubit, 0.0, shots, rng)
    return ConfusionMatrix(run0.frequency0, run1.frequency0,
                           1.0 - run0.frequency0, 1.0 - run1.frequency0)


def correct(observed: ShotResult, inv: InverseConfusion) -> tuple[float, float]:
    """Map observed frequencies to corrected probabilities.

    The raw product sums to one but can leave [0, 1] slightly; it is then
    clamped and renormalized, with the raw value logged.
    """
    freqs = np.array([observed.frequency0, 1.0 - observed.frequency0])
    raw = inv.matrix @ freqs
    if raw[0] < 0.0 or raw[0] > 1.0:
        log.debug("corrected probability %r outside [0,1]; clamping", raw)
        clipped = np.clip(raw, 0.0, 1.0)
        total = clipped.sum()
        if total == 0.0:
            return 0.5, 0.5
        clipped /= total
        return float(clipped[0]), float(clipped[1])
    return float(raw[0]), float(raw[1])


def postselect(group: list[tuple[int, InverseConfusion]]) -> int:
    """Qubit with the smallest figure of merit; ties go to the lowest index."""
    if not group:
        raise ValueError("empty qubit group")
    return min(group, key=lambda item: (item[1].figure_of_merit, item[0]))[0]


def replica_layout(n_coeffs: int = 25, n_replicas: int = DEFAULT_REPLICAS,
                   n_qubits: int = DEFAULT_QUBITS) -> np.ndarray:
    """Qubit ids (n_coeffs, n_replicas); replica r occupies one 25-qubit block."""
    if n_coeffs * n_replicas > n_qubits:
        raise ValueError("layout does not fit on the device")
    return np.array([[r * n_coeffs + k for r in range(n_replicas)]
                     for k in range(n_coeffs)])


def noisy_energies(params: CircuitParams, h: HamiltonianMatrix,
                   device: SimulatedDevice, layout: np.ndarray,
                   shots: int, modes, rng,
                   calibration_shots: int | None = None,
                   anchor_index: int | None = None) -> dict:
    """One data-taking run on the simulated device, one energy per mode.

    All requested modes are assembled from the same calibration and data
    samples, mirroring the with/without-correction comparison of a single
    hardware run. The anchor coefficient (by default the last class) is fixed
    to its ideal circuit value, standing in for the normalization constraint;
    every other coefficient is measured on its replica qubits through their
    confusion matrices. Calibration runs with ``calibration_shots``
    (defaulting to the data shots) estimate the inverses used for correction
    and for the postselection ranking.

    Sampling order is fixed (calibrations in qubit-layout order, then data in
    coefficient-major order), so results are deterministic given the rng.
    """
    modes = [CorrectionMode(m) for m in modes]
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    ideal = batch_weights(params, feature_matrix(h.basis))
    dim = h.dim
    anchor = dim - 1 if anchor_index is None else anchor_index
    measured = [i for i in range(dim) if i != anchor]
    layout = np.asarray(layout)
    if layout.shape[0] != len(measured):
        raise ValueError(
            f"layout covers {layout.shape[0]} coefficients, need {len(measured)}")
    if np.unique(layout).size != layout.size:
        raise ValueError("layout assigns a qubit twice")
    if layout.size and (layout.min() < 0 or layout.max() >= device.n_qubits):
        raise ValueError("layout references qubits outside the device")

    cal_shots = shots if calibration_shots is None else calibration_shots
    inverses = {int(q): calibrate(device, int(q), cal_shots, rng).invert()
                for q in layout.ravel()}
    samples = [
        [(int(q), device.measure(int(q), ideal[class_index], shots, rng))
         for q in layout[row]]
        for row, class_index in enumerate(measured)
    ]

    energies = {}
    for mode in modes:
        coeffs = np.empty(dim)
        coeffs[anchor] = ideal[anchor]
        for row, class_index in enumerate(measured):
            group = samples[row]
            if mode is CorrectionMode.UNCORRECTED:
                value = np.mean([obs.frequency0 for _, obs in group])
            elif mode is CorrectionMode.CORRECTED:
                value = np.mean([correct(obs, inverses[q])[0]
                                 for q, obs in group])
            else:
                best = postselect([(q, inverses[q]) for q, _ in group])
                observed = next(obs for q, obs in group if q == best)
                if mode is CorrectionMode.POSTSELECTED:
                    value = observed.frequency0
                else:
                    value = correct(observed, inverses[best])[0]
            coeffs[class_index] = float(value)
        energies[mode] = rayleigh_energy(coeffs, h)
    return energies


def noisy_energy_run(params: CircuitParams, h: HamiltonianMatrix,
                     device: SimulatedDevice, layout: np.ndarray,
                     shots: int, mode: CorrectionMode, rng,
                     calibration_shots: int | None = None,
                     anchor_index: int | None = None) -> float:
    """Single-mode convenience wrapper around :func:`noisy_energies`."""
    mode = CorrectionMode(mode)
    return noisy_energies(params, h, device, layout, shots, [mode], rng,
                          calibration_shots, anchor_index)[mode]


def shot_study(params: CircuitParams, h: HamiltonianMatrix, shot_grid,
               trials: int = 100, seed: int = 0):
    """Noiseless finite-shot energies vs the ideal value.

    For each shot count, every coefficient of every trial is an independent
    binomial frequency; rows are (shots, median |dE/E|, std of |dE/E|).
    Trials are seeded independently so results reduce deterministically.
    """
    ideal = batch_weights(params, feature_matrix(h.basis))
    ideal_energy = rayleigh_energy(ideal, h)
    rows = []
    for shots in shot_grid:
        shots = int(shots)
        devs = np.empty(trials)
        for trial in range(trials):
            rng = np.random.default_rng(np.random.SeedSequence((seed, shots, trial)))
            counts = rng.binomial(shots, np.clip(ideal, 0.0, 1.0))
            sampled = counts / shots
            if not sampled.any():
                devs[trial] = 1.0  # all-zero draw carries no energy estimate
                continue
            energy = rayleigh_energy(sampled, h)
            devs[trial] = abs(energy - ideal_energy) / abs(ideal_energy)
        rows.append((shots, float(np.median(devs)), float(np.std(devs))))
    return rows


def calibration_report(device: SimulatedDevice, shots: int, seed: int,
                       selected: set[int] | None = None):
    """Per-qubit calibration rows (qubit, p00, p01, p10, p11, fom, selected)."""
    rng = np.random.default_rng(seed)
    selected = selected or set()
    rows = []
    for qubit in range(device.n_qubits):
        est = calibrate(device, qubit, shots, rng)
        fom = est.invert().figure_of_merit
        rows.append((qubit, est.p00, est.p01, est.p10, est.p11, fom,
                     int(qubit in selected)))
    return rows


def write_calibration_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["qubit", "p00", "p01", "p10", "p11",
                         "figure_of_merit", "selected"])
        for row in rows:
            writer.writerow([row[0]] + [repr(float(v)) for v in row[1:6]]
                            + [row[6]])


def write_shot_study_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["shots", "median_frac_dev", "std"])
        for shots, median, std in rows:
            writer.writerow([shots, repr(median), repr(std)])


def write_energy_report_csv(rows, path) -> None:
    """Rows of (run, mode, U, energy, ideal_energy)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "mode", "U", "energy", "ideal_energy"])
        for run, mode, u, energy, ideal in rows:
            writer.writerow([run, mode, repr(float(u)), repr(float(energy)),
                             repr(float(ideal))])

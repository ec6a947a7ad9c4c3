"""Energy functional and the Adam training loop shared by all Ansaetze.

Each ansatz maps a flat parameter vector to one coefficient per basis class
(evaluated on the class representative's features) plus the Jacobian of the
coefficients. Training minimizes the Rayleigh quotient over the full basis,
no mini-batches, recording the energy at every step. Gradients chain the
quotient derivative through the ansatz Jacobian analytically.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from . import circuit as qc
from . import neural
from .basis import feature_matrix
from .hamiltonian import HamiltonianMatrix


class TrainingDiverged(RuntimeError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class TrainConfig:
    """Adam settings. The learning rate 0.02 is shared by every ansatz."""

    steps: int
    learning_rate: float = 0.02
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0
    restarts: int = 1
    init_scale: float = 0.1

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")
        if self.epsilon <= 0 or self.learning_rate <= 0:
            raise ValueError("epsilon and learning_rate must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class TrainResult:
    theta: np.ndarray
    energies: np.ndarray  # energy before each update plus the final one
    seed: int

    @property
    def final_energy(self) -> float:
        return float(self.energies[-1])


def rayleigh_energy(coeffs, h: HamiltonianMatrix) -> float:
    """(c^dag H c) / (c^dag c); invariant under scaling of c."""
    c = np.asarray(coeffs)
    if c.shape != (h.dim,):
        raise ValueError(f"coefficient length {c.shape} != basis dim {h.dim}")
    norm = np.real(np.vdot(c, c))
    if norm == 0.0:
        raise ValueError("zero coefficient vector")
    return float(np.real(np.vdot(c, h.matrix @ c)) / norm)


def rayleigh_residual(coeffs, h: HamiltonianMatrix):
    """dE/d(conj c) = (Hc - Ec)/(c^dag c); vanishes at any eigenvector."""
    c = np.asarray(coeffs)
    norm = np.real(np.vdot(c, c))
    if norm == 0.0:
        raise ValueError("zero coefficient vector")
    hc = h.matrix @ c
    energy = np.real(np.vdot(c, hc)) / norm
    return (hc - energy * c) / norm, float(energy)


class MlpAnsatz:
    """Neural coefficients c_C = exp(net(x_C)), complex with two outputs."""

    def __init__(self, h: HamiltonianMatrix, hidden=(64, 32),
                 complex_mode: bool = False, raw_features: bool = False):
        self.features = feature_matrix(h.basis, raw=raw_features)
        self.sizes = (self.features.shape[1],) + tuple(hidden)
        self.complex_mode = complex_mode
        self._template = neural.MlpParams.initialize(
            self.sizes, outputs=2 if complex_mode else 1, rng=0)

    @property
    def n_params(self) -> int:
        return self._template.n_params

    def initial_vector(self, rng, scale: float | None = None) -> np.ndarray:
        # scale is a circuit knob; the network keeps its fan-in rule
        return neural.MlpParams.initialize(
            self.sizes, outputs=2 if self.complex_mode else 1, rng=rng
        ).flatten()

    def coefficients(self, theta):
        params = self._template.with_flat(theta)
        out, _ = neural.mlp_forward(params, self.features)
        return neural.output_to_coefficient(out)

    def energy_gradient(self, theta, h: HamiltonianMatrix):
        """(energy, dE/dtheta, coefficients) at one parameter vector."""
        params = self._template.with_flat(theta)
        out, cache = neural.mlp_forward(params, self.features)
        c = neural.output_to_coefficient(out)
        r, energy = rayleigh_residual(c, h)
        rc = np.conj(r) * c
        if self.complex_mode:
            upstream = np.stack([2.0 * rc.real, -2.0 * rc.imag], axis=1)
        else:
            upstream = (2.0 * rc.real)[:, None]
        grad = neural.mlp_backward(params, cache, upstream)
        return energy, grad, c

    def export(self, theta) -> str:
        return neural.to_json(self._template.with_flat(theta))


class CircuitAnsatz:
    """Circuit coefficients: P(0), or P(0) e^{i pi <sigma_x>} in complex mode."""

    def __init__(self, h: HamiltonianMatrix, kind: str, layers: int,
                 complex_mode: bool = False, raw_features: bool = False,
                 readout: str = "p0"):
        self.features = feature_matrix(h.basis, raw=raw_features)
        self.kind = kind
        self.layers = layers
        self.complex_mode = complex_mode
        self.readout = readout
        self.n_features = self.features.shape[1]
        if complex_mode and readout != "p0":
            raise ValueError("complex mode fixes the P(0) magnitude readout")

    @property
    def n_params(self) -> int:
        return self.layers * qc.PARAMS_PER_LAYER[self.kind](self.n_features)

    def initial_vector(self, rng, scale: float = 0.1) -> np.ndarray:
        return qc.init_params(self.kind, self.layers, rng, scale,
                              self.n_features).values

    def params(self, theta) -> qc.CircuitParams:
        return qc.CircuitParams(self.kind, self.layers, theta, self.n_features)

    def coefficients(self, theta):
        if self.complex_mode:
            return qc.batch_complex_weights(self.params(theta), self.features)
        return qc.batch_weights(self.params(theta), self.features,
                                readout=self.readout)

    def energy_gradient(self, theta, h: HamiltonianMatrix):
        c, jac = qc.batch_weights_and_jacobian(
            self.params(theta), self.features,
            complex_mode=self.complex_mode, readout=self.readout)
        r, energy = rayleigh_residual(c, h)
        grad = 2.0 * np.real(np.conj(r) @ jac)
        return energy, grad, c

    def export(self, theta) -> str:
        return qc.to_json(self.params(theta))


def train(ansatz, h: HamiltonianMatrix, cfg: TrainConfig) -> TrainResult:
    """Full-basis Adam minimization of the Rayleigh energy.

    With ``cfg.restarts > 1`` the run is repeated from seeds
    ``seed, seed+1, ...`` and the lowest final energy wins (single-qubit
    landscapes have local minima). Deterministic for a fixed config.
    """
    if not h.is_real and not ansatz.complex_mode:
        raise ValueError("complex Hamiltonian needs a complex-mode ansatz")
    best: TrainResult | None = None
    for attempt in range(cfg.restarts):
        result = _train_once(ansatz, h, replace(cfg, seed=cfg.seed + attempt))
        if best is None or result.final_energy < best.final_energy:
            best = result
    return best


def _train_once(ansatz, h, cfg: TrainConfig) -> TrainResult:
    rng = np.random.default_rng(cfg.seed)
    theta = ansatz.initial_vector(rng, cfg.init_scale)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    energies = np.empty(cfg.steps + 1)
    for step in range(1, cfg.steps + 1):
        energy, grad, _ = ansatz.energy_gradient(theta, h)
        energies[step - 1] = energy
        if not np.isfinite(energy):
            raise TrainingDiverged(
                f"energy became non-finite at step {step}",
                energies[:step])
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad
        m_hat = m / (1.0 - cfg.beta1 ** step)
        v_hat = v / (1.0 - cfg.beta2 ** step)
        theta = theta - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    energies[cfg.steps] = rayleigh_energy(ansatz.coefficients(theta), h)
    if not np.isfinite(energies[cfg.steps]):
        raise TrainingDiverged("final energy non-finite", energies[:-1])
    return TrainResult(theta, energies, cfg.seed)


def layer_study(kind: str, layer_counts, h: HamiltonianMatrix,
                cfg: TrainConfig, complex_mode: bool = False,
                raw_features: bool = False):
    """Train one circuit per layer count; returns [(layers, final_energy)]."""
    rows = []
    for layers in layer_counts:
        ansatz = CircuitAnsatz(h, kind, layers, complex_mode=complex_mode,
                               raw_features=raw_features)
        result = train(ansatz, h, cfg)
        rows.append((int(layers), result.final_energy))
    return rows


def write_trace_csv(result: TrainResult, exact_energy: float, path) -> None:
    """Per-step CSV (step, energy, loss) with loss = exact - estimate."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "energy", "loss"])
        for step, energy in enumerate(result.energies):
            writer.writerow([step, repr(float(energy)),
                             repr(float(exact_energy - energy))])

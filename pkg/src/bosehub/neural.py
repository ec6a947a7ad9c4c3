"""Feed-forward neural baseline with hand-rolled forward and backward passes.

The reference architecture takes the M mean-subtracted occupations into two
tanh hidden layers of 64 and 32 nodes and a linear output head carrying no
bias, for 2560 parameters at M=6 with one output. Wave-function coefficients
are the exponential of the output: strictly positive for one output (the
ground state has uniform sign), magnitude-and-phase e^{x0 + i x1} for two.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

EXP_CLAMP = 30.0
_FORMAT_VERSION = 1


@dataclass
class MlpParams:
    """Hidden (W, b) pairs plus the bias-free output matrix."""

    hidden: list[tuple[np.ndarray, np.ndarray]]
    output: np.ndarray

    @classmethod
    def initialize(cls, sizes=(6, 64, 32), outputs: int = 1, rng=0,
                   ) -> "MlpParams":
        """Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer."""
        rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
        hidden = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            lim = 1.0 / np.sqrt(fan_in)
            hidden.append((rng.uniform(-lim, lim, (fan_in, fan_out)),
                           rng.uniform(-lim, lim, fan_out)))
        lim = 1.0 / np.sqrt(sizes[-1])
        output = rng.uniform(-lim, lim, (sizes[-1], outputs))
        return cls(hidden, output)

    @property
    def n_inputs(self) -> int:
        return self.hidden[0][0].shape[0]

    @property
    def n_outputs(self) -> int:
        return self.output.shape[1]

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in self.hidden) + self.output.size

    def flatten(self) -> np.ndarray:
        parts = [a.ravel() for w, b in self.hidden for a in (w, b)]
        parts.append(self.output.ravel())
        return np.concatenate(parts)

    def with_flat(self, flat: np.ndarray) -> "MlpParams":
        """Rebuild parameters of this shape from a flat vector."""
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.n_params:
            raise ValueError(f"expected {self.n_params} values, got {flat.size}")
        pos = 0
        hidden = []
        for w, b in self.hidden:
            nw = w.size
            hidden.append((flat[pos:pos + nw].reshape(w.shape).copy(),
                           flat[pos + nw:pos + nw + b.size].copy()))
            pos += nw + b.size
        output = flat[pos:].reshape(self.output.shape).copy()
        return MlpParams(hidden, output)


def mlp_forward(params: MlpParams, features):
    """Affine -> tanh through the hidden stack, linear output.

    Accepts a single feature vector or a (batch, M) matrix; returns the
    output(s) with matching leading shape plus the activation cache used by
    :func:`mlp_backward`.
    """
    x = np.asarray(features, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != params.n_inputs:
        raise ValueError(
            f"expected {params.n_inputs} inputs, got {X.shape[1]}"
        )
    activations = [X]
    a = X
    for w, b in params.hidden:
        a = np.tanh(a @ w + b)
        activations.append(a)
    out = a @ params.output
    return (out[0] if single else out), activations


def mlp_backward(params: MlpParams, activations, upstream) -> np.ndarray:
    """Reverse-mode gradient, flattened in parameter order.

    ``upstream`` holds d(loss)/d(output) per batch row; the result is the
    gradient of the scalar loss with respect to every weight and bias.
    """
    dout = np.atleast_2d(np.asarray(upstream, dtype=float))
    grads_hidden = []
    da = dout @ params.output.T
    d_output = activations[-1].T @ dout
    for (w, b), a_in, a_out in zip(reversed(params.hidden),
                                   reversed(activations[:-1]),
                                   reversed(activations[1:])):
        dz = da * (1.0 - a_out ** 2)
        grads_hidden.append((a_in.T @ dz, dz.sum(axis=0)))
        da = dz @ w.T
    parts = [a.ravel() for gw, gb in reversed(grads_hidden) for a in (gw, gb)]
    parts.append(d_output.ravel())
    return np.concatenate(parts)


def coefficient(params: MlpParams, features):
    """Wave-function coefficient: e^x, or e^{x0} e^{i x1} for two outputs."""
    out, _ = mlp_forward(params, features)
    return output_to_coefficient(np.atleast_2d(out))[0]


def output_to_coefficient(out: np.ndarray) -> np.ndarray:
    """Map network outputs (batch, 1 or 2) to coefficients (batch,)."""
    mag = out[:, 0]
    if np.any(np.abs(mag) > EXP_CLAMP):
        warnings.warn(
            "network output exceeded the exponent clamp; magnitude limited "
            f"to e^{EXP_CLAMP:g}", RuntimeWarning, stacklevel=2)
        mag = np.clip(mag, -EXP_CLAMP, EXP_CLAMP)
    if out.shape[1] == 1:
        return np.exp(mag)
    return np.exp(mag) * np.exp(1j * out[:, 1])


def to_json(params: MlpParams) -> str:
    """Versioned checkpoint; exact round-trip."""
    return json.dumps({
        "format": "bosehub-mlp",
        "version": _FORMAT_VERSION,
        "hidden": [[w.shape[0], w.shape[1]] for w, _ in params.hidden],
        "outputs": params.n_outputs,
        "values": params.flatten().tolist(),
    })


def from_json(text: str) -> MlpParams:
    data = json.loads(text)
    if data.get("format") != "bosehub-mlp":
        raise ValueError("not an MLP checkpoint")
    if data.get("version") != _FORMAT_VERSION:
        raise ValueError(f"unsupported version {data.get('version')}")
    sizes = [data["hidden"][0][0]] + [shape[1] for shape in data["hidden"]]
    template = MlpParams.initialize(tuple(sizes), data["outputs"], rng=0)
    return template.with_flat(np.array(data["values"], dtype=float))

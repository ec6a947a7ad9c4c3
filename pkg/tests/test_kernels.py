"""Backend equivalence: the numba lane and the numpy fallback must agree."""
import numpy as np
import pytest

from bosehub import _kernels
from bosehub.circuit import init_params


@pytest.mark.parametrize("kind,layers", [("compressed", 1), ("compressed", 5),
                                         ("quat", 1), ("quat", 4)])
def test_backends_agree(kind, layers):
    if _kernels.BACKEND != "numba":
        pytest.skip("numba backend not active")
    rng = np.random.default_rng(layers)
    params = init_params(kind, layers, rng, scale=1.5)
    X = rng.uniform(-2.0, 2.0, (11, 6))
    jit_fn = _kernels._compressed_loop if kind == "compressed" else _kernels._quat_loop
    np_fn = _kernels._compressed_numpy if kind == "compressed" else _kernels._quat_numpy
    for want_grad in (False, True):
        out_jit = jit_fn(params.values, X, want_grad)
        out_np = np_fn(params.values, X, want_grad)
        for a, b in zip(out_jit, out_np):
            np.testing.assert_allclose(a, b, atol=1e-13, rtol=0)


def test_zero_layer_edge_case():
    for kind in ("compressed", "quat"):
        p0, sx, dp0, dsx = _kernels.circuit_batch(kind, np.array([]),
                                                  np.zeros((3, 6)))
        np.testing.assert_array_equal(p0, 1.0)
        np.testing.assert_array_equal(sx, 0.0)
        assert dp0.shape == (3, 0)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        _kernels.circuit_batch("bogus", np.zeros(7), np.zeros((1, 6)))


def test_unitarity_through_layers():
    # norm of the implicit state: P(0) + P(1) = 1 means |amp1|^2 follows;
    # check via sigma_z, sigma_x magnitudes staying on the Bloch sphere
    rng = np.random.default_rng(9)
    params = init_params("compressed", 6, rng, scale=2.0)
    X = rng.uniform(-2, 2, (40, 6))
    p0, sx, _, _ = _kernels.circuit_batch("compressed", params.values, X,
                                          want_grad=False)
    sz = 2.0 * p0 - 1.0
    assert np.all(sz ** 2 + sx ** 2 <= 1.0 + 1e-12)
    assert np.all(p0 >= -1e-12) and np.all(p0 <= 1.0 + 1e-12)


def test_batch_matches_single_evaluation():
    rng = np.random.default_rng(4)
    params = init_params("quat", 3, rng)
    X = rng.uniform(-1, 1, (7, 6))
    batch_p0, _, batch_dp0, _ = _kernels.circuit_batch("quat", params.values, X)
    for row in range(7):
        p0, _, dp0, _ = _kernels.circuit_batch("quat", params.values,
                                               X[row:row + 1])
        assert batch_p0[row] == pytest.approx(p0[0], abs=1e-14)
        np.testing.assert_allclose(batch_dp0[row], dp0[0], atol=1e-14)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import power_iteration_norm, random_skew, random_spd
from nsmongeampere.errors import NotSkew, NotSpd
from nsmongeampere.matrix_core import (
    as_skew,
    matrix_from_json,
    matrix_to_json,
    norms,
    skew_spectrum,
    spd_roots,
)

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 8)


def test_spd_roots_identity():
    s, i = spd_roots(np.eye(3))
    assert np.allclose(s, np.eye(3)) and np.allclose(i, np.eye(3))


def test_spd_roots_diagonal():
    s, i = spd_roots(np.diag([4.0, 9.0]))
    assert np.allclose(s, np.diag([2.0, 3.0]), atol=1e-14)
    assert np.allclose(i, np.diag([0.5, 1 / 3]), atol=1e-14)


def test_spd_roots_multiply_back(rng):
    w = random_spd(rng, 5)
    s, i = spd_roots(w)
    assert np.max(np.abs(s @ s - w)) <= 1e-10 * np.max(np.abs(w))
    assert np.max(np.abs(i @ i - np.linalg.inv(w))) <= 1e-10 * np.max(np.abs(np.linalg.inv(w)))
    assert np.all(np.linalg.eigvalsh(s) > 0) and np.all(np.linalg.eigvalsh(i) > 0)


@pytest.mark.parametrize(
    "bad",
    [np.array([[1.0, 0.5], [0.0, 1.0]]), np.diag([1.0, -1.0]), np.diag([1.0, 0.0])],
)
def test_spd_roots_rejects(bad):
    with pytest.raises(NotSpd):
        spd_roots(bad)


@given(seeds, dims)
def test_sqrt_commutes_with_omega(seed, n):
    w = random_spd(np.random.default_rng(seed), n)
    s, _ = spd_roots(w)
    assert np.max(np.abs(s @ w - w @ s)) <= 1e-9 * (1 + np.max(np.abs(w)))


def test_skew_spectrum_zero():
    sp = skew_spectrum(np.zeros((3, 3)))
    assert np.all(sp.sigmas == 0)


def test_skew_spectrum_2x2():
    sp = skew_spectrum(np.array([[0.0, 2.0], [-2.0, 0.0]]))
    assert np.allclose(sp.sigmas, [2.0, -2.0], atol=1e-14)


def test_skew_spectrum_odd_has_zero(rng):
    sp = skew_spectrum(random_skew(rng, 3))
    assert np.sum(np.abs(sp.sigmas) <= 1e-12) >= 1
    assert sp.sigmas[-1] == 0.0


def test_skew_spectrum_n1():
    sp = skew_spectrum(np.zeros((1, 1)))
    assert sp.sigmas.tolist() == [0.0]


@given(seeds, dims)
def test_skew_spectrum_invariants(seed, n):
    beta = random_skew(np.random.default_rng(seed), n, scale=3.0)
    sp = skew_spectrum(beta)
    c = sp.unitary
    scale = 1 + np.max(np.abs(beta))
    assert np.max(np.abs(c @ c.conj().T - np.eye(n))) <= 1e-9
    assert np.max(np.abs(sp.reconstruct() - beta)) <= 1e-9 * scale
    half = n // 2
    assert np.array_equal(sp.sigmas[0 : 2 * half : 2], -sp.sigmas[1 : 2 * half : 2])
    assert np.all(sp.sigmas[0 : 2 * half : 2] >= 0)
    if n % 2:
        assert sp.sigmas[-1] == 0.0
    assert np.allclose(np.sort(sp.sigmas), np.sort(-sp.sigmas), atol=0)


def test_as_skew_rejects():
    with pytest.raises(NotSkew):
        as_skew(np.eye(2))


def test_norms_identity():
    op, fro = norms(np.eye(3))
    assert op == pytest.approx(1.0) and fro == pytest.approx(np.sqrt(3))


def test_norms_skew_2x2():
    b = -1.7
    op, fro = norms(np.array([[0, b], [-b, 0]]))
    assert op == pytest.approx(abs(b)) and fro == pytest.approx(abs(b) * np.sqrt(2))


def test_norms_complex():
    op, fro = norms(np.diag([3j, 4.0]))
    assert op == pytest.approx(4.0) and fro == pytest.approx(5.0)


def test_op_norm_matches_power_iteration(rng):
    for n in (2, 4, 7):
        m = rng.standard_normal((n, n))
        assert abs(norms(m)[0] - power_iteration_norm(m)) <= 1e-9 * norms(m)[0]


@given(seeds, dims, st.floats(-50, 50, allow_nan=False).filter(lambda k: abs(k) > 1e-3))
def test_norm_relations_and_scaling(seed, n, k):
    m = np.random.default_rng(seed).standard_normal((n, n))
    op, fro = norms(m)
    assert op <= fro * (1 + 1e-12) and fro <= np.sqrt(n) * op * (1 + 1e-12)
    op_k, fro_k = norms(k * m)
    assert op_k == pytest.approx(abs(k) * op, rel=1e-12)
    assert fro_k == pytest.approx(abs(k) * fro, rel=1e-12)


def test_json_round_trip():
    m = np.array([[1.0, 2.5], [-3.0, 4.0]])
    assert np.array_equal(matrix_from_json(matrix_to_json(m)), m)
    assert np.array_equal(matrix_from_json("[[1, 2.5], [-3, 4]]"), m)
    with pytest.raises(ValueError):
        matrix_from_json("[1, 2]")

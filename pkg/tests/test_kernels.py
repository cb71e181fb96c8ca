import numpy as np
import pytest

from crashclique import _pykern, kernels
from crashclique.fields import inv_mod, is_prime, smallest_prime_geq, word_bits_for

HAVE_COMPILED = kernels.BACKEND == "compiled"


def test_field_helpers():
    assert [x for x in range(2, 20) if is_prime(x)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert not is_prime(1)
    assert smallest_prime_geq(16) == 17
    assert smallest_prime_geq(17) == 17
    assert smallest_prime_geq(1024) == 1031
    assert inv_mod(3, 7) == 5
    assert word_bits_for(67) == 7


def test_vander_small():
    v = _pykern.vander(5, 4, 2)
    assert v.tolist() == [[1, 0], [1, 1], [1, 2], [1, 3]]
    v = _pykern.vander(7, 3, 3)
    assert v.tolist() == [[1, 0, 0], [1, 1, 1], [1, 2, 4]]


def test_backends_report():
    found = kernels.backends()
    assert "python" in found
    assert kernels.BACKEND in found
    for mod in found.values():
        assert all(hasattr(mod, f)
                   for f in ("encode", "interpolate", "certify_loads"))


def _random_cases(seed, count=25):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        p = int(rng.choice([5, 7, 17, 67, 257, 1031]))
        N = int(rng.integers(2, min(p, 40)))
        K = int(rng.integers(1, N + 1))
        yield p, N, K, rng


def test_python_interpolate_inverts_encode():
    for p, N, K, rng in _random_cases(1):
        vmat = _pykern.vander(p, N, K)
        msg = rng.integers(0, p, size=K)
        cw = _pykern.encode(msg, vmat, p)
        xs = rng.choice(N, size=K, replace=False).astype(np.int64)
        out = _pykern.interpolate(np.sort(xs), cw[np.sort(xs)], p)
        assert out.tolist() == msg.tolist()


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled backend not built")
def test_compiled_encode_matches_python():
    for p, N, K, rng in _random_cases(2):
        vmat = _pykern.vander(p, N, K)
        msg = rng.integers(0, p, size=K)
        assert np.array_equal(kernels.encode(msg, vmat, p),
                              _pykern.encode(msg, vmat, p))
        batch = rng.integers(0, p, size=(3, K))
        assert np.array_equal(kernels.encode(batch, vmat, p),
                              _pykern.encode(batch, vmat, p))


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled backend not built")
def test_compiled_interpolate_matches_python():
    for p, N, K, rng in _random_cases(3):
        vmat = _pykern.vander(p, N, K)
        msg = rng.integers(0, p, size=K)
        cw = _pykern.encode(msg, vmat, p)
        xs = np.sort(rng.choice(N, size=K, replace=False)).astype(np.int64)
        a = kernels.interpolate(xs, cw[xs], p)
        b = _pykern.interpolate(xs, cw[xs], p)
        assert np.array_equal(a, b)
        assert a.tolist() == msg.tolist()


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled backend not built")
def test_compiled_certify_loads_matches_python():
    rng = np.random.default_rng(4)
    member = rng.random((40, 60)) < 0.2
    subsets = np.array([np.sort(rng.choice(40, size=8, replace=False))
                        for _ in range(30)], dtype=np.int64)
    for lo, hi in ((2.0, 10.0), (0.0, 3.5)):
        a = kernels.certify_loads(member, subsets, lo, hi)
        b = _pykern.certify_loads(member, subsets, lo, hi)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_certify_loads_counts_out_of_window_nodes():
    member = np.array([[1, 1, 0], [1, 0, 1]], dtype=bool)
    subsets = np.array([[0, 1]])
    bad, mn, mx = _pykern.certify_loads(member, subsets, 1.0, 2.0)
    # loads are (2, 1, 1): none outside [1, 2]
    assert bad.tolist() == [0] and mn.tolist() == [1] and mx.tolist() == [2]
    bad, mn, mx = _pykern.certify_loads(member, subsets, 2.0, 2.0)
    assert bad.tolist() == [2]

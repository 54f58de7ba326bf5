"""Data model and exact TSC accounting."""

import numpy as np
import pytest

from sigforge import (
    CorrelationMatrix,
    SetFormatError,
    Signature,
    SignatureSet,
    correlation_matrix,
    extend_set,
    hadamard_set,
    load_set,
    quadratic_metric,
    save_set,
    tsc,
    tsc_increment,
)


def random_set(rng, k, length):
    return SignatureSet.from_rows(rng.choice([-1, 1], size=(k, length)).tolist())


class TestSignature:
    def test_accepts_only_antipodal_chips(self):
        Signature((1, -1, 1))
        for bad in [(0,), (2,), (1, 0, -1), (1.5,)]:
            with pytest.raises((ValueError, TypeError)):
                Signature(bad)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Signature(())

    def test_flip_and_negate(self):
        s = Signature((1, -1, 1))
        assert tuple(s.flipped(1)) == (1, 1, 1)
        assert tuple(-s) == (-1, 1, -1)
        assert tuple(s) == (1, -1, 1)

    def test_tokens(self):
        assert Signature((1, -1)).to_tokens() == "+1 -1"

    def test_as_array_is_int64(self):
        arr = Signature((1, -1)).as_array()
        assert arr.dtype == np.int64


class TestSignatureSet:
    def test_rejects_ragged_rows(self):
        with pytest.raises(ValueError):
            SignatureSet.from_rows([[1, 1], [1, -1, 1]])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            SignatureSet(signatures=())

    def test_shape(self):
        s = SignatureSet.from_rows([[1, 1, -1], [1, -1, 1]])
        assert s.k == 2 and s.length == 3
        assert s.matrix().shape == (2, 3)

    def test_extend_appends(self):
        s = SignatureSet.from_rows([[1, 1]])
        bigger = extend_set(s, Signature((1, -1)))
        assert bigger.k == 2
        assert tuple(bigger.signatures[-1]) == (1, -1)
        with pytest.raises(ValueError):
            extend_set(s, Signature((1, -1, 1)))


class TestTsc:
    def test_hadamard_16_meets_welch(self):
        assert tsc(hadamard_set(16)) == 16 * 16 * 16

    def test_two_identical_signatures(self):
        # Gram entries are all 2: four terms of 4 each.
        s = SignatureSet.from_rows([[1, 1], [1, 1]])
        assert tsc(s) == 16

    def test_matches_python_int_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            s = random_set(rng, int(rng.integers(1, 9)), int(rng.integers(1, 9)))
            rows = [list(sig) for sig in s.signatures]
            expected = 0
            for a in rows:
                for b in rows:
                    dot = sum(x * y for x, y in zip(a, b))
                    expected += dot * dot
            assert tsc(s) == expected

    def test_returns_plain_int(self):
        assert isinstance(tsc(hadamard_set(2)), int)


class TestCorrelationMatrix:
    def test_diagonal_counts_signatures(self):
        rng = np.random.default_rng(3)
        s = random_set(rng, 7, 5)
        m = correlation_matrix(s)
        assert m.dim == 5 and m.k == 7
        assert np.all(np.diag(m.entries) == 7)
        assert np.array_equal(m.entries, m.entries.T)

    def test_equals_sum_of_outer_products(self):
        rng = np.random.default_rng(4)
        s = random_set(rng, 6, 4)
        total = np.zeros((4, 4), dtype=np.int64)
        for sig in s.signatures:
            v = sig.as_array()
            total += np.outer(v, v)
        assert np.array_equal(correlation_matrix(s).entries, total)

    def test_validation(self):
        with pytest.raises(ValueError):
            CorrelationMatrix(entries=np.array([[1, 2], [3, 1]]))  # not symmetric
        with pytest.raises(ValueError):
            CorrelationMatrix(entries=np.array([[1, 0], [0, 2]]))  # diag not constant

    def test_entries_read_only(self):
        m = correlation_matrix(hadamard_set(4))
        with pytest.raises(ValueError):
            m.entries[0, 0] = 99


class TestQuadraticMetric:
    def test_identity_kernel(self):
        m = correlation_matrix(hadamard_set(4))  # 4I
        assert quadratic_metric(m, Signature((1, -1, 1, -1))) == 16

    def test_dimension_mismatch(self):
        m = correlation_matrix(hadamard_set(4))
        with pytest.raises(ValueError):
            quadratic_metric(m, Signature((1, -1)))

    def test_sign_symmetry(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            s = random_set(rng, 6, 5)
            m = correlation_matrix(s)
            sig = Signature(tuple(rng.choice([-1, 1], size=5).tolist()))
            assert quadratic_metric(m, sig) == quadratic_metric(m, -sig)


class TestTscRecursion:
    def test_increment_matches_recount(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            length = int(rng.integers(1, 10))
            k = int(rng.integers(1, 12))
            s = random_set(rng, k, length)
            extra = Signature(tuple(rng.choice([-1, 1], size=length).tolist()))
            metric = quadratic_metric(correlation_matrix(s), extra)
            assert tsc(extend_set(s, extra)) == tsc_increment(tsc(s), metric, length)

    def test_rejects_negative_metric(self):
        with pytest.raises(ValueError):
            tsc_increment(10, -1, 4)


class TestHadamard:
    def test_orthogonal_columns(self):
        for length in (1, 2, 4, 8, 16, 32):
            h = hadamard_set(length)
            gram = h.matrix() @ h.matrix().T
            assert np.array_equal(gram, length * np.eye(length, dtype=np.int64))

    def test_rejects_non_power_of_two(self):
        for bad in (0, 3, 6, 12, -4):
            with pytest.raises(ValueError):
                hadamard_set(bad)


class TestSetFiles:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(8)
        s = random_set(rng, 9, 6)
        path = tmp_path / "set.txt"
        save_set(s, path)
        assert load_set(path) == s

    def test_comments_and_blanks_skipped(self, tmp_path):
        path = tmp_path / "set.txt"
        path.write_text("# a comment\n\n2 2\n+1 +1\n\n+1 -1\n")
        loaded = load_set(path)
        assert loaded.k == 2 and loaded.length == 2

    @pytest.mark.parametrize(
        "text",
        [
            "x 2\n+1 +1\n",          # bad header
            "2 2\n+1 +1\n+1\n",      # ragged row
            "2 2\n+1 +1\n",          # too few rows
            "1 2\n+1 +1\n+1 -1\n",   # too many rows
            "1 2\n+1 0\n",           # bad alphabet
            "1 2\n1 -1\n",           # tokens must be signed
            "",                       # empty file
        ],
    )
    def test_malformed_files_never_load(self, tmp_path, text):
        path = tmp_path / "bad.txt"
        path.write_text(text)
        with pytest.raises(SetFormatError):
            load_set(path)

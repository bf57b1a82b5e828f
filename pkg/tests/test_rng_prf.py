import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from allomark import kernels
from allomark.prf import (
    color_of,
    color_of_rank,
    hash_context,
    permute_vocab,
    sample_position,
    secret_vector,
    token_rank,
)
from allomark.rng import MASK64, Xoshiro256StarStar, mix64, splitmix64

KEY = 0x243F6A8885A308D3


class TestSplitMix:
    def test_published_reference_sequence(self):
        # SplitMix64 from state 0: first three outputs of the reference
        # implementation (Steele et al. / Vigna).
        state = 0
        outs = []
        for _ in range(3):
            out, state = splitmix64(state)
            outs.append(out)
        assert outs == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]

    def test_mix64_is_first_output(self):
        assert mix64(0) == 0xE220A8397B1DCDAF
        assert mix64(MASK64) == splitmix64(MASK64)[0]


class TestHashContext:
    def test_deterministic(self):
        assert hash_context([3, 5], KEY) == hash_context([3, 5], KEY)

    def test_additive_window_is_order_invariant(self):
        assert hash_context([3, 5], KEY) == hash_context([5, 3], KEY)

    def test_key_changes_seed(self):
        assert hash_context([3, 5], KEY) != hash_context([3, 5], KEY + 1)

    def test_empty_context_rejected(self):
        with pytest.raises(ValueError):
            hash_context([], KEY)

    def test_sum_wraps_modulo_2_64(self):
        assert hash_context([MASK64, 1], KEY) == hash_context([0], KEY)


class TestSamplePosition:
    def test_singleton_support(self):
        for seed in (0, 1, 99999):
            assert sample_position(seed, 1) == 0

    def test_deterministic(self):
        assert sample_position(1234, 4) == sample_position(1234, 4)

    def test_zero_length_rejected(self):
        with pytest.raises(ValueError):
            sample_position(1, 0)

    def test_uniform_over_positions_chi_square(self):
        # 1e5 seeds over 4 positions: each frequency within 4 sigma of 1/4
        n, btilde = 100_000, 4
        counts = np.zeros(btilde, dtype=np.int64)
        for seed in range(n):
            counts[sample_position(mix64(seed), btilde)] += 1
        p = 1.0 / btilde
        sigma = np.sqrt(p * (1 - p) / n)
        assert np.all(np.abs(counts / n - p) < 4 * sigma)


class TestPermuteVocab:
    def test_single_element(self):
        assert list(permute_vocab(7, 1)) == [0]

    def test_bijection(self):
        for seed in (0, 1, 2**63):
            perm = permute_vocab(seed, 257)
            assert sorted(perm.tolist()) == list(range(257))

    def test_distinct_seeds_differ(self):
        collisions = 0
        for s in range(200):
            a = permute_vocab(mix64(s), 1024)
            b = permute_vocab(mix64(s + 10_000), 1024)
            collisions += int(np.array_equal(a, b))
        assert collisions == 0

    @given(st.integers(0, MASK64), st.integers(1, 200))
    @settings(max_examples=60, deadline=None)
    def test_bijection_property(self, seed, n):
        perm = permute_vocab(seed, n)
        assert sorted(perm.tolist()) == list(range(n))

    def test_kernel_matches_pure_python(self):
        for seed in (0, 1, 42, MASK64):
            fast = kernels.permutation(seed, 301)
            ref = kernels._perm_py(seed, 301)
            assert np.array_equal(fast, ref)

    def test_rank_kernel_matches_permutation_index(self):
        for seed in (3, 99):
            perm = permute_vocab(seed, 128)
            for token in (0, 17, 127):
                assert perm[token_rank(seed, 128, token)] != -1
                assert token_rank(seed, 128, token) == int(
                    np.nonzero(perm == token)[0][0]
                )

    def test_uniforms_kernel_matches_pure_python(self):
        fast = kernels.uniforms(77, 50)
        ref = kernels._uniforms_py(77, 50)
        assert np.array_equal(fast, ref)
        assert np.all((fast > 0.0) & (fast < 1.0))


class TestColorOf:
    def test_first_block_identity_permutation(self):
        perm = np.arange(8)
        assert color_of(0, perm, 0.25, 4) == 0

    def test_last_block_no_remainder(self):
        perm = np.arange(8)
        assert color_of(7, perm, 0.25, 4) == 3

    def test_remainder_token_is_none(self):
        perm = np.arange(10)  # k = floor(0.25*10) = 2, colored region = 8
        assert color_of(9, perm, 0.25, 4) is None

    def test_partition_sizes_equal(self):
        gamma, radix, vocab = 0.25, 4, 1024
        perm = permute_vocab(123, vocab)
        k = int(gamma * vocab)
        sizes = np.zeros(radix, dtype=int)
        for token in range(vocab):
            c = color_of(token, perm, gamma, radix)
            assert c is not None  # 1024 divides evenly, no remainder
            sizes[c] += 1
        assert np.all(sizes == k)

    def test_remainder_count(self):
        gamma, radix, vocab = 0.25, 4, 1030
        perm = permute_vocab(5, vocab)
        remainder = sum(
            color_of(t, perm, gamma, radix) is None for t in range(vocab)
        )
        assert remainder == vocab - radix * int(gamma * vocab)

    def test_color_of_rank_grid(self):
        assert color_of_rank(0, 2, 4) == 0
        assert color_of_rank(7, 2, 4) == 3
        assert color_of_rank(8, 2, 4) is None

    def test_key_change_recolors_most_tokens(self):
        # fraction of tokens whose color changes under an independent key
        # is about 1 - gamma (here gamma=0.25 with no remainder)
        gamma, radix, vocab = 0.25, 4, 1024
        k = int(gamma * vocab)
        diffs = []
        for trial in range(60):
            seed_a = hash_context([trial], KEY)
            seed_b = hash_context([trial], KEY ^ 0x1234567)
            inv_a = np.empty(vocab, dtype=int)
            inv_b = np.empty(vocab, dtype=int)
            inv_a[permute_vocab(seed_a, vocab)] = np.arange(vocab)
            inv_b[permute_vocab(seed_b, vocab)] = np.arange(vocab)
            diffs.append(np.mean(inv_a // k != inv_b // k))
        mean = np.mean(diffs)
        sigma = np.std(diffs) / np.sqrt(len(diffs))
        assert abs(mean - (1 - gamma)) < 4 * sigma + 1e-3


class TestSecretVector:
    def test_strictly_inside_unit_interval(self):
        vec = secret_vector(9, 4096)
        assert np.all(vec > 0.0) and np.all(vec < 1.0)

    def test_deterministic_and_seed_sensitive(self):
        assert np.array_equal(secret_vector(5, 64), secret_vector(5, 64))
        assert not np.array_equal(secret_vector(5, 64), secret_vector(6, 64))


class TestStreamIndependence:
    def test_position_stream_does_not_perturb_permutation(self):
        # same seed, different effective lengths: permutation unchanged
        seed = hash_context([11], KEY)
        perm = permute_vocab(seed, 64)
        for btilde in (1, 2, 7, 16):
            sample_position(seed, btilde)
            assert np.array_equal(permute_vocab(seed, 64), perm)

    def test_xoshiro_streams_differ_by_tag(self):
        a = Xoshiro256StarStar(mix64(1 ^ 0x11))
        b = Xoshiro256StarStar(mix64(1 ^ 0x22))
        assert [a.next_u64() for _ in range(4)] != [b.next_u64() for _ in range(4)]

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from allomark.messages import (
    Message,
    MessageOverflowError,
    bit_accuracy,
    from_radix,
    to_radix,
)


class TestToRadix:
    def test_radix_two_is_identity(self):
        assert to_radix("1010", 2) == (1, 0, 1, 0)

    def test_base_four_conversion(self):
        # 0b10110010 = 178 = 2*64 + 3*16 + 0*4 + 2
        assert to_radix("10110010", 4) == (2, 3, 0, 2)

    def test_odd_width_pads_to_effective_length(self):
        # ceil(3 / log2 4) = 2 digits; 0b101 = 5 = 1*4 + 1
        assert to_radix("101", 4) == (1, 1)

    def test_leading_zero_digits_retained(self):
        assert to_radix("00000001", 4) == (0, 0, 0, 1)

    def test_rejects_bad_radix_and_empty(self):
        with pytest.raises(ValueError):
            to_radix("101", 1)
        with pytest.raises(ValueError):
            to_radix("", 4)
        with pytest.raises(ValueError):
            to_radix("10a", 4)


class TestFromRadix:
    def test_inverse_of_example(self):
        assert from_radix([2, 3, 0, 2], 4, 8) == "10110010"

    def test_zero_pads(self):
        assert from_radix([0, 0], 4, 3) == "000"

    def test_overflow_raises(self):
        # value 3*4 + 3 = 15 >= 2^3
        with pytest.raises(MessageOverflowError):
            from_radix([3, 3], 4, 3)

    def test_digit_out_of_range(self):
        with pytest.raises(ValueError):
            from_radix([4, 0], 4, 8)


def test_exhaustive_round_trip_small_widths():
    for radix in (2, 4, 8):
        for width in range(1, 13):
            for value in range(1 << width):
                bits = format(value, f"0{width}b")
                assert from_radix(to_radix(bits, radix), radix, width) == bits


@given(st.integers(min_value=1, max_value=24), st.sampled_from([2, 3, 4, 5, 8]),
       st.data())
@settings(max_examples=150, deadline=None)
def test_round_trip_property(width, radix, data):
    value = data.draw(st.integers(min_value=0, max_value=(1 << width) - 1))
    bits = format(value, f"0{width}b")
    digits = to_radix(bits, radix)
    assert all(0 <= d < radix for d in digits)
    assert from_radix(digits, radix, width) == bits


def test_to_radix_output_length_matches_effective_length():
    from allomark.config import effective_length

    for width in range(1, 17):
        for radix in (2, 3, 4, 8):
            assert len(to_radix("1" * width, radix)) == effective_length(width, radix)


class TestBitAccuracy:
    def test_identity(self):
        assert bit_accuracy("1010", "1010") == 1.0

    def test_complement(self):
        assert bit_accuracy("1111", "0000") == 0.0

    def test_partial(self):
        assert bit_accuracy("10110010", "10110001") == 0.75

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            bit_accuracy("101", "1010")

    @given(st.integers(1, 32), st.data())
    @settings(max_examples=100, deadline=None)
    def test_symmetric_and_hamming(self, width, data):
        a = format(data.draw(st.integers(0, (1 << width) - 1)), f"0{width}b")
        b = format(data.draw(st.integers(0, (1 << width) - 1)), f"0{width}b")
        hamming = sum(x != y for x, y in zip(a, b))
        assert bit_accuracy(a, b) == bit_accuracy(b, a)
        assert bit_accuracy(a, b) == pytest.approx(1.0 - hamming / width)


class TestMessage:
    def test_from_bits_round_trips(self):
        m = Message.from_bits("10110010", 4)
        assert m.digits == (2, 3, 0, 2)
        assert m.value == 178
        assert m.bit_width == 8

    def test_inconsistent_digits_rejected(self):
        with pytest.raises(ValueError):
            Message(bits="1010", digits=(0, 0, 0, 0), radix=2)

    def test_random_has_requested_width(self):
        import numpy as np

        rng = np.random.Generator(np.random.Philox(key=1))
        m = Message.random(16, 4, rng)
        assert m.bit_width == 16 and len(m.digits) == 8

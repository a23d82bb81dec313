"""Seeded randomness for rule construction.

Everything random in this package flows through two fixed functions:

``mix64``
    The SplitMix64 finalizer, a bijection on 64-bit words::

        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9   (mod 2**64)
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB   (mod 2**64)
        z =  z ^ (z >> 31)

``SplitMix64``
    The stream generator. The state advances by the golden gamma
    ``0x9E3779B97F4A7C15`` (mod 2**64) and each output is ``mix64(state)``.
    A draw from ``{0, ..., n-1}`` consumes one 64-bit word ``x`` and returns
    ``(x * n) >> 64``.

Per-trial stream seeds come from :func:`derive_seed`::

    key  = (black_rule << 56) | (grey_rule << 48) | sample_index
    seed = mix64(mix64(master_seed) ^ key)

For a fixed master seed the map from ``key`` to ``seed`` is a bijection, so
seeds never collide for rule numbers below 256 and sample indices below
2**48. These constants are part of the output format; changing any of them
changes every tournament result.
"""

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MAX_SAMPLE_INDEX = (1 << 48) - 1


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """SplitMix64 stream. Not thread-safe; give each trial its own stream."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def randbelow(self, n: int) -> int:
        return (self.next_u64() * n) >> 64


def derive_seed(master_seed: int, black_rule: int, grey_rule: int, sample_index: int) -> int:
    """Stream seed for one (black rule, grey rule, sample) cell of an experiment."""
    if not 0 <= black_rule <= 255 or not 0 <= grey_rule <= 255:
        raise ValueError("rule numbers must be in [0, 255]")
    if not 0 <= sample_index <= MAX_SAMPLE_INDEX:
        raise ValueError(f"sample_index must be in [0, {MAX_SAMPLE_INDEX}]")
    key = (black_rule << 56) | (grey_rule << 48) | sample_index
    return mix64(mix64(master_seed) ^ key)

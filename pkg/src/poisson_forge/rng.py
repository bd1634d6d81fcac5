"""Counter-based deterministic RNG (SplitMix64).

Seeds are 64-bit values and produce identical streams on every platform;
campaign code derives one independent stream per sample via `substream`.
Reference: Steele, Lea, Flood, "Fast splittable pseudorandom number
generators" (the standard splitmix64 finalizer).
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z):
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & _MASK

    def next_u64(self):
        self.state = (self.state + _GOLDEN) & _MASK
        return _mix(self.state)

    def uniform(self, lo=0.0, hi=1.0):
        return lo + (hi - lo) * (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def normalish(self):
        """Sum-of-uniforms bell curve; good enough for sampling seeds."""
        return sum(self.uniform(-1.0, 1.0) for _ in range(4)) * 0.5

    def integer(self, lo, hi):
        """Uniform integer in [lo, hi]."""
        return lo + self.next_u64() % (hi - lo + 1)


def substream(seed, index):
    """Independent deterministic stream for sample `index` of a campaign."""
    return SplitMix64(_mix((seed ^ _mix(index & _MASK)) & _MASK))

"""SplitMix64: the single PRNG behind folds and synthetic data.

The generator is tiny and fully specified so other implementations can
reproduce our streams bit for bit:

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

(all arithmetic mod 2**64).  Derived draws:

* ``uniform()``  -> ``(next() >> 11) * 2**-53``, in [0, 1)
* ``below(n)``   -> rejection sampling on ``next() % n`` with threshold
  ``2**64 mod n`` (unbiased)
* ``shuffle(xs)`` -> Fisher-Yates from the end, ``j = below(i + 1)``
* ``gauss()``    -> Box-Muller, ``u1 = 1 - uniform()``, ``u2 = uniform()``,
  returns ``sqrt(-2 ln u1) * cos(2 pi u2)``; the sine half is discarded so
  every normal costs exactly two raw draws.
"""

from __future__ import annotations

import math

ALGORITHM = "splitmix64/v1"

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        threshold = (1 << 64) % n
        while True:
            r = self.next_u64()
            if r >= threshold:
                return r % n

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def gauss(self) -> float:
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

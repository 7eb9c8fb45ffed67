"""Independent reference values for the C++ unit tests.

MT19937-64 is re-implemented from its published recurrence; the bounded-int,
shuffle and Sobol values are produced without touching the C++ code.
"""
import numpy as np
from scipy.stats import qmc

MASK = (1 << 64) - 1


class MT64:
    def __init__(self, seed):
        self.mt = [0] * 312
        self.mt[0] = seed & MASK
        for i in range(1, 312):
            self.mt[i] = (6364136223846793005 * (self.mt[i - 1] ^ (self.mt[i - 1] >> 62)) + i) & MASK
        self.idx = 312

    def _twist(self):
        upper, lower = 0xFFFFFFFF80000000, 0x7FFFFFFF
        for i in range(312):
            x = (self.mt[i] & upper) | (self.mt[(i + 1) % 312] & lower)
            xa = x >> 1
            if x & 1:
                xa ^= 0xB5026F5AA96619E9
            self.mt[i] = self.mt[(i + 156) % 312] ^ xa
        self.idx = 0

    def next(self):
        if self.idx >= 312:
            self._twist()
        y = self.mt[self.idx]
        self.idx += 1
        y ^= (y >> 29) & 0x5555555555555555
        y ^= (y << 17) & 0x71D67FFFEDA60000
        y ^= (y << 37) & 0xFFF7EEE000000000
        y ^= y >> 43
        return y & MASK

    def bounded(self, n):
        m = self.next() * n
        low = m & MASK
        if low < n:
            t = ((1 << 64) - n) % n
            while low < t:
                m = self.next() * n
                low = m & MASK
        return m >> 64


def shuffled(seed, n):
    g = MT64(seed)
    v = list(range(n))
    for i in range(n, 1, -1):
        j = g.bounded(i)
        v[i - 1], v[j] = v[j], v[i - 1]
    return v


g = MT64(5489)
for _ in range(9999):
    g.next()
print("mt64 default seed, 10000th output:", g.next())
g = MT64(0)
print("mt64 seed 0 first three:", [g.next() for _ in range(3)])
print("random_init seed 0, M=8:", shuffled(0, 8))
print("random_init seed 42, M=16:", shuffled(42, 16))
g = MT64(123)
print("uniform_index(10) seed 123 x8:", [g.bounded(10) for _ in range(8)])

pts = qmc.Sobol(d=5, scramble=False).random(16)
np.set_printoptions(precision=17)
print("sobol d=5 first 16 points:")
for p in pts:
    print("{" + ", ".join(repr(float(x)) for x in p) + "},")

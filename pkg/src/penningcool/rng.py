"""Deterministic random number generation shared by all stochastic code.

A splitmix64 stream underlies every sampler so that the compiled kernel and
the pure-Python fallback consume identical random sequences and produce
bit-identical trajectories for a given seed.  Per-trajectory stream seeds are
derived from (master seed, index...) with the same mixing function.
"""

import math

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(z):
    """splitmix64 output function: avalanche a 64-bit value."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(master, *indices):
    """Derive an independent stream seed from a master seed and indices.

    Used to give every (sweep value, replica) pair its own stream while
    keeping the whole sweep reproducible from one master seed.
    """
    h = mix64(master ^ _GAMMA)
    for ix in indices:
        h = mix64(h + _GAMMA * (ix + 1))
    return h


class SplitMix64:
    """Minimal deterministic RNG with the samplers the simulation needs."""

    def __init__(self, seed):
        self._s = int(seed) & _MASK

    def next_u64(self):
        self._s = (self._s + _GAMMA) & _MASK
        return mix64(self._s)

    def uniform(self):
        """Uniform double in (0, 1]."""
        return ((self.next_u64() >> 11) + 1) * 2.0 ** -53

    def poisson(self, mean):
        """Poisson sample via Knuth's product-of-uniforms method.

        Intended for the small means (rate*dt << 1) of the photon counter;
        cost grows linearly with the mean.
        """
        if mean <= 0.0:
            return 0
        limit = math.exp(-mean)
        k = 0
        p = 1.0
        while True:
            p *= self.uniform()
            if p <= limit:
                return k
            k += 1

    def normal_triple(self):
        """Three independent standard normals (Box-Muller, fourth discarded)."""
        u1 = self.uniform()
        u2 = self.uniform()
        r1 = math.sqrt(-2.0 * math.log(u1))
        g1 = r1 * math.cos(2.0 * math.pi * u2)
        g2 = r1 * math.sin(2.0 * math.pi * u2)
        u3 = self.uniform()
        u4 = self.uniform()
        r2 = math.sqrt(-2.0 * math.log(u3))
        g3 = r2 * math.cos(2.0 * math.pi * u4)
        return g1, g2, g3

    def unit_sphere(self):
        """Uniform unit vector on the sphere (normalized Gaussian triple)."""
        while True:
            g1, g2, g3 = self.normal_triple()
            norm = math.sqrt(g1 * g1 + g2 * g2 + g3 * g3)
            if norm > 0.0:
                return g1 / norm, g2 / norm, g3 / norm

"""Seedable random data generation.

All experiment data comes from a PCG64 stream feeding a Box-Muller
transform, so a (seed, shape) pair reproduces bit-identical arrays on any
platform with IEEE doubles.
"""
import numpy as np


def generator(seed):
    """Return the package-wide PRNG (PCG64) for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(seed))


def standard_normals(gen, size):
    """Draw `size` N(0,1) samples via the Box-Muller transform.

    Consumes 2*ceil(size/2) uniforms from `gen`; the first half of the
    output uses the cosine branch, the second half the sine branch.
    """
    m = (int(size) + 1) // 2
    u1 = 1.0 - gen.random(m)  # (0, 1], keeps log() finite
    u2 = gen.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
    return z[: int(size)]


def normal_matrix(gen, n, d):
    """An n-by-d matrix of i.i.d. standard normals, row-major fill."""
    return standard_normals(gen, n * d).reshape(n, d)

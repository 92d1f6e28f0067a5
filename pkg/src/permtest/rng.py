"""Seeded randomness: seed mixing, a counter-mode uniform stream, and an
alias sampler.

All randomness flows through 64-bit integer seeds.  Derived seeds come
from splitmix64 mixing, so independent streams for (grid point, trial,
side) tuples are reproducible regardless of execution order.

Bulk categorical sampling uses a keyed counter-mode generator (two
splitmix64 rounds with the seed injected between them).  It is stateless,
so draw k of a given seed is the same number no matter how the work is
chunked, and the vectorized numpy path and the optional numba kernel
produce bitwise-identical streams.  Structural randomness (shuffles,
multinomials, random pairs) uses numpy's PCG64 seeded the same way.
"""

from __future__ import annotations

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - environment dependent
    _HAVE_NUMBA = False

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = float(2.0**-53)


def splitmix64(x: int) -> int:
    """One splitmix64 step: add the golden gamma, then finalize."""
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, *path: int) -> int:
    """Mix a master seed with a tuple of stream indices.

    Fixed function of its inputs; changing any path component yields an
    unrelated stream.
    """
    s = master_seed & _MASK64
    for part in path:
        s = splitmix64(s ^ (part & _MASK64))
    return splitmix64(s)


def generator(seed: int) -> np.random.Generator:
    """RNG for structural randomness: PCG64 seeded with a 64-bit int."""
    return np.random.Generator(np.random.PCG64(seed & _MASK64))


def _mix_vec(x: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer on a uint64 array (wrapping mul)."""
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
    return x ^ (x >> np.uint64(31))


def uniform_stream(seed: int, start: int, count: int) -> np.ndarray:
    """Uniforms u_j in [0, 1) for counters start..start+count-1.

    u_j = finalize(finalize(j) xor key) scaled to the 53-bit grid, with
    key = splitmix64(seed); a keyed permutation of counter space, so
    distinct seeds give unrelated streams.
    """
    key = np.uint64(splitmix64(seed))
    ctr = np.arange(start, start + count, dtype=np.uint64)
    z = _mix_vec(_mix_vec(ctr * np.uint64(_GOLDEN)) ^ key)
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


if _HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _fold_counts_kernel(key, start, m, accept, alias, fold, counts, n):
        g = numba.uint64(0x9E3779B97F4A7C15)
        m1 = numba.uint64(0xBF58476D1CE4E5B9)
        m2 = numba.uint64(0x94D049BB133111EB)
        inv53 = 2.0**-53
        for t in range(m):
            c = numba.uint64(start + 2 * t)
            x = c * g
            x = (x ^ (x >> numba.uint64(30))) * m1
            x = (x ^ (x >> numba.uint64(27))) * m2
            x = (x ^ (x >> numba.uint64(31))) ^ key
            x = (x ^ (x >> numba.uint64(30))) * m1
            x = (x ^ (x >> numba.uint64(27))) * m2
            x = x ^ (x >> numba.uint64(31))
            u1 = np.float64(x >> numba.uint64(11)) * inv53
            c2 = c + numba.uint64(1)
            y = c2 * g
            y = (y ^ (y >> numba.uint64(30))) * m1
            y = (y ^ (y >> numba.uint64(27))) * m2
            y = (y ^ (y >> numba.uint64(31))) ^ key
            y = (y ^ (y >> numba.uint64(30))) * m1
            y = (y ^ (y >> numba.uint64(27))) * m2
            y = y ^ (y >> numba.uint64(31))
            u2 = np.float64(y >> numba.uint64(11)) * inv53
            idx = np.int64(u1 * n)
            if u2 < accept[idx]:
                counts[fold[idx]] += 1
            else:
                counts[fold[alias[idx]]] += 1


class AliasSampler:
    """Walker alias table: O(n) setup, O(1) per draw, vectorized draws.

    Draw t consumes counters 2t and 2t+1 of the seed's uniform stream,
    one for the table cell and one for accept/reject, so results do not
    depend on chunking.
    """

    def __init__(self, probs: np.ndarray):
        probs = np.asarray(probs, dtype=np.float64)
        n = probs.size
        scaled = probs * (n / probs.sum())
        accept = np.ones(n, dtype=np.float64)
        alias = np.arange(n, dtype=np.int64)
        small = [int(i) for i in np.flatnonzero(scaled < 1.0)]
        large = [int(i) for i in np.flatnonzero(scaled >= 1.0)]
        while small and large:
            s = small.pop()
            g = large.pop()
            accept[s] = scaled[s]
            alias[s] = g
            scaled[g] -= 1.0 - scaled[s]
            (small if scaled[g] < 1.0 else large).append(g)
        # Leftovers are 1.0 up to rounding; they self-alias.
        self.n = n
        self._accept = accept
        self._alias = alias

    def _draw_chunk(self, seed: int, start: int, m: int) -> np.ndarray:
        u = uniform_stream(seed, start, 2 * m)
        idx = (u[0::2] * self.n).astype(np.int64)
        keep = u[1::2] < self._accept[idx]
        out = idx.copy()
        miss = ~keep
        out[miss] = self._alias[idx[miss]]
        return out

    def draw(self, m: int, seed: int) -> np.ndarray:
        """Return m i.i.d. category indices for this seed."""
        if m == 0:
            return np.empty(0, dtype=np.int64)
        return self._draw_chunk(seed, 0, int(m))

    def draw_folded_counts(
        self,
        m: int,
        seed: int,
        fold: np.ndarray | None = None,
        num_bins: int | None = None,
        chunk: int = 1 << 22,
    ) -> np.ndarray:
        """Histogram fold[draw] over num_bins bins without storing draws.

        fold maps each category to a bin (identity when omitted); lets the
        sample size run far past available memory.
        """
        if fold is None:
            fold = np.arange(self.n, dtype=np.int64)
            num_bins = self.n
        fold = np.ascontiguousarray(fold, dtype=np.int64)
        counts = np.zeros(num_bins, dtype=np.int64)
        if _HAVE_NUMBA:
            key = np.uint64(splitmix64(seed))
            _fold_counts_kernel(
                key, 0, int(m), self._accept, self._alias, fold, counts, self.n
            )
            return counts
        done = 0
        left = int(m)
        while left > 0:
            step = min(left, chunk)
            d = self._draw_chunk(seed, 2 * done, step)
            counts += np.bincount(fold[d], minlength=num_bins)
            done += step
            left -= step
        return counts

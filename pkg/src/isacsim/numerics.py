"""Complex-matrix primitives shared by the whole package.

Everything here is double precision. Matrices are plain ``np.ndarray`` with
``complex128`` entries; vectorization is column-major throughout, and the
real-valued packing used for network inputs/targets is the [Re; Im] block
layout.  Random draws go through :class:`RngStream`, a splittable wrapper
around numpy's counter-based Philox generator, so that every sample / frame /
initialization in the pipeline owns an independent, reproducible substream.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "RngStream",
    "dft_matrix",
    "pinv_square",
    "vec",
    "unvec",
    "pack_complex",
    "unpack_complex",
    "fro_norm_sq",
    "randn_complex",
    "db_to_linear",
    "linear_to_db",
]


class RngStream:
    """Seeded, splittable random stream.

    A stream is identified by ``(seed, path)`` where ``path`` is a tuple of
    non-negative integers.  Identical identifiers reproduce the identical
    draw sequence; distinct paths give statistically independent sequences
    (numpy ``SeedSequence`` keying of the Philox counter generator).

    Streams are single-owner: never share one across concurrent tasks.
    Derive children instead, e.g. ``root.child(2, k, v)``.
    """

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)
        for p in self.path:
            if not 0 <= p < 2**32:
                raise ValueError(f"stream path ids must be uint32, got {p}")
        self._gen: np.random.Generator | None = None

    def child(self, *ids: int) -> "RngStream":
        """Derive an independent sub-stream by extending the path."""
        return RngStream(self.seed, self.path + tuple(ids))

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
            self._gen = np.random.Generator(np.random.Philox(ss))
        return self._gen

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(seed={self.seed}, path={self.path})"


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    return rng


def dft_matrix(n: int, normalized: bool = True) -> np.ndarray:
    r"""DFT matrix with entry (r, q) = e^{j 2\pi r q / n}, 0-based indices.

    ``normalized`` scales by 1/sqrt(n), making the matrix unitary; the
    unnormalized variant has unit-modulus entries and F F^H = n I.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    idx = np.arange(n)
    F = np.exp(2j * np.pi * np.outer(idx, idx) / n)
    if normalized:
        F /= np.sqrt(n)
    return F


def pinv_square(X: np.ndarray) -> np.ndarray:
    r"""Right pseudoinverse X^H (X X^H)^{-1} of a square full-rank matrix.

    Solved by Gaussian elimination on the Hermitian Gram matrix rather than
    SVD; every use in this package is a small, well-conditioned DFT-derived
    matrix.  Raises ``np.linalg.LinAlgError`` when X X^H is numerically
    singular (condition number above 1e12).
    """
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError("pinv_square expects a square matrix")
    gram = X @ X.conj().T
    if np.linalg.cond(gram) >= 1e12:
        raise np.linalg.LinAlgError("X X^H is numerically singular")
    # X^H G^{-1} = (G^{-1} X)^H for Hermitian G
    return np.linalg.solve(gram, X).conj().T


def vec(M: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization: [[a,b],[c,d]] -> [a,c,b,d]."""
    return np.asarray(M).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec` given the matrix shape."""
    v = np.asarray(v)
    if v.size != rows * cols:
        raise ValueError(f"cannot unvec length {v.size} into {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def pack_complex(v: np.ndarray) -> np.ndarray:
    """Complex vector -> real vector [Re(v); Im(v)] (float64)."""
    v = np.asarray(v).reshape(-1)
    return np.concatenate([v.real.astype(np.float64), v.imag.astype(np.float64)])


def unpack_complex(x: np.ndarray) -> np.ndarray:
    """Inverse of :func:`pack_complex`; input length must be even."""
    x = np.asarray(x).reshape(-1)
    if x.size % 2:
        raise ValueError("packed real vector must have even length")
    h = x.size // 2
    return x[:h] + 1j * x[h:]


def fro_norm_sq(M: np.ndarray) -> float:
    """Sum of squared entry magnitudes, correctly rounded.

    Uses ``math.fsum`` so the result is independent of summation order;
    in particular fro_norm_sq(vec(M)) == fro_norm_sq(M) exactly.
    """
    M = np.asarray(M)
    if np.iscomplexobj(M):
        parts = np.concatenate([M.real.reshape(-1), M.imag.reshape(-1)])
    else:
        parts = M.reshape(-1).astype(np.float64)
    return math.fsum((parts * parts).tolist())


def randn_complex(rows: int, cols: int, variance: float, rng) -> np.ndarray:
    r"""i.i.d. CN(0, variance) matrix: Re and Im each N(0, variance/2)."""
    if variance < 0:
        raise ValueError("variance must be >= 0")
    if variance == 0.0:
        return np.zeros((rows, cols), dtype=complex)
    g = _as_generator(rng)
    s = np.sqrt(variance / 2.0)
    return s * (g.standard_normal((rows, cols)) + 1j * g.standard_normal((rows, cols)))


def db_to_linear(x_db: float) -> float:
    """10^(x_db/10); saturates instead of overflowing for absurd inputs."""
    e = float(x_db) / 10.0
    if e > 308.0:
        return math.inf
    if e < -323.0:
        return 0.0
    return 10.0**e


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError("linear value must be positive")
    return 10.0 * math.log10(x)

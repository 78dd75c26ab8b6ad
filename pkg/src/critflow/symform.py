"""Symmetric bilinear forms and the k-trace (sum of the k smallest eigenvalues)."""

from __future__ import annotations

import numpy as np

ORTHO_TOL = 1e-9


class SymBilinearForm:
    """A real symmetric form on R^dim, stored as an explicitly symmetrized matrix."""

    __slots__ = ("_entries", "_eig")

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("form has non-finite entries")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        self._entries = a
        self._eig = None

    @classmethod
    def diag(cls, values) -> "SymBilinearForm":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    def __add__(self, other: "SymBilinearForm") -> "SymBilinearForm":
        return SymBilinearForm(self._entries + other._entries)

    def __call__(self, u, v) -> float:
        return float(np.asarray(u) @ self._entries @ np.asarray(v))

    def __repr__(self) -> str:
        return f"SymBilinearForm(dim={self.dim})"

    def eigh(self):
        if self._eig is None:
            self._eig = np.linalg.eigh(self._entries)
        return self._eig


def eigenvalues_ascending(A: SymBilinearForm) -> np.ndarray:
    return A.eigh()[0].copy()


def k_trace(A: SymBilinearForm, k: int) -> float:
    """Sum of the k smallest eigenvalues of ``A``.

    Equivalently the infimum of ``trace(A|_V)`` over k-dimensional subspaces V.
    """
    k = int(k)
    if not 1 <= k <= A.dim:
        raise ValueError(f"k={k} outside [1, {A.dim}]")
    return float(np.sum(A.eigh()[0][:k]))


def trace_profile(A: SymBilinearForm) -> np.ndarray:
    """All k-traces at once: entry k-1 is ``k_trace(A, k)``."""
    return np.cumsum(A.eigh()[0])


def trace_on_subspace(A: SymBilinearForm, V) -> float:
    """Trace of A restricted to the span of the orthonormal rows of ``V``."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if V.shape[1] != A.dim:
        raise ValueError(f"frame vectors have length {V.shape[1]}, form has dim {A.dim}")
    gram = V @ V.T
    if not np.allclose(gram, np.eye(V.shape[0]), atol=ORTHO_TOL, rtol=0):
        raise ValueError("frame is not orthonormal")
    return float(np.einsum("ij,jk,ik->", V, A.entries, V))


def lowest_eigenframe(A: SymBilinearForm, k: int) -> np.ndarray:
    """Rows are the eigenvectors of the k smallest eigenvalues."""
    if not 1 <= k <= A.dim:
        raise ValueError(f"k={k} outside [1, {A.dim}]")
    return A.eigh()[1][:, :k].T.copy()


def random_orthonormal_frame(dim: int, k: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, k)))
    return (q * np.sign(np.diag(r))).T

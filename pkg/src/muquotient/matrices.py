"""Dense complex matrix algebra for small matrices (size <= 12).

Matrices are plain ``complex128`` numpy arrays.  Most routines accept a
stack ``(..., n, n)`` so that whole sweeps can be done in one call.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
import scipy.linalg

from .errors import (
    IndexOutOfRange,
    InputError,
    NonConvergence,
    NotCyclic,
    NotMonic,
    NotSquare,
    Singular,
    SingularGroupElement,
    SizeMismatch,
    DegreeZero,
)
from .numerics import ComplexPoly, as_cvec, default_rng, poly_roots

MAX_SIZE = 12
SINGULAR_RTOL = 1e-10
CYCLIC_RTOL = 1e-10


class MinorMode(str, enum.Enum):
    FIRST_ROW_INCLUDED = "FirstRowIncluded"
    FIRST_ROW_EXCLUDED = "FirstRowExcluded"


def as_cmatrix(A, square: bool = True) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2:
        raise InputError("expected a 2-d matrix")
    if square and A.shape[0] != A.shape[1]:
        raise NotSquare(f"matrix of shape {A.shape} is not square")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix has non-finite entries")
    return A


def _square_stack(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise NotSquare(f"array of shape {A.shape} is not a (stack of) square matrices")
    return A


def det(A) -> complex:
    """Determinant via LU with partial pivoting (LAPACK getrf)."""
    return complex(np.linalg.det(as_cmatrix(A)))


def is_invertible(M: np.ndarray) -> bool:
    """|det M| >= 1e-10 * (1 + ||M||_F^size)."""
    M = np.asarray(M, dtype=complex)
    size = M.shape[0]
    return abs(np.linalg.det(M)) >= SINGULAR_RTOL * (1.0 + np.linalg.norm(M) ** size)


@lru_cache(maxsize=None)
def _index_sets(n: int):
    """For each j, increasing j-tuples of range(n) split by whether they contain 0."""
    out = {}
    for j in range(1, n + 1):
        combos = np.array(list(combinations(range(n), j)), dtype=np.intp)
        first = combos[combos[:, 0] == 0]
        rest = combos[combos[:, 0] != 0]
        out[j] = (first, rest)
    return out


def _minor_dets(A: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """det(A_I) for every row I of ``idx``; shape (..., len(idx))."""
    if idx.size == 0:
        return np.zeros(A.shape[:-2] + (0,), dtype=complex)
    sub = A[..., idx[:, :, None], idx[:, None, :]]
    return np.linalg.det(sub)


def minor_sums_split(A) -> tuple[np.ndarray, np.ndarray]:
    """Grouped principal-minor sums for a stack of n x n matrices.

    Returns ``(first, rest)`` with ``first[..., j-1]`` the sum of det(A_I) over
    I of size j containing index 1, and ``rest[..., j-1]`` the sum over I of
    size j avoiding it (so ``rest`` has n-1 entries).
    """
    A = _square_stack(A)
    n = A.shape[-1]
    if n > MAX_SIZE:
        raise InputError(f"size {n} exceeds the enumeration cap {MAX_SIZE}")
    sets = _index_sets(n)
    first = np.stack([_minor_dets(A, sets[j][0]).sum(axis=-1) for j in range(1, n + 1)], axis=-1)
    rest = np.stack([_minor_dets(A, sets[j][1]).sum(axis=-1) for j in range(1, n)], axis=-1) if n > 1 else (
        np.zeros(A.shape[:-2] + (0,), dtype=complex)
    )
    return first, rest


def minor_sum(A, j: int, mode: MinorMode | str) -> complex:
    """Sum of principal minors of order j whose index set does (or does not) contain 1."""
    A = as_cmatrix(A)
    n = A.shape[0]
    mode = MinorMode(mode)
    upper = n if mode is MinorMode.FIRST_ROW_INCLUDED else n - 1
    if not 1 <= j <= upper:
        raise IndexOutOfRange(f"j={j} outside 1..{upper} for {mode.value}")
    first, rest = _index_sets(n)[j]
    idx = first if mode is MinorMode.FIRST_ROW_INCLUDED else rest
    return complex(_minor_dets(A, idx).sum())


def pencil_det_poly(A, z) -> complex:
    """det(I - A diag(z)) evaluated directly."""
    A = as_cmatrix(A)
    z = as_cvec(z)
    if len(z) != A.shape[0]:
        raise SizeMismatch(f"{len(z)} variables for a {A.shape[0]}x{A.shape[0]} matrix")
    return complex(np.linalg.det(np.eye(len(z)) - A * z[None, :]))


def char_poly(A) -> ComplexPoly:
    """det(tI - A) in ascending coefficients, from full principal-minor sums."""
    A = as_cmatrix(A)
    n = A.shape[0]
    if n == 0:
        return ComplexPoly([1.0])
    first, rest = minor_sums_split(A)
    full = first.copy()
    full[: n - 1] += rest
    # coefficient of t^(n-j) is (-1)^j E_j
    desc = np.concatenate([[1.0], ((-1.0) ** np.arange(1, n + 1)) * full])
    return ComplexPoly(desc[::-1])


def companion(p: ComplexPoly) -> np.ndarray:
    """Companion matrix with ones on the subdiagonal and last column (-s_m, ..., -s_1)."""
    if p.degree < 1:
        raise DegreeZero("companion matrix needs degree >= 1")
    if abs(p.lead - 1.0) > 1e-10:
        raise NotMonic(f"leading coefficient {p.lead} is not 1")
    m = p.degree
    C = np.zeros((m, m), dtype=complex)
    C[np.arange(1, m), np.arange(m - 1)] = 1.0
    C[:, -1] = -p.coeffs[:m]
    return C


def krylov_matrix(X, v) -> np.ndarray:
    """[v, Xv, ..., X^(m-1) v] for an m x m matrix X."""
    X = as_cmatrix(X)
    v = as_cvec(v)
    m = X.shape[0]
    if len(v) != m:
        raise SizeMismatch(f"vector of length {len(v)} for a {m}x{m} matrix")
    cols = [v]
    for _ in range(m - 1):
        cols.append(X @ cols[-1])
    return np.stack(cols, axis=1)


def theta(X, v) -> complex:
    """Krylov determinant det[v, Xv, ..., X^(m-1)v]; nonzero iff v is cyclic for X."""
    return complex(np.linalg.det(krylov_matrix(X, v)))


def theta_tolerance(X, v) -> float:
    X = np.asarray(X)
    m = X.shape[0]
    return CYCLIC_RTOL * (1.0 + np.linalg.norm(X) ** m * np.linalg.norm(v))


def krylov_gamma(Atil, a) -> np.ndarray:
    """The Krylov matrix Gamma with Gamma^-1 Atil Gamma = companion(char_poly(Atil)) and Gamma e1 = a."""
    G = krylov_matrix(Atil, a)
    th = np.linalg.det(G)
    tol = theta_tolerance(Atil, a)
    if abs(th) <= tol:
        raise NotCyclic(f"|theta| = {abs(th):.3e} is below the cyclicity tolerance {tol:.3e}")
    return G


def is_nonderogatory(X, rng=None, trials: int = 4) -> bool:
    """Probabilistic test: some Gaussian vector is cyclic for X."""
    X = as_cmatrix(X)
    m = X.shape[0]
    rng = default_rng(rng)
    for _ in range(trials):
        v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        K = krylov_matrix(X, v)
        # Hadamard's bound gives the natural scale of det K
        hadamard = np.prod(np.linalg.norm(K, axis=0))
        if abs(np.linalg.det(K)) > CYCLIC_RTOL * hadamard:
            return True
    return False


@dataclass(frozen=True)
class GroupElement:
    """Block-diagonal g (+) Gamma with g nonzero and Gamma invertible."""

    g: complex
    Gamma: np.ndarray

    def __post_init__(self):
        Gamma = as_cmatrix(self.Gamma)
        object.__setattr__(self, "Gamma", Gamma)
        object.__setattr__(self, "g", complex(self.g))
        if abs(self.g) == 0 or not is_invertible(Gamma):
            raise SingularGroupElement("group element is not invertible")

    @property
    def n(self) -> int:
        return self.Gamma.shape[0] + 1

    def matrix(self) -> np.ndarray:
        return scipy.linalg.block_diag(np.array([[self.g]]), self.Gamma)

    def inverse(self) -> "GroupElement":
        return GroupElement(1.0 / self.g, np.linalg.inv(self.Gamma))


def conjugate(A, G: GroupElement) -> np.ndarray:
    """(g (+) Gamma)^-1 A (g (+) Gamma)."""
    A = as_cmatrix(A)
    if A.shape[0] != G.n:
        raise SizeMismatch(f"{A.shape[0]}x{A.shape[0]} matrix with a group element of size {G.n}")
    M = G.matrix()
    return np.linalg.solve(M, A @ M)


def matrix_exp(L) -> np.ndarray:
    """Matrix exponential (scaling and squaring with Pade approximants); accepts stacks."""
    return scipy.linalg.expm(np.asarray(L, dtype=complex))


def matrix_log(G, rtol: float = 1e-9) -> np.ndarray:
    """Some L with exp(L) = G, using principal scalar logarithms.

    The eigendecomposition route is taken when the eigenvector matrix is well
    conditioned (cond < 1e6); otherwise inverse scaling and squaring.
    """
    G = as_cmatrix(G)
    if not is_invertible(G):
        raise Singular("matrix logarithm of a singular matrix")
    scale = max(1.0, np.linalg.norm(G))
    w, V = np.linalg.eig(G)
    if np.linalg.cond(V) < 1e6:
        L = (V * np.log(w)[None, :]) @ np.linalg.inv(V)
        if np.linalg.norm(scipy.linalg.expm(L) - G) <= rtol * scale:
            return L
    L = scipy.linalg.logm(G)
    if np.linalg.norm(scipy.linalg.expm(L) - G) <= rtol * scale:
        return L
    raise NonConvergence("matrix logarithm failed the round-trip check")


def eigenvalues(A) -> np.ndarray:
    """Eigenvalues with multiplicity, as roots of the characteristic polynomial."""
    A = as_cmatrix(A)
    if A.shape[0] > MAX_SIZE:
        raise InputError(f"size {A.shape[0]} exceeds {MAX_SIZE}")
    return poly_roots(char_poly(A))

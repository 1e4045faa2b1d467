"""
Wick (Isserlis) factorization for circular complex Gaussian fields.

    E[∏_j Z*_j ∏_k Z_k] = Σ_σ ∏_j C_{j,σ(j)},   C_{jk} = E[Z*_j Z_k]

i.e. the permanent of the pair-correlation matrix, and zero when the numbers
of starred and unstarred factors differ.
"""

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from kinetics.errors import DomainError, ParameterError, SizeGuardError
from kinetics.sampling import McConfig, McEstimate, run_blocks

MAX_ENUMERATION_ORDER = 8
MAX_RYSER_ORDER = 20


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Hermitian positive semidefinite matrix of pair correlations E[Z*_j Z_k]"""

    entries: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.entries, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ParameterError("covariance must be a square matrix")
        scale = max(float(np.max(np.abs(c))), 1.0) if c.size else 1.0
        if not np.allclose(c, c.conj().T, rtol=0.0, atol=1e-12 * scale):
            raise DomainError("covariance must be Hermitian")
        trace = float(np.real(np.trace(c)))
        if c.size and np.min(np.linalg.eigvalsh(c)) < -1e-10 * max(trace, 1e-300):
            raise DomainError("covariance must be positive semidefinite")
        object.__setattr__(self, "entries", c)

    @property
    def order(self) -> int:
        return self.entries.shape[0]


MatrixLike = Union[CovarianceMatrix, np.ndarray]


def _as_array(c: MatrixLike) -> np.ndarray:
    if isinstance(c, CovarianceMatrix):
        return c.entries
    return np.asarray(c, dtype=complex)


def all_permutations(order: int) -> List[Tuple[int, ...]]:
    """Permutations of range(order) in lexicographic order"""
    return list(permutations(range(order)))


def moment_pairings(n_starred: int, n_plain: int, c: Optional[MatrixLike] = None) -> complex:
    """
    Gaussian moment with n_starred conjugated and n_plain plain factors.

    Zero when the counts differ, otherwise the permanent of c by enumeration.

    Raises:
        SizeGuardError: order above 8 (use permanent_ryser)
    """
    if n_starred != n_plain:
        return 0j
    if n_starred > MAX_ENUMERATION_ORDER:
        raise SizeGuardError(f"enumeration limited to order {MAX_ENUMERATION_ORDER}; use permanent_ryser")
    a = _as_array(c)
    if a.shape != (n_starred, n_starred):
        raise ParameterError(f"expected a {n_starred}x{n_starred} matrix, got {a.shape}")
    rows = np.arange(n_starred)
    total = 0j
    for perm in permutations(range(n_starred)):
        total += np.prod(a[rows, perm])
    return complex(total)


def permanent_ryser(c: MatrixLike) -> complex:
    """Permanent by Ryser's inclusion-exclusion formula with Gray-code column updates"""
    a = _as_array(c)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError("permanent needs a square matrix")
    n = a.shape[0]
    if n > MAX_RYSER_ORDER:
        raise SizeGuardError(f"Ryser permanent limited to order {MAX_RYSER_ORDER}")
    if n == 0:
        return 1 + 0j

    rowsums = np.zeros(n, dtype=complex)
    total = 0j
    gray = 0
    for k in range(1, 1 << n):
        column = (k & -k).bit_length() - 1
        gray ^= 1 << column
        if gray >> column & 1:
            rowsums += a[:, column]
        else:
            rowsums -= a[:, column]
        sign = -1.0 if bin(gray).count("1") % 2 else 1.0
        total += sign * np.prod(rowsums)
    return complex(total * (-1.0) ** n)


def random_psd(order: int, rng: np.random.Generator) -> CovarianceMatrix:
    """Random Hermitian PSD matrix with unit average diagonal"""
    x = rng.normal(size=(order, order)) + 1j * rng.normal(size=(order, order))
    c = x @ x.conj().T / (2.0 * order)
    return CovarianceMatrix(0.5 * (c + c.conj().T))


def hermitian_sqrt(c: np.ndarray) -> np.ndarray:
    """Square root of a Hermitian PSD matrix, eigenvalues clipped at 0"""
    values, vectors = np.linalg.eigh(c)
    return (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.conj().T


def mc_gaussian_moment(
    c: CovarianceMatrix, order: int, cfg: McConfig, threads: int = 1
) -> McEstimate:
    """
    Sample E[∏ Z*_j ∏ Z_j] for Z ~ circular Gaussian with E[Z*_j Z_k] = C_{jk}.
    """
    if not isinstance(c, CovarianceMatrix):
        c = CovarianceMatrix(c)
    if c.order != order:
        raise ParameterError(f"covariance is {c.order}x{c.order}, order is {order}")
    # E[Z Z^H] is the transpose of the pair matrix
    root = hermitian_sqrt(c.entries.T)

    def sampler(rng: np.random.Generator, size: int):
        w = (rng.normal(size=(size, order)) + 1j * rng.normal(size=(size, order))) / math.sqrt(2.0)
        z = w @ root.T
        values = np.prod(np.abs(z) ** 2, axis=1)
        return float(np.sum(values)), float(np.sum(values * values)), size

    return run_blocks(sampler, cfg, threads)


@dataclass(frozen=True, eq=False)
class DeltaProductSum:
    """
    Σ_σ coeff_σ ∏_j δ(k_j − ξ_σ(j)) a(k_j), kept symbolic.

    Args:
        order: Number of factor pairs L
        terms: (permutation of range(L), coefficient) per term
        amplitude: Per-factor amplitude a(k)
    """

    order: int
    terms: Tuple[Tuple[Tuple[int, ...], float], ...]
    amplitude: Optional[Callable] = None

    def __post_init__(self):
        identity = list(range(self.order))
        seen = set()
        for perm, coeff in self.terms:
            if sorted(perm) != identity:
                raise ParameterError(f"{perm} is not a permutation of order {self.order}")
            if not np.isfinite(coeff):
                raise ParameterError("coefficients must be finite")
            if tuple(perm) in seen:
                raise ParameterError(f"duplicate term {perm}")
            seen.add(tuple(perm))

    def __len__(self) -> int:
        return len(self.terms)

    def pairings(self) -> List[List[Tuple[str, str]]]:
        """Factor pairs per term, e.g. [("k1", "xi2"), ("k2", "xi1")]"""
        return [[(f"k{j + 1}", f"xi{p + 1}") for j, p in enumerate(perm)] for perm, _ in self.terms]

    def describe(self) -> List[str]:
        return ["".join(f"δ({k}−{xi})" for k, xi in pairs) for pairs in self.pairings()]

    def smooth_values(self, ks: Sequence[float]) -> np.ndarray:
        """coeff_σ ∏_j a(k_j) per term"""
        if len(ks) != self.order:
            raise ParameterError(f"need {self.order} arguments")
        if self.amplitude is None:
            raise ParameterError("no amplitude attached")
        product = float(np.prod([self.amplitude(k) for k in ks]))
        return np.array([coeff * product for _, coeff in self.terms])


def initial_f_hat(order: int, n0: Callable) -> DeltaProductSum:
    """Initial correlation data: all L! pairings with coefficient (2π)^{3L/2}"""
    if order < 1:
        raise ParameterError("order must be at least 1")
    if order > MAX_ENUMERATION_ORDER:
        raise SizeGuardError(f"order limited to {MAX_ENUMERATION_ORDER}")
    coeff = (2.0 * math.pi) ** (1.5 * order)
    return DeltaProductSum(order, tuple((perm, coeff) for perm in all_permutations(order)), n0)

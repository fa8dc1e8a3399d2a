"""
Operator Algebra
Dense operators and named states on the (transmon 1, transmon 2, resonator) space
"""

from functools import reduce
from typing import Dict, Mapping, Sequence

import numpy as np

from utils.errors import InvalidDimensionError

# Dense complex square matrices carry operators, density matrices and Liouvillians.
ComplexMatrix = np.ndarray
StateVector = np.ndarray

HERMITIAN_TOL = 1e-12

BELL_LABELS = ("00", "11", "T", "S", "T0", "S0", "T1", "S1")
LOWER_LABELS = ("00", "11", "T", "S")


def _check_square(op: ComplexMatrix, name: str = "operator") -> int:
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise InvalidDimensionError(f"{name} must be square, got shape {op.shape}")
    return op.shape[0]


def destroy(dim: int) -> ComplexMatrix:
    """Truncated lowering operator with <n-1|a|n> = sqrt(n)"""
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"lowering operator needs dim >= 2, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def create(dim: int) -> ComplexMatrix:
    return destroy(dim).conj().T


def number(dim: int) -> ComplexMatrix:
    if dim < 1:
        raise InvalidDimensionError(f"dimension must be positive, got {dim}")
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def identity(dim: int) -> ComplexMatrix:
    return np.eye(dim, dtype=complex)


def dagger(op: ComplexMatrix) -> ComplexMatrix:
    return op.conj().T


def is_hermitian(op: ComplexMatrix, tol: float = HERMITIAN_TOL) -> bool:
    _check_square(op)
    return bool(np.max(np.abs(op - op.conj().T), initial=0.0) <= tol)


def ket(dim: int, index: int) -> StateVector:
    if not 0 <= index < dim:
        raise InvalidDimensionError(f"level {index} outside dimension {dim}")
    vec = np.zeros(dim, dtype=complex)
    vec[index] = 1.0
    return vec


def projector(vec: StateVector) -> ComplexMatrix:
    return np.outer(vec, vec.conj())


def tensor(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product in the order given"""
    return reduce(np.kron, factors)


def product_operator(ops: Mapping[int, ComplexMatrix], dims: Sequence[int]) -> ComplexMatrix:
    """Tensor product with ``ops[slot]`` on the listed factors and identities elsewhere"""
    dims = [int(d) for d in dims]
    factors = [identity(d) for d in dims]
    for slot, op in ops.items():
        if not 0 <= slot < len(dims):
            raise InvalidDimensionError(f"slot {slot} outside {len(dims)} factors")
        size = _check_square(op)
        if size != dims[slot]:
            raise InvalidDimensionError(
                f"operator dimension {size} does not match factor {slot} of size {dims[slot]}"
            )
        factors[slot] = np.asarray(op, dtype=complex)
    return tensor(*factors)


def embed(op: ComplexMatrix, slot: int, dims: Sequence[int]) -> ComplexMatrix:
    """Place ``op`` on factor ``slot`` with identities elsewhere"""
    return product_operator({slot: op}, dims)


def basis_state(dims: Sequence[int], levels: Sequence[int]) -> StateVector:
    if len(dims) != len(levels):
        raise InvalidDimensionError(f"{len(levels)} levels given for {len(dims)} factors")
    return tensor(*[ket(d, k) for d, k in zip(dims, levels)])


def bell_basis(d_t: int) -> Dict[str, StateVector]:
    """Two-transmon states |00>, |11>, |T>, |S> and their level-2 partners.

    Vectors live in the d_t**2 dimensional two-transmon space.
    """
    if d_t < 3:
        raise InvalidDimensionError(f"states involving level |2> need d_t >= 3, got {d_t}")

    def pair(k1: int, k2: int) -> StateVector:
        return basis_state((d_t, d_t), (k1, k2))

    r = 1.0 / np.sqrt(2.0)
    return {
        "00": pair(0, 0),
        "11": pair(1, 1),
        "T": r * (pair(0, 1) + pair(1, 0)),
        "S": r * (pair(0, 1) - pair(1, 0)),
        "T0": r * (pair(0, 2) + pair(2, 0)),
        "S0": r * (pair(0, 2) - pair(2, 0)),
        "T1": r * (pair(1, 2) + pair(2, 1)),
        "S1": r * (pair(1, 2) - pair(2, 1)),
    }


def expect(op: ComplexMatrix, rho: ComplexMatrix) -> complex:
    """Tr(op rho)"""
    n = _check_square(op)
    m = _check_square(rho, "density matrix")
    if n != m:
        raise InvalidDimensionError(f"operator dimension {n} does not match state dimension {m}")
    # Tr(AB) = sum_ij A_ij B_ji without forming the product
    return complex(np.sum(op * rho.T))

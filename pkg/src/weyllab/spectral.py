"""Truncated Fourier-Galerkin Hamiltonian H_V = -Laplacian + V and its spectral sums.

Basis functions are e_j(x) = (2 pi)^(-n/2) e^{i j.x} for |j| <= Lambda_max.
Because V is real and even, H is real symmetric and the eigenvectors can be
taken real, so e_tau(x) = (2 pi)^(-n/2) sum_j c_j e^{i j.x}.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .lattice import LatticeBasis
from .potential import FourierTable


class ReliabilityWarning(UserWarning):
    """Spectral quantity requested above the trusted part of the truncated spectrum."""


class TruncationWarning(UserWarning):
    """Heat time too small for the basis truncation."""


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    basis: LatticeBasis
    matrix: np.ndarray
    potential_matrix: np.ndarray
    fingerprint: str

    @property
    def v00(self) -> float:
        return float(self.potential_matrix[0, 0]) if len(self.basis) else 0.0


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigenpairs of a Hamiltonian.

    ``eigenvalues`` are shifted by ``shift`` (see `eigensolve`), ascending;
    ``raw_eigenvalues`` are the unshifted ones.  Column k of ``coefficients``
    expands e_{tau_k} in the orthonormal exponentials.
    """

    basis: LatticeBasis
    raw_eigenvalues: np.ndarray
    coefficients: np.ndarray
    shift: float = 0.0
    fingerprint: str = ""
    reliability: float = 0.5
    eigenvalues: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", self.raw_eigenvalues + self.shift)

    @property
    def tau(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.eigenvalues, 0.0))

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def cutoff(self) -> float:
        """Largest lambda for which spectral sums are trusted."""
        return self.reliability * self.basis.cutoff

    def values_at(self, x, columns=None) -> np.ndarray:
        """e_{tau_k}(x) for the selected columns (complex)."""
        phase = np.exp(1j * (self.basis.points @ np.asarray(x, dtype=float)))
        c = self.coefficients if columns is None else self.coefficients[:, columns]
        return (phase @ c) / (2 * math.pi) ** (self.dim / 2)

    def density_at(self, x, columns=None) -> np.ndarray:
        """|e_{tau_k}(x)|^2 for the selected columns."""
        v = self.values_at(x, columns)
        return v.real**2 + v.imag**2


def difference_norm_sq(basis: LatticeBasis) -> np.ndarray:
    """Matrix of |j - k|^2 over basis pairs (int32)."""
    p = basis.points.astype(np.int32)
    out = np.zeros((len(p), len(p)), dtype=np.int32)
    for a in range(basis.dim):
        d = p[:, None, a] - p[None, :, a]
        out += d * d
    return out


def potential_matrix(basis: LatticeBasis, table: FourierTable) -> np.ndarray:
    """V_jk = (2 pi)^(-n) V^(j - k) over the basis."""
    if table.dim != basis.dim:
        raise ValueError("table dimension does not match the basis")
    n = len(basis)
    if table.is_zero:
        return np.zeros((n, n))
    d2 = difference_norm_sq(basis)
    needed = np.unique(d2)
    lookup = table.lookup_array(int(needed[-1]), needed) / (2 * math.pi) ** basis.dim
    return lookup[d2]


def assemble(basis: LatticeBasis, table: FourierTable) -> Hamiltonian:
    vm = potential_matrix(basis, table)
    h = vm.copy()
    h[np.diag_indices_from(h)] += basis.norm_sq
    return Hamiltonian(basis, h, vm, table.fingerprint())


def _check_decomposition(mat: np.ndarray, w: np.ndarray, c: np.ndarray, rng_seed: int = 0) -> None:
    n = len(w)
    tr = float(np.trace(mat))
    if abs(w.sum() - tr) > 1e-9 * max(abs(tr), np.abs(w).sum(), 1.0):
        raise SolverError(f"trace identity violated: sum={w.sum()!r} trace={tr!r}")
    if n <= 3000:
        err = np.abs(c.T @ c - np.eye(n)).max()
    else:
        # randomized probe: ||C^T C v - v|| for a few random unit vectors
        rng = np.random.default_rng(rng_seed)
        v = rng.standard_normal((n, 4))
        v /= np.linalg.norm(v, axis=0)
        err = np.abs(c.T @ (c @ v) - v).max()
    if err > 1e-10:
        raise SolverError(f"eigenvector orthonormality defect {err:.3e}")


def eigensolve(h: Hamiltonian, floor: float = 0.0, max_size: int = 12000,
               reliability: float = 0.5) -> SpectralData:
    """Full symmetric eigendecomposition, ascending.

    If the lowest eigenvalue is below `floor`, all eigenvalues are shifted by
    floor - lambda_min so tau = sqrt(eigenvalue) is real; the raw values are
    kept.  Pass floor=1 for the normalization H >= 1.
    """
    n = len(h.basis)
    if n > max_size:
        raise ValueError(f"basis size {n} exceeds the configured limit {max_size}")
    if not np.all(np.isfinite(h.matrix)):
        raise ValueError("Hamiltonian has non-finite entries")
    try:
        w, c = scipy.linalg.eigh(h.matrix, driver="evd", check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"symmetric eigensolver did not converge (n={n}): {exc}") from exc
    _check_decomposition(h.matrix, w, c)
    shift = max(0.0, floor - float(w[0])) if n else 0.0
    return SpectralData(h.basis, w, c, shift, h.fingerprint, reliability)


def eigenfunction_value(S: SpectralData, k: int, x) -> complex:
    if not 0 <= k < len(S.raw_eigenvalues):
        raise IndexError(f"eigen index {k} out of range")
    return complex(S.values_at(x, [k])[0])


def _reliability_check(S: SpectralData, lam: float) -> None:
    if lam > S.cutoff:
        warnings.warn(f"lambda={lam:g} above reliability cutoff {S.cutoff:g}", ReliabilityWarning, stacklevel=3)


def projector_diag(S: SpectralData, lam: float, x) -> float:
    """sum_{tau_k <= lambda} |e_{tau_k}(x)|^2."""
    _reliability_check(S, lam)
    cols = np.flatnonzero(S.eigenvalues <= lam * lam)
    if len(cols) == 0:
        return 0.0
    return float(S.density_at(x, cols).sum())


def eig_count(S: SpectralData, lam: float) -> int:
    if lam < 0:
        return 0
    return int(np.searchsorted(S.eigenvalues, lam * lam, side="right"))


def heat_diag(S: SpectralData, t: float, x, y) -> float:
    """e^{-t H}(x, y) = sum_k e^{-t tau_k^2} e_k(x) conj(e_k(y)), real part."""
    if t <= 0:
        raise ValueError("t must be positive")
    if t < S.basis.cutoff ** -2:
        warnings.warn(f"t={t:g} below Lambda_max^-2; truncation dominates", TruncationWarning, stacklevel=2)
    wts = np.exp(-t * (S.eigenvalues - S.eigenvalues[0]))
    ex = S.values_at(x)
    ey = ex if np.array_equal(np.asarray(x), np.asarray(y)) else S.values_at(y)
    val = (wts * ex * ey.conj()).sum() * math.exp(-t * S.eigenvalues[0])
    scale = (wts * np.abs(ex) * np.abs(ey)).sum() * math.exp(-t * S.eigenvalues[0])
    assert abs(val.imag) <= 1e-9 * max(scale, 1.0), "heat kernel has an imaginary part"
    return float(val.real)


def overlap_matrix(S: SpectralData, table: FourierTable, vmat: np.ndarray | None = None) -> np.ndarray:
    """V~_{k l} = int conj(e_k^0) e_{tau_l} V = sum_m V_km c_m^(l)."""
    vm = potential_matrix(S.basis, table) if vmat is None else vmat
    return vm @ S.coefficients


def grid_values(S: SpectralData, points_per_axis: int, columns) -> np.ndarray:
    """e_{tau_k} on the uniform grid x = 2 pi m / G, shape (G,)*n + (len(columns),).

    Coefficients are folded modulo G and transformed by an inverse FFT.
    """
    g = points_per_axis
    cols = np.atleast_1d(columns)
    spec = np.zeros((g,) * S.dim + (len(cols),), dtype=complex)
    idx = tuple((S.basis.points % g).T)
    np.add.at(spec, idx, S.coefficients[:, cols])
    axes = tuple(range(S.dim))
    return np.fft.ifftn(spec, axes=axes) * g**S.dim / (2 * math.pi) ** (S.dim / 2)


def projector_grid_average(S: SpectralData, lam: float, points_per_axis: int | None = None) -> float:
    """Mean of projector_diag over a uniform grid (G >= 4 Lambda_max per axis)."""
    g = points_per_axis or max(8, int(math.ceil(4 * S.basis.cutoff)))
    cols = np.flatnonzero(S.eigenvalues <= lam * lam)
    total = 0.0
    for i in range(0, len(cols), 256):
        v = grid_values(S, g, cols[i : i + 256])
        total += float((v.real**2 + v.imag**2).sum())
    return total / g**S.dim

"""Linear (POD) and kernel (KPOD) reduced-basis construction.

POD takes the leading left singular vectors of the snapshot matrix. KPOD
replaces snapshot inner products by a radial-basis-function kernel:

    K_ij = exp(-gamma ||s_i - s_j||^2),

eigendecomposes K, projects the snapshots through the eigenvectors
(p_k = S w_k / sqrt(lambda_k)), and orthonormalizes the projected
vectors with a reduced QR factorization. Both methods truncate at the
smallest n whose relative tail energy sum_{k>n} sigma_k^2 / sum_k
sigma_k^2 drops below a tolerance.

Unlike textbook kernel PCA, no feature-space centering is applied: the
projected-vector route consumes the raw kernel eigenpairs.

Sign conventions are pinned everywhere (eigenvectors and singular
vectors get a positive largest-magnitude entry, QR forces a nonnegative
R diagonal) so identical inputs give bit-identical bases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailure,
    DegenerateSpectrum,
    DimensionMismatch,
    ValidationError,
)
from .sampling import SnapshotMatrix


@dataclass(frozen=True)
class KernelConfig:
    """RBF width hyperparameter gamma > 0."""

    gamma: float

    def __post_init__(self) -> None:
        if not (self.gamma > 0):
            raise ValidationError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class Spectrum:
    """Descending positive mode amplitudes sigma_k, with the numerically-zero tail dropped.

    For POD the sigmas are singular values of the snapshot matrix; for
    KPOD they are sqrt of the kernel-matrix eigenvalues.
    """

    sigmas: np.ndarray
    discarded_count: int = 0

    def __post_init__(self) -> None:
        if self.sigmas.size == 0:
            raise ValidationError("empty spectrum")
        if np.any(self.sigmas <= 0):
            raise ValidationError("spectrum entries must be positive")
        if np.any(np.diff(self.sigmas) > 0):
            raise ValidationError("spectrum must be sorted descending")

    @property
    def energies(self) -> np.ndarray:
        return self.sigmas**2


@dataclass(frozen=True)
class ReducedBasis:
    """Orthonormal N_h x n basis with its spectrum and construction metadata."""

    V: np.ndarray
    spectrum: Spectrum
    method: str
    eps_hat: float
    gamma: float | None = None

    @property
    def n(self) -> int:
        return self.V.shape[1]

    @property
    def n_dofs(self) -> int:
        return self.V.shape[0]


def kernel_matrix(S: SnapshotMatrix | np.ndarray, cfg: KernelConfig) -> np.ndarray:
    """RBF kernel matrix of the snapshot columns: exactly symmetric, unit diagonal.

    Squared distances come from the Gram matrix (||s_i||^2 + ||s_j||^2
    - 2 s_i.s_j), clipped at zero so identical columns give exact ones.
    """
    data = S.data if isinstance(S, SnapshotMatrix) else np.asarray(S, dtype=float)
    if data.size == 0:
        raise ValidationError("empty snapshot matrix")
    gram = data.T @ data
    gram = 0.5 * (gram + gram.T)
    sq_norms = np.diag(gram).copy()
    d2 = -2.0 * gram
    d2 += sq_norms[:, None]
    d2 += sq_norms[None, :]
    np.maximum(d2, 0.0, out=d2)
    d2 *= -cfg.gamma
    np.exp(d2, out=d2)
    np.fill_diagonal(d2, 1.0)
    return d2


def sym_eig(K: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.

    Eigenvectors are unit-norm columns with their largest-magnitude
    entry made positive.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {K.shape}")
    if K.size and np.max(np.abs(K - K.T)) > 1e-12 * max(1.0, np.max(np.abs(K))):
        raise ValidationError("matrix is not symmetric within 1e-12")
    try:
        lam, W = np.linalg.eigh(K)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigendecomposition failed: {exc}") from exc
    lam = lam[::-1]
    W = W[:, ::-1]
    W = _fix_column_signs(W)
    return W, lam


def _fix_column_signs(M: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(M), axis=0)
    signs = np.sign(M[idx, np.arange(M.shape[1])])
    signs[signs == 0] = 1.0
    return M * signs


def qr_positive(P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR factorization with the R diagonal forced nonnegative (unique Q)."""
    Q, R = np.linalg.qr(P, mode="reduced")
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs, R * signs[:, None]


def truncation_rank(spectrum: Spectrum, eps_hat: float) -> int:
    """Smallest n with sum_{k>n} sigma_k^2 <= eps_hat * sum_k sigma_k^2."""
    if not (eps_hat > 0):
        raise ValidationError(f"eps_hat must be positive, got {eps_hat}")
    energies = spectrum.energies
    total = energies.sum()
    tail = total - np.cumsum(energies)
    admissible = np.flatnonzero(tail <= eps_hat * total)
    return int(admissible[0]) + 1 if admissible.size else energies.size


def _positive_spectrum(values: np.ndarray, cutoff: float) -> tuple[np.ndarray, int]:
    kept = values[values > cutoff]
    return kept, values.size - kept.size


def kpod_basis(S: SnapshotMatrix | np.ndarray, cfg: KernelConfig,
               eps_hat: float = 1e-12) -> ReducedBasis:
    """Kernel-POD basis: kernel matrix -> eigenpairs -> projected vectors -> QR -> truncate.

    Eigenvalues at or below machine-noise scale (eps_mach * lambda_1 *
    N_s) are dropped before the projection, since dividing by their
    square roots would amplify round-off; the count is recorded on the
    spectrum. The basis keeps the first n columns of Q, capped by the
    number of columns QR can orthonormalize.
    """
    data = S.data if isinstance(S, SnapshotMatrix) else np.asarray(S, dtype=float)
    if data.size and not np.any(data):
        raise DegenerateSpectrum("snapshot matrix is numerically zero")
    K = kernel_matrix(data, cfg)
    W, lam = sym_eig(K)
    if lam.size == 0 or lam[0] <= 0:
        raise DegenerateSpectrum("kernel matrix has no positive eigenvalues")
    cutoff = np.finfo(float).eps * lam[0] * lam.size
    lam_kept, discarded = _positive_spectrum(lam, cutoff)
    if lam_kept.size == 0:
        raise DegenerateSpectrum("all kernel eigenvalues are numerically nonpositive")
    spectrum = Spectrum(sigmas=np.sqrt(lam_kept), discarded_count=discarded)
    P = (data @ W[:, : lam_kept.size]) / spectrum.sigmas
    Q, _ = qr_positive(P)
    n = min(truncation_rank(spectrum, eps_hat), Q.shape[1])
    return ReducedBasis(V=Q[:, :n].copy(), spectrum=spectrum, method="kpod",
                        eps_hat=eps_hat, gamma=cfg.gamma)


def pod_basis(S: SnapshotMatrix | np.ndarray, eps_hat: float = 1e-12) -> ReducedBasis:
    """POD basis: leading left singular vectors under the tail-energy criterion."""
    data = S.data if isinstance(S, SnapshotMatrix) else np.asarray(S, dtype=float)
    if data.size == 0:
        raise ValidationError("empty snapshot matrix")
    try:
        U, sig, _ = np.linalg.svd(data, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"SVD failed: {exc}") from exc
    sig_kept, discarded = _positive_spectrum(sig, 0.0)
    if sig_kept.size == 0:
        raise DegenerateSpectrum("snapshot matrix is numerically zero")
    spectrum = Spectrum(sigmas=sig_kept, discarded_count=discarded)
    U = _fix_column_signs(U[:, : sig_kept.size])
    n = truncation_rank(spectrum, eps_hat)
    return ReducedBasis(V=U[:, :n].copy(), spectrum=spectrum, method="pod",
                        eps_hat=eps_hat)


def project(basis: ReducedBasis, u: np.ndarray) -> np.ndarray:
    """Reduced coefficients V^T u."""
    u = np.asarray(u, dtype=float)
    if u.shape[0] != basis.n_dofs:
        raise DimensionMismatch(
            f"vector of length {u.shape[0]} vs basis with {basis.n_dofs} DOFs"
        )
    return basis.V.T @ u


def reconstruct(basis: ReducedBasis, coeffs: np.ndarray) -> np.ndarray:
    """Full-order vector V coeffs."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[0] != basis.n:
        raise DimensionMismatch(
            f"coefficient vector of length {coeffs.shape[0]} vs basis rank {basis.n}"
        )
    return basis.V @ coeffs


def kpod_spectrum(S: SnapshotMatrix | np.ndarray, cfg: KernelConfig) -> Spectrum:
    """Kernel-matrix spectrum only (no basis assembly); shares kpod_basis' drop rule."""
    data = S.data if isinstance(S, SnapshotMatrix) else np.asarray(S, dtype=float)
    K = kernel_matrix(data, cfg)
    try:
        lam = np.linalg.eigvalsh(K)[::-1]
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigendecomposition failed: {exc}") from exc
    if lam.size == 0 or lam[0] <= 0:
        raise DegenerateSpectrum("kernel matrix has no positive eigenvalues")
    cutoff = np.finfo(float).eps * lam[0] * lam.size
    lam_kept, discarded = _positive_spectrum(lam, cutoff)
    if lam_kept.size == 0:
        raise DegenerateSpectrum("all kernel eigenvalues are numerically nonpositive")
    return Spectrum(sigmas=np.sqrt(lam_kept), discarded_count=discarded)


def pod_spectrum(S: SnapshotMatrix | np.ndarray) -> Spectrum:
    """Singular-value spectrum of the snapshot matrix (no basis assembly)."""
    data = S.data if isinstance(S, SnapshotMatrix) else np.asarray(S, dtype=float)
    if data.size == 0:
        raise ValidationError("empty snapshot matrix")
    sig = np.linalg.svd(data, compute_uv=False)
    sig_kept, discarded = _positive_spectrum(sig, 0.0)
    if sig_kept.size == 0:
        raise DegenerateSpectrum("snapshot matrix is numerically zero")
    return Spectrum(sigmas=sig_kept, discarded_count=discarded)


def spectrum_table(S: SnapshotMatrix | np.ndarray, include_pod: bool = True,
                   gammas: tuple[float, ...] = ()) -> list[tuple[int, float, str, float | None]]:
    """Rows (k, sigma_k^2, method, gamma) for eigenvalue-decay plots."""
    rows: list[tuple[int, float, str, float | None]] = []
    if include_pod:
        for k, e in enumerate(pod_spectrum(S).energies, start=1):
            rows.append((k, float(e), "pod", None))
    for gamma in gammas:
        spec = kpod_spectrum(S, KernelConfig(gamma=gamma))
        for k, e in enumerate(spec.energies, start=1):
            rows.append((k, float(e), "kpod", gamma))
    return rows

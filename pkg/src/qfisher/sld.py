"""Symmetric logarithmic derivative and the quantum Fisher information tensor."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, SolverError, ValidationError
from .geometry import hermitian_tensor
from .models import HERM_TOL, PSD_TOL, PureStateModel, validate_density
from .numdiff import Differential, differentiate

SLD_TOL = 1e-10
RANK_CUT = 1e-12
PURITY_TOL = 1e-10
TRACE_TOL = 1e-10


@dataclass(frozen=True)
class SLDSet:
    matrices: np.ndarray  # (m, n, n)
    support_rank: int
    residuals: np.ndarray  # (m,)

    def __len__(self):
        return self.matrices.shape[0]


@dataclass(frozen=True)
class QFITensor:
    entries: np.ndarray

    @property
    def metric_part(self) -> np.ndarray:
        Q = self.entries
        return ((Q + Q.T) / 2).real

    @property
    def asym_part(self) -> np.ndarray:
        Q = self.entries
        return ((Q - Q.T) / 2).imag


def _stack_drho(drho) -> np.ndarray:
    if isinstance(drho, Differential):
        drho = drho.per_parameter
    drho = np.asarray(drho, dtype=complex)
    if drho.ndim == 2:
        drho = drho[None]
    if drho.ndim != 3 or drho.shape[1] != drho.shape[2]:
        raise ValidationError(f"drho must be a stack of square matrices, got shape {drho.shape}")
    return drho


def sld_solve(rho, drho, *, herm_tol=HERM_TOL, trace_tol=TRACE_TOL, psd_tol=PSD_TOL,
              sld_tol=SLD_TOL, rank_cut=RANK_CUT) -> SLDSet:
    """Solve ``d_j rho = (rho L_j + L_j rho)/2`` for Hermitian ``L_j``.

    Works in the eigenbasis of ``rho``: ``(L_j)_ab = 2 (d_j rho)_ab / (l_a + l_b)``.
    Entries with ``l_a + l_b <= rank_cut * l_max`` are left at zero; that block
    is not fixed by the defining equation.
    """
    rho = np.asarray(rho, dtype=complex)
    drho = _stack_drho(drho)
    validate_density(rho, herm_tol, psd_tol, trace_tol)
    if drho.shape[1] != rho.shape[0]:
        raise ValidationError(f"drho has dimension {drho.shape[1]}, rho has {rho.shape[0]}")
    for j, d in enumerate(drho):
        asym = np.max(np.abs(d - d.conj().T))
        if asym > herm_tol:
            raise ValidationError(f"d rho for parameter {j} not Hermitian ({asym:.3e})")
        tr = abs(np.trace(d))
        if tr > trace_tol:
            raise ValidationError(f"d rho for parameter {j} not traceless ({tr:.3e})")
    rho = (rho + rho.conj().T) / 2
    drho = (drho + np.conj(np.swapaxes(drho, 1, 2))) / 2

    diagonal = not np.any(rho - np.diag(np.diag(rho)))
    if diagonal:
        lam = np.diag(rho).real.copy()
    else:
        lam, V = np.linalg.eigh(rho)
    denom = lam[:, None] + lam[None, :]
    keep = denom > rank_cut * lam.max()
    inv = np.zeros_like(denom)
    inv[keep] = 2.0 / denom[keep]

    if diagonal:
        # eigenbasis is the computational basis; stay elementwise
        L = drho * inv[None]
        R_eig = 0.5 * (lam[None, :, None] * L + L * lam[None, None, :]) - drho
    else:
        Vh = V.conj().T
        L = V[None] @ ((Vh[None] @ drho @ V[None]) * inv[None]) @ Vh[None]
        L = (L + np.conj(np.swapaxes(L, 1, 2))) / 2
        # residual measured in the original basis, then restricted to the support block
        R = 0.5 * (rho[None] @ L + L @ rho[None]) - drho
        R_eig = Vh[None] @ R @ V[None]
    residuals = np.array([np.max(np.abs(r[keep]), initial=0.0) for r in R_eig])
    if np.any(residuals > sld_tol):
        raise SolverError(f"SLD residual {residuals.max():.3e} exceeds {sld_tol:.1e}")
    rank = int(np.sum(lam > rank_cut * lam.max()))
    return SLDSet(L, rank, residuals)


def qfi_tensor(rho, slds: SLDSet) -> QFITensor:
    """``Q_jk = Tr[rho L_j L_k]``."""
    rho = np.asarray(rho, dtype=complex)
    L = slds.matrices
    if L.shape[1:] != rho.shape:
        raise ValidationError(f"SLD dimension {L.shape[1:]} does not match rho {rho.shape}")
    if not np.any(rho - np.diag(np.diag(rho))):
        rhoL = np.diag(rho)[None, :, None] * L
    else:
        rhoL = rho[None] @ L  # (m, n, n)
    Q = np.einsum("jab,kba->jk", rhoL, L)
    return QFITensor(Q)


def purity_check(rho) -> float:
    """``max |rho^2 - rho|``; zero exactly for rank-one projectors."""
    rho = np.asarray(rho)
    return float(np.max(np.abs(rho @ rho - rho)))


def pure_state_identities(rho, drho, *, purity_tol=PURITY_TOL, require_pure=True) -> np.ndarray:
    """Residuals ``(m, 3)`` of the three first-order consequences of ``rho^2 = rho``.

    Columns: ``|rho drho + drho rho - drho|``, ``|Tr drho|``, ``|Tr(rho drho)|``.
    Pass ``require_pure=False`` to evaluate them on a mixed state anyway.
    """
    rho = np.asarray(rho, dtype=complex)
    drho = _stack_drho(drho)
    if require_pure:
        defect = purity_check(rho)
        if defect > purity_tol:
            raise PreconditionError(f"state is not pure (|rho^2 - rho| = {defect:.3e})")
    out = np.empty((drho.shape[0], 3))
    for j, d in enumerate(drho):
        out[j, 0] = np.max(np.abs(rho @ d + d @ rho - d))
        out[j, 1] = abs(np.trace(d))
        out[j, 2] = abs(np.trace(rho @ d))
    return out


def qfi_pure_fast(model: PureStateModel, theta, diff: Differential | None = None) -> QFITensor:
    """``Q = 4 H`` from amplitudes alone; never forms a density matrix."""
    if diff is None:
        diff = differentiate(model, theta)
    return QFITensor(4.0 * hermitian_tensor(model, theta, diff).entries)


def qfi_via_trace(rho, drho) -> QFITensor:
    """Pure-state shortcut ``Q_jk = 4 Tr[rho d_j rho d_k rho]``."""
    rho = np.asarray(rho, dtype=complex)
    drho = _stack_drho(drho)
    rho_d = rho[None] @ drho
    return QFITensor(4.0 * np.einsum("jab,kba->jk", rho_d, drho))

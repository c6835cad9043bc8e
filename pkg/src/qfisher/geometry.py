"""Hermitian pullback of the Fubini-Study tensor to a parametrized pure-state family.

Conventions
-----------
* Inner product ``<a|b> = sum_i w_i conj(a_i) b_i`` (antilinear in the bra).
* ``H_jk = <d_j psi|d_k psi>/<psi|psi> - <d_j psi|psi><psi|d_k psi>/<psi|psi>^2``.
* ``H = G - i*Omega`` with ``G = Re H`` and ``Omega = -Im H``.
* In the polar form ``psi = sqrt(p) exp(i alpha)`` this gives
  ``G = F/4 + Cov_p(d alpha)`` and
  ``Omega_jk = (1/2) E_p[d_k ln p * d_j alpha - d_j ln p * d_k alpha]``.
* Wedge products are unnormalized: ``a ^ b = a(x)b - b(x)a``, so
  ``Omega = -(1/2) E_p[d ln p ^ d alpha]`` in components.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .classical import fisher_from_scores
from .errors import ConsistencyError, ValidationError
from .models import HermitianTensor, PureStateModel
from .numdiff import Differential, LogDifferentialPair, differentiate, log_differentials, pick_tol

ASSEMBLY_TOL_ANALYTIC = 1e-8
ASSEMBLY_TOL_FD = 1e-5

CONVENTIONS = {
    "inner_product": "<a|b> = sum_i w_i conj(a_i) b_i",
    "hermitian_tensor": "H_jk = <d_j psi|d_k psi>/<psi|psi> - <d_j psi|psi><psi|d_k psi>/<psi|psi>^2",
    "decomposition": "H = G - i*Omega, G = Re H, Omega = -Im H",
    "omega_from_polar": "Omega_jk = 1/2 E_p[d_k ln p d_j alpha - d_j ln p d_k alpha]",
    "wedge": "a ^ b = a (x) b - b (x) a (no 1/2)",
    "qfi": "Q_jk = Tr[rho L_j L_k]; metric_part = Re Q; asym_part = Im Q; Q = 4 H for pure states",
}


def _tensor_from(space, psi, dpsi) -> np.ndarray:
    w = space.weights
    nrm = float(np.sum(w * np.abs(psi) ** 2))
    if nrm == 0.0:
        raise ValidationError("hermitian tensor of the zero vector is undefined")
    bra_d = np.conj(dpsi) * w  # (m, N)
    gram = bra_d @ dpsi.T  # <d_j psi|d_k psi>
    b = bra_d @ psi  # <d_j psi|psi>
    c = (np.conj(psi) * w) @ dpsi.T  # <psi|d_k psi>
    return gram / nrm - np.outer(b, c) / nrm**2


def hermitian_tensor(model: PureStateModel, theta, diff: Differential | None = None) -> HermitianTensor:
    """Pullback tensor ``H`` evaluated directly from amplitudes and their partials."""
    if diff is None:
        diff = differentiate(model, theta)
    return HermitianTensor(_tensor_from(model.space, diff.value, diff.per_parameter))


@dataclass(frozen=True)
class PullbackDecomposition:
    h: HermitianTensor
    g: np.ndarray
    omega: np.ndarray
    quarter_classical: np.ndarray
    alpha_covariance: np.ndarray
    mean_dalpha: np.ndarray
    omega_polar: np.ndarray
    assembly_residual_real: float
    assembly_residual_imag: float
    logs: LogDifferentialPair
    mode: str

    def dalpha_vanishes(self, tol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.logs.dalpha), initial=0.0) <= tol)


def polar_terms(space, p, logs: LogDifferentialPair):
    """``(F/4, Cov(d alpha), E[d alpha], Omega)`` from the logarithmic differentials."""
    s, a = logs.dlnp, logs.dalpha
    wp = space.weights * p
    quarter = fisher_from_scores(space, p, s) / 4
    mean_a = a @ wp
    second = (a * wp) @ a.T
    cov = second - np.outer(mean_a, mean_a)
    cov = (cov + cov.T) / 2
    cross = (s * wp) @ a.T  # E[d_j ln p d_k alpha]
    omega = 0.5 * (cross.T - cross)
    return quarter, cov, mean_a, omega


def decompose(model: PureStateModel, theta, diff: Differential | None = None,
              strict: bool = True, assembly_tol: float | None = None) -> PullbackDecomposition:
    """Split ``H`` into ``G``, ``Omega`` and the polar pieces and cross-check them.

    ``G`` and ``Omega`` come from the direct evaluation of ``H``; the polar
    pieces are an independent route.  With ``strict`` a disagreement beyond
    ``assembly_tol`` raises :class:`ConsistencyError`.
    """
    if diff is None:
        diff = differentiate(model, theta)
    H = hermitian_tensor(model, theta, diff)
    psi = diff.value
    nrm = float(model.space.integrate(np.abs(psi) ** 2))
    p = np.abs(psi) ** 2 / nrm
    logs = log_differentials(model, theta, diff)
    quarter, cov, mean_a, omega_polar = polar_terms(model.space, p, logs)

    g = H.real_part
    g = (g + g.T) / 2
    omega = H.imag_part_negated
    omega = (omega - omega.T) / 2
    res_re = float(np.max(np.abs(g - (quarter + cov))))
    res_im = float(np.max(np.abs(omega - omega_polar)))

    tol = assembly_tol if assembly_tol is not None else pick_tol(
        diff.mode, ASSEMBLY_TOL_ANALYTIC, ASSEMBLY_TOL_FD)
    if strict and max(res_re, res_im) > tol:
        hint = " (state touches the boundary of its support)" if logs.on_boundary else ""
        raise ConsistencyError(
            f"pullback assembly mismatch: |G - F/4 - Cov| = {res_re:.3e}, "
            f"|Omega - Omega_polar| = {res_im:.3e} > {tol:.1e}{hint}"
        )
    return PullbackDecomposition(H, g, omega, quarter, cov, mean_a, omega_polar,
                                 res_re, res_im, logs, diff.mode)


def dominance_gap(model: PureStateModel, theta, diff: Differential | None = None) -> np.ndarray:
    """``G - F/4``; positive semidefinite, equal to ``Cov(d alpha)``."""
    dec = decompose(model, theta, diff)
    return dec.g - dec.quarter_classical


def gauge_transform(model: PureStateModel, beta: Callable[[np.ndarray], float],
                    dbeta: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> PureStateModel:
    """Multiply amplitudes by a parameter-dependent global phase ``exp(i beta(theta))``.

    The analytic jacobian is kept only when both the model and ``dbeta`` provide one.
    """
    def func(theta):
        return np.exp(1j * beta(theta)) * np.asarray(model.func(theta), dtype=complex)

    jac = None
    if model.jacobian is not None and dbeta is not None:
        def jac(theta):
            phase = np.exp(1j * beta(theta))
            psi = np.asarray(model.func(theta), dtype=complex)
            dpsi = np.asarray(model.jacobian(theta), dtype=complex)
            db = np.asarray(dbeta(theta), dtype=float)
            return phase * (dpsi + 1j * db[:, None] * psi[None, :])

    return dataclasses.replace(model, func=func, jacobian=jac,
                               name=f"gauge({model.name})" if model.name else "")

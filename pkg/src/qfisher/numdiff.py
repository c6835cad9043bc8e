"""Parameter differentials of model values and the logarithmic differentials of amplitudes."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FiniteDifferenceWarning, SupportBoundaryWarning
from .models import PureStateModel, _Model

FD_STEP_SCALE = np.cbrt(np.finfo(float).eps)
SUPP_TOL = 1e-12
BOUNDARY_TOL = 1e-8
ONE_SIDED_TOL = 1e-3


@dataclass(frozen=True)
class Differential:
    """Stacked partials ``per_parameter[j] = d(value)/d(theta_j)`` at ``theta``.

    ``value`` is the model value at the same point, kept so downstream code
    never evaluates the model twice.  ``one_sided_gap`` is the largest relative
    disagreement between forward and backward quotients (0 for analytic input).
    """

    value: np.ndarray
    per_parameter: np.ndarray
    mode: str
    steps: np.ndarray | None = None
    one_sided_gap: float = 0.0

    def __len__(self):
        return self.per_parameter.shape[0]

    def __getitem__(self, j):
        return self.per_parameter[j]


@dataclass(frozen=True)
class LogDifferentialPair:
    """``d ln p`` and ``d alpha`` per parameter, zero outside ``support_mask``."""

    dlnp: np.ndarray
    dalpha: np.ndarray
    support_mask: np.ndarray
    boundary_mask: np.ndarray

    @property
    def on_boundary(self) -> bool:
        return bool(self.boundary_mask.any())


def pick_tol(mode: str, analytic: float, fd: float) -> float:
    return analytic if mode == "analytic" else fd


def default_steps(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return FD_STEP_SCALE * np.maximum(1.0, np.abs(theta))


def differentiate(model: _Model, theta) -> Differential:
    """Partial derivatives of ``model`` at ``theta``.

    Uses the model's analytic jacobian when present, otherwise a central
    two-point stencil with steps ``cbrt(eps) * max(1, |theta_j|)`` (or the
    model's own ``fd_steps`` for tabulated input).
    """
    theta = model.check_domain(theta)
    value = model.evaluate(theta)
    if model.jacobian is not None:
        return Differential(value, model.partials(theta), "analytic")

    steps = (np.asarray(model.fd_steps, dtype=float) if model.fd_steps is not None
             else default_steps(theta))
    partials = np.empty((theta.size,) + value.shape, dtype=value.dtype)
    gap = 0.0
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = steps[j]
        try:
            plus = model.evaluate(theta + e)
            minus = model.evaluate(theta - e)
        except DomainError as exc:
            raise DomainError(
                f"finite-difference stencil for {model.param_name(j)} leaves the admissible "
                f"domain (step {steps[j]:.3e}): {exc}",
                parameter=model.param_name(j),
            ) from exc
        partials[j] = (plus - minus) / (2 * steps[j])
        forward = (plus - value) / steps[j]
        backward = (value - minus) / steps[j]
        scale = max(np.max(np.abs(partials[j]), initial=0.0),
                    np.max(np.abs(value), initial=0.0), np.finfo(float).tiny)
        gap = max(gap, float(np.max(np.abs(forward - backward), initial=0.0) / scale))

    if gap > ONE_SIDED_TOL:
        warnings.warn(
            f"{model.name or 'model'}: one-sided difference quotients disagree by "
            f"{gap:.2e} (relative); the map may not be C1 at theta={theta.tolist()}",
            FiniteDifferenceWarning, stacklevel=2,
        )
    return Differential(value, partials, "finite_difference", steps, gap)


def support_mask(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return p >= SUPP_TOL * p.max()


def log_differentials(model: PureStateModel, theta, diff: Differential | None = None) -> LogDifferentialPair:
    """``d ln p = 2 Re(dpsi/psi)`` and ``d alpha = Im(dpsi/psi)`` on the support.

    The phase derivative never goes through ``arg(psi)``, so there is no
    branch cut to unwrap.
    """
    if diff is None:
        diff = differentiate(model, theta)
    psi = diff.value
    dpsi = diff.per_parameter
    p = np.abs(psi) ** 2
    mask = support_mask(p)

    ratio = np.zeros_like(dpsi)
    ratio[:, mask] = dpsi[:, mask] / psi[mask]
    dlnp = 2.0 * ratio.real
    dalpha = ratio.imag.copy()

    dp = 2.0 * np.real(np.conj(psi) * dpsi)
    off = ~mask
    boundary = off & (np.any(np.abs(dp) > BOUNDARY_TOL, axis=0)
                      | np.any(np.abs(dpsi) > BOUNDARY_TOL, axis=0))
    if boundary.any():
        warnings.warn(
            f"{model.name or 'model'}: {int(boundary.sum())} sample point(s) on the boundary "
            "of the support; logarithmic quantities drop their contribution",
            SupportBoundaryWarning, stacklevel=2,
        )
    return LogDifferentialPair(dlnp, dalpha, mask, boundary)


def check_normalization_differential(model: PureStateModel, theta, diff: Differential | None = None) -> float:
    """``max_j |Re <psi|d_j psi>|``; zero whenever the norm is constant in theta."""
    if diff is None:
        diff = differentiate(model, theta)
    overlaps = model.space.integrate(np.conj(diff.value) * diff.per_parameter)
    return float(np.max(np.abs(overlaps.real)))


def reconstruction_defect(model: PureStateModel, theta, diff: Differential | None = None,
                          logs: LogDifferentialPair | None = None) -> float:
    """Max deviation of ``(dlnp/2 + i dalpha) psi`` from ``dpsi`` on the support."""
    if diff is None:
        diff = differentiate(model, theta)
    if logs is None:
        logs = log_differentials(model, theta, diff)
    m = logs.support_mask
    rebuilt = (0.5 * logs.dlnp[:, m] + 1j * logs.dalpha[:, m]) * diff.value[m]
    return float(np.max(np.abs(rebuilt - diff.per_parameter[:, m]), initial=0.0))

"""Sample spaces, parametrized model kinds and the Hermitian tensor container.

Every model wraps a vectorized callable ``theta -> values`` where ``values``
covers the whole sample space (or the whole density matrix) at once.  An
optional ``jacobian`` callable returns the stacked partial derivatives
``(m, *values.shape)``; models without one are differentiated by central
finite differences (see :mod:`qfisher.numdiff`).
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, ValidationError

NORM_TOL_ANALYTIC = 1e-10
NORM_TOL_TABULATED = 1e-8
HERM_TOL = 1e-10
PSD_TOL = 1e-10

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SampleSpace:
    """Finite sample space: labels ``x_i`` with positive quadrature weights ``w_i``."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if points.size < 1:
            raise ValidationError("sample space needs at least one point")
        if points.shape != weights.shape:
            raise ValidationError(
                f"points and weights differ in length ({points.size} vs {weights.size})"
            )
        if not np.all(np.isfinite(points)) or not np.all(np.isfinite(weights)):
            raise ValidationError("sample points and weights must be finite")
        if np.any(weights <= 0):
            raise ValidationError("quadrature weights must be strictly positive")
        if np.unique(points).size != points.size:
            raise ValidationError("sample points must be pairwise distinct")
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.points.size

    def integrate(self, values):
        """Quadrature sum over the last axis: ``sum_i w_i values[..., i]``."""
        return np.asarray(values) @ self.weights

    @classmethod
    def counting(cls, points):
        """Discrete space with unit weights."""
        points = np.asarray(points, dtype=float)
        return cls(points, np.ones_like(points))

    @classmethod
    def trapezoid(cls, start, stop, step):
        """Uniform grid on ``[start, stop]`` with trapezoidal weights."""
        n = int(round((stop - start) / step)) + 1
        if n < 2:
            raise ValidationError("trapezoid grid needs at least two points")
        points = np.linspace(start, stop, n)
        h = (stop - start) / (n - 1)
        weights = np.full(n, h)
        weights[0] = weights[-1] = h / 2
        return cls(points, weights)


def as_parameters(theta, dim: Optional[int] = None) -> np.ndarray:
    """Coerce ``theta`` to a finite 1-d float array of length ``dim``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.ndim != 1 or theta.size < 1:
        raise ValidationError("parameter vector must be 1-d with at least one entry")
    if dim is not None and theta.size != dim:
        raise ValidationError(f"expected {dim} parameters, got {theta.size}")
    if not np.all(np.isfinite(theta)):
        raise ValidationError(f"parameter vector has non-finite entries: {theta}")
    return theta


@dataclass(frozen=True, kw_only=True)
class _Model:
    func: ArrayFn
    dim_params: int
    jacobian: Optional[ArrayFn] = None
    bounds: Optional[Sequence[tuple[float, float]]] = None
    param_names: Optional[Sequence[str]] = None
    norm_tol: float = NORM_TOL_ANALYTIC
    fd_steps: Optional[Sequence[float]] = None
    name: str = ""

    @property
    def derivative_mode(self) -> str:
        return "analytic" if self.jacobian is not None else "finite_difference"

    def param_name(self, j: int) -> str:
        if self.param_names is not None:
            return self.param_names[j]
        return f"theta_{j + 1}"

    def check_domain(self, theta) -> np.ndarray:
        theta = as_parameters(theta, self.dim_params)
        if self.bounds is not None:
            for j, (lo, hi) in enumerate(self.bounds):
                if not lo < theta[j] < hi:
                    raise DomainError(
                        f"{self.name or 'model'}: parameter {self.param_name(j)}="
                        f"{theta[j]!r} outside admissible interval ({lo}, {hi})",
                        parameter=self.param_name(j),
                    )
        return theta

    def evaluate(self, theta) -> np.ndarray:
        return np.asarray(self.func(self.check_domain(theta)))

    def partials(self, theta) -> np.ndarray:
        """Analytic partial derivatives, shape ``(m, *value_shape)``."""
        if self.jacobian is None:
            raise ValidationError(f"{self.name or 'model'} has no analytic derivative")
        return np.asarray(self.jacobian(self.check_domain(theta)))

    def with_fd(self):
        """Copy of this model that is differentiated numerically."""
        return dataclasses.replace(self, jacobian=None)

    def sample_parameters(self, rng: np.random.Generator, scale: float = 3.0) -> np.ndarray:
        """Draw a random admissible parameter point (bounded away from the edges)."""
        out = np.empty(self.dim_params)
        for j in range(self.dim_params):
            lo, hi = self.bounds[j] if self.bounds is not None else (-np.inf, np.inf)
            lo, hi = max(lo, -scale), min(hi, scale)
            pad = 0.05 * (hi - lo)
            out[j] = rng.uniform(lo + pad, hi - pad)
        return out


@dataclass(frozen=True, kw_only=True)
class ProbabilityModel(_Model):
    """``theta -> p(x_i; theta)``, a nonnegative density on ``space``."""

    space: SampleSpace

    def validate(self, theta) -> np.ndarray:
        p = self.evaluate(theta)
        if p.shape != (len(self.space),):
            raise ValidationError(f"density has shape {p.shape}, expected ({len(self.space)},)")
        if np.any(p < 0):
            raise ValidationError(f"negative probability {p.min()!r}")
        defect = abs(self.space.integrate(p) - 1.0)
        if defect > self.norm_tol:
            raise ValidationError(f"density not normalized (defect {defect:.3e})")
        return p


@dataclass(frozen=True, kw_only=True)
class PureStateModel(_Model):
    """``theta -> psi(x_i; theta)``, complex amplitudes normalized on ``space``."""

    space: SampleSpace

    def evaluate(self, theta) -> np.ndarray:
        return np.asarray(super().evaluate(theta), dtype=complex)

    def partials(self, theta) -> np.ndarray:
        return np.asarray(super().partials(theta), dtype=complex)

    def norm(self, theta) -> float:
        psi = self.evaluate(theta)
        return float(self.space.integrate(np.abs(psi) ** 2))

    def validate(self, theta) -> np.ndarray:
        psi = self.evaluate(theta)
        if psi.shape != (len(self.space),):
            raise ValidationError(f"amplitudes have shape {psi.shape}, expected ({len(self.space)},)")
        defect = abs(self.space.integrate(np.abs(psi) ** 2) - 1.0)
        if defect > self.norm_tol:
            raise ValidationError(f"state not normalized (defect {defect:.3e})")
        return psi


@dataclass(frozen=True, kw_only=True)
class DensityModel(_Model):
    """``theta -> rho(theta)``, an ``n x n`` density matrix."""

    dim_hilbert: int
    herm_tol: float = HERM_TOL
    psd_tol: float = PSD_TOL

    def evaluate(self, theta) -> np.ndarray:
        return np.asarray(super().evaluate(theta), dtype=complex)

    def partials(self, theta) -> np.ndarray:
        return np.asarray(super().partials(theta), dtype=complex)

    def validate(self, theta) -> np.ndarray:
        rho = self.evaluate(theta)
        validate_density(rho, self.herm_tol, self.psd_tol, self.norm_tol)
        return rho


def validate_density(rho, herm_tol=HERM_TOL, psd_tol=PSD_TOL, trace_tol=NORM_TOL_ANALYTIC):
    """Raise :class:`ValidationError` unless ``rho`` is Hermitian, PSD and unit-trace."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"density matrix must be square, got shape {rho.shape}")
    asym = np.max(np.abs(rho - rho.conj().T))
    if asym > herm_tol:
        raise ValidationError(f"density matrix not Hermitian (max |rho - rho^H| = {asym:.3e})")
    if not np.any(rho - np.diag(np.diag(rho))):
        lam_min = np.diag(rho).real.min()
    else:
        lam_min = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if lam_min < -psd_tol:
        raise ValidationError(f"density matrix has negative eigenvalue {lam_min:.3e}")
    defect = abs(np.trace(rho) - 1.0)
    if defect > trace_tol:
        raise ValidationError(f"density matrix trace defect {defect:.3e}")


@dataclass(frozen=True)
class HermitianTensor:
    """Complex ``m x m`` tensor ``H = G - i*Omega`` over parameter indices."""

    entries: np.ndarray

    @property
    def real_part(self) -> np.ndarray:
        """Symmetric part ``G``."""
        return self.entries.real.copy()

    @property
    def imag_part_negated(self) -> np.ndarray:
        """Antisymmetric part ``Omega = -Im H``."""
        return -self.entries.imag

    @property
    def shape(self):
        return self.entries.shape

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))


# -- conversions between model kinds -------------------------------------------------

def pure_to_probability(model: PureStateModel) -> ProbabilityModel:
    """The density ``|psi|^2`` of a pure-state model."""

    def func(theta):
        return np.abs(model.func(theta)) ** 2

    jac = None
    if model.jacobian is not None:
        def jac(theta):
            psi = np.asarray(model.func(theta), dtype=complex)
            return 2.0 * np.real(np.conj(psi) * np.asarray(model.jacobian(theta)))

    return ProbabilityModel(
        func=func, jacobian=jac, space=model.space, dim_params=model.dim_params,
        bounds=model.bounds, param_names=model.param_names, norm_tol=model.norm_tol,
        fd_steps=model.fd_steps, name=f"|{model.name}|^2" if model.name else "",
    )


def pure_to_density(model: PureStateModel) -> DensityModel:
    """``rho = |u><u|`` with ``u_i = sqrt(w_i) psi_i`` (weights absorbed into the basis)."""
    sqrt_w = np.sqrt(model.space.weights)

    def func(theta):
        u = sqrt_w * np.asarray(model.func(theta), dtype=complex)
        return np.outer(u, u.conj())

    jac = None
    if model.jacobian is not None:
        def jac(theta):
            u = sqrt_w * np.asarray(model.func(theta), dtype=complex)
            du = sqrt_w * np.asarray(model.jacobian(theta), dtype=complex)
            outer = du[:, :, None] * u.conj()[None, None, :]
            return outer + np.conj(np.swapaxes(outer, 1, 2))

    return DensityModel(
        func=func, jacobian=jac, dim_hilbert=len(model.space), dim_params=model.dim_params,
        bounds=model.bounds, param_names=model.param_names, norm_tol=model.norm_tol,
        fd_steps=model.fd_steps, name=f"proj({model.name})" if model.name else "",
    )


def probability_to_density(model: ProbabilityModel) -> DensityModel:
    """Diagonal density matrix ``diag(w_i p_i)``."""
    w = model.space.weights

    def func(theta):
        return np.diag(w * np.asarray(model.func(theta), dtype=float)).astype(complex)

    jac = None
    if model.jacobian is not None:
        def jac(theta):
            dp = np.asarray(model.jacobian(theta), dtype=float)
            return np.stack([np.diag(w * row) for row in dp]).astype(complex)

    return DensityModel(
        func=func, jacobian=jac, dim_hilbert=len(model.space), dim_params=model.dim_params,
        bounds=model.bounds, param_names=model.param_names, norm_tol=model.norm_tol,
        fd_steps=model.fd_steps, name=f"diag({model.name})" if model.name else "",
    )


__all__ = [
    "SampleSpace", "as_parameters", "ProbabilityModel", "PureStateModel", "DensityModel",
    "HermitianTensor", "validate_density", "pure_to_probability", "pure_to_density",
    "probability_to_density", "NORM_TOL_ANALYTIC", "NORM_TOL_TABULATED",
]

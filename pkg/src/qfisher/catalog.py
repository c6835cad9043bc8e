"""Built-in models with closed-form derivatives, used as fixtures and CLI catalog entries."""
from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .errors import ValidationError
from .models import (
    NORM_TOL_TABULATED, DensityModel, ProbabilityModel, PureStateModel, SampleSpace,
)


def make_bernoulli() -> ProbabilityModel:
    space = SampleSpace.counting([0.0, 1.0])

    def func(theta):
        return np.array([1.0 - theta[0], theta[0]])

    def jac(theta):
        return np.array([[-1.0, 1.0]])

    return ProbabilityModel(func=func, jacobian=jac, space=space, dim_params=1,
                            bounds=[(0.0, 1.0)], param_names=["theta"], name="bernoulli")


def make_qubit() -> PureStateModel:
    """``psi = (cos(theta/2), sin(theta/2) e^{i phi})`` on ``X = {0, 1}``."""
    space = SampleSpace.counting([0.0, 1.0])

    def func(t):
        theta, phi = t
        return np.array([np.cos(theta / 2), np.sin(theta / 2) * np.exp(1j * phi)])

    def jac(t):
        theta, phi = t
        e = np.exp(1j * phi)
        return np.array([
            [-np.sin(theta / 2) / 2, np.cos(theta / 2) / 2 * e],
            [0.0, 1j * np.sin(theta / 2) * e],
        ])

    return PureStateModel(func=func, jacobian=jac, space=space, dim_params=2,
                          param_names=["theta", "phi"], name="qubit")


def make_phase_encoding(base_density, alphas, points=None) -> PureStateModel:
    """``psi(x; phi) = sqrt(p(x)) exp(i alpha(x) phi)`` with a phi-independent ``p``."""
    p = np.asarray(base_density, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    if p.ndim != 1 or alphas.shape != p.shape:
        raise ValidationError("base_density and alphas must be 1-d of equal length")
    if np.any(p < 0):
        raise ValidationError("base_density must be nonnegative")
    space = SampleSpace.counting(np.arange(p.size) if points is None else points)
    if len(space) != p.size:
        raise ValidationError("points must match base_density in length")
    defect = abs(space.integrate(p) - 1.0)
    if defect > NORM_TOL_TABULATED:
        raise ValidationError(f"base_density not normalized (defect {defect:.3e})")
    amp = np.sqrt(p)

    def func(t):
        return amp * np.exp(1j * alphas * t[0])

    def jac(t):
        return (1j * alphas * func(t))[None, :]

    return PureStateModel(func=func, jacobian=jac, space=space, dim_params=1,
                          param_names=["phi"], name="phase_encoding")


def make_gaussian_grid(sigma: float, grid: SampleSpace) -> ProbabilityModel:
    """Gaussian with unknown mean, renormalized on ``grid`` so that ``sum w p = 1``."""
    if not sigma > 0:
        raise ValidationError(f"sigma must be positive, got {sigma!r}")
    x, w = grid.points, grid.weights

    def func(t):
        e = np.exp(-((x - t[0]) ** 2) / (2 * sigma**2))
        return e / (w @ e)

    def jac(t):
        p = func(t)
        s = (x - t[0]) / sigma**2
        return (p * (s - (w * p) @ s))[None, :]

    return ProbabilityModel(func=func, jacobian=jac, space=grid, dim_params=1,
                            param_names=["mu"], name="gaussian_grid")


# -- random generators for property sweeps ----------------------------------------

def _random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (A + A.conj().T) / (2 * np.sqrt(n))


class _Rotations:
    """``W(theta) = exp(-i theta_1 G_1) ... exp(-i theta_m G_m)`` and its partials."""

    def __init__(self, rng, n, m):
        self.gens = [_random_hermitian(rng, n) for _ in range(m)]
        self.eigs = [np.linalg.eigh(G) for G in self.gens]

    def factors(self, theta):
        return [U @ np.diag(np.exp(-1j * t * e)) @ U.conj().T
                for t, (e, U) in zip(theta, self.eigs)]

    def value_and_partials(self, theta):
        facs = self.factors(theta)
        n = facs[0].shape[0]
        W = np.eye(n, dtype=complex)
        for F in facs:
            W = W @ F
        dW = []
        for j in range(len(facs)):
            P = np.eye(n, dtype=complex)
            for k, F in enumerate(facs):
                P = P @ (-1j * self.gens[j] @ F if k == j else F)
            dW.append(P)
        return W, np.array(dW)


def make_random_pure(n: int, m: int, seed: int) -> PureStateModel:
    """Fixed random unit vector carried by ``m`` random unitary rotations."""
    if n < 2 or m < 1:
        raise ValidationError("random pure model needs n >= 2 and m >= 1")
    rng = np.random.default_rng(seed)
    rot = _Rotations(rng, n, m)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    v /= np.linalg.norm(v)

    def func(theta):
        return rot.value_and_partials(theta)[0] @ v

    def jac(theta):
        return rot.value_and_partials(theta)[1] @ v

    return PureStateModel(func=func, jacobian=jac, space=SampleSpace.counting(np.arange(n)),
                          dim_params=m, name=f"random_pure(n={n},m={m},seed={seed})")


def make_random_real_pure(n: int, m: int, seed: int) -> PureStateModel:
    """Strictly positive real amplitudes ``sqrt(softmax(A theta + b))``; no phase at all."""
    if n < 2 or m < 1:
        raise ValidationError("random real model needs n >= 2 and m >= 1")
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, m))
    b = rng.normal(size=n)

    def probs(theta):
        z = A @ theta + b
        z = np.exp(z - z.max())
        return z / z.sum()

    def func(theta):
        return np.sqrt(probs(theta)).astype(complex)

    def jac(theta):
        p = probs(theta)
        centered = A - p @ A  # (n, m)
        return (0.5 * np.sqrt(p)[:, None] * centered).T.astype(complex)

    return PureStateModel(func=func, jacobian=jac, space=SampleSpace.counting(np.arange(n)),
                          dim_params=m, name=f"random_real_pure(n={n},m={m},seed={seed})")


def make_random_density(n: int, m: int, seed: int) -> DensityModel:
    """Full-rank ``W(theta) diag(softmax(B theta + c)) W(theta)^H``."""
    if n < 2 or m < 1:
        raise ValidationError("random density model needs n >= 2 and m >= 1")
    rng = np.random.default_rng(seed)
    rot = _Rotations(rng, n, m)
    B = rng.normal(size=(n, m))
    c = rng.normal(size=n)

    def spectrum(theta):
        z = B @ theta + c
        z = np.exp(z - z.max())
        return z / z.sum()

    def func(theta):
        W, _ = rot.value_and_partials(theta)
        return (W * spectrum(theta)) @ W.conj().T

    def jac(theta):
        W, dW = rot.value_and_partials(theta)
        lam = spectrum(theta)
        dlam = lam[:, None] * (B - lam @ B)  # (n, m)
        out = []
        for j in range(len(theta)):
            term = (dW[j] * lam) @ W.conj().T
            out.append(term + term.conj().T + (W * dlam[:, j]) @ W.conj().T)
        return np.array(out)

    return DensityModel(func=func, jacobian=jac, dim_hilbert=n, dim_params=m,
                        name=f"random_density(n={n},m={m},seed={seed})")


# -- registry used by the CLI ---------------------------------------------------------

class CatalogEntry(NamedTuple):
    kind: str
    build: Callable[..., object]
    defaults: dict
    summary: str


def _gaussian_from_params(sigma=1.0, start=-8.0, stop=8.0, step=0.01):
    return make_gaussian_grid(sigma, SampleSpace.trapezoid(start, stop, step))


CATALOG: dict[str, CatalogEntry] = {
    "bernoulli": CatalogEntry(
        "probability", make_bernoulli, {}, "p = (1 - theta, theta) on {0, 1}, theta in (0, 1)"),
    "qubit": CatalogEntry(
        "pure_state", make_qubit, {}, "psi = (cos(theta/2), sin(theta/2) e^{i phi})"),
    "phase_encoding": CatalogEntry(
        "pure_state", make_phase_encoding,
        {"base_density": [0.25, 0.5, 0.25], "alphas": [-1.0, 0.0, 1.0], "points": [-1.0, 0.0, 1.0]},
        "psi = sqrt(p) exp(i alpha(x) phi) with phi-independent p"),
    "gaussian_grid": CatalogEntry(
        "probability", _gaussian_from_params,
        {"sigma": 1.0, "start": -8.0, "stop": 8.0, "step": 0.01},
        "Gaussian location family renormalized on a trapezoidal grid"),
    "random_pure": CatalogEntry(
        "pure_state", make_random_pure, {"n": 4, "m": 2, "seed": 0},
        "random unit vector under m random unitary rotations"),
    "random_real_pure": CatalogEntry(
        "pure_state", make_random_real_pure, {"n": 4, "m": 2, "seed": 0},
        "positive real amplitudes sqrt(softmax(A theta + b))"),
    "random_density": CatalogEntry(
        "density", make_random_density, {"n": 4, "m": 2, "seed": 0},
        "full-rank density with rotating eigenbasis and moving spectrum"),
}


def build(name: str, params: dict | None = None):
    """Instantiate catalog model ``name`` with ``params`` overriding its defaults."""
    if name not in CATALOG:
        raise ValidationError(f"unknown catalog model {name!r}; known: {sorted(CATALOG)}")
    entry = CATALOG[name]
    kwargs = dict(entry.defaults)
    unknown = set(params or {}) - set(kwargs)
    if unknown:
        raise ValidationError(f"unknown parameter(s) for {name}: {sorted(unknown)}")
    kwargs.update(params or {})
    return entry.build(**kwargs)

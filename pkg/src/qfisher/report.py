"""Model specification files, the identity-check report and the random verification suite.

Spec files and reports are JSON.  Field names are listed in the README and
are part of the stable interface.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import catalog
from .classical import classical_fisher_matrix, score_functions, score_means
from .errors import DomainError, QFisherError, SpecError, ValidationError
from .geometry import CONVENTIONS, decompose, gauge_transform, hermitian_tensor
from .models import (
    NORM_TOL_TABULATED, DensityModel, ProbabilityModel, PureStateModel, SampleSpace,
    as_parameters, probability_to_density, pure_to_probability,
)
from .numdiff import (
    BOUNDARY_TOL, ONE_SIDED_TOL, Differential, check_normalization_differential,
    default_steps, differentiate, reconstruction_defect, support_mask,
)
from .sld import PURITY_TOL, purity_check, pure_state_identities, qfi_tensor, qfi_via_trace, sld_solve

REPORT_FORMAT = "qfisher.report"
REPORT_VERSION = 1
SPEC_KINDS = ("probability", "pure_state", "density", "catalog")

# check name -> (analytic tolerance, finite-difference tolerance, severity when exceeded)
DEFAULT_TOLERANCES: dict[str, tuple[float, float, str]] = {
    "nonnegativity": (0.0, 0.0, "fail"),
    "fisher_psd": (1e-9, 1e-9, "fail"),
    "score_zero_mean": (1e-8, 1e-6, "warn"),
    "support_boundary": (BOUNDARY_TOL, BOUNDARY_TOL, "warn"),
    "fd_one_sided": (ONE_SIDED_TOL, ONE_SIDED_TOL, "warn"),
    "classical_reduction": (1e-9, 1e-9, "fail"),
    "normalization_differential": (1e-12, 1e-7, "fail"),
    "log_reconstruction": (1e-8, 1e-6, "fail"),
    "hermiticity": (1e-12, 1e-8, "fail"),
    "metric_psd": (1e-9, 1e-9, "fail"),
    "assembly_real": (1e-8, 1e-5, "fail"),
    "assembly_imag": (1e-8, 1e-5, "fail"),
    "dominance_psd": (1e-9, 1e-5, "fail"),
    "classical_recovery": (1e-8, 1e-5, "fail"),
    "qfi_three_way": (1e-7, 1e-5, "fail"),
    "sld_residual": (1e-10, 1e-10, "fail"),
    "pure_identity_i": (1e-8, 1e-6, "fail"),
    "pure_identity_ii": (1e-8, 1e-6, "fail"),
    "pure_identity_iii": (1e-8, 1e-6, "fail"),
    "gauge_invariance": (1e-8, 1e-7, "fail"),
    "density_hermiticity": (1e-10, 1e-10, "fail"),
    "density_positivity": (1e-10, 1e-10, "fail"),
    "drho_hermiticity": (1e-10, 1e-10, "fail"),
    "drho_traceless": (1e-10, 1e-6, "fail"),
    "qfi_hermiticity": (1e-10, 1e-8, "fail"),
    "qfi_psd": (1e-9, 1e-9, "fail"),
    "qfi_pure_shortcut": (1e-7, 1e-5, "fail"),
}
# checks whose tolerance is relative to the norm of the matrix they test
RELATIVE_CHECKS = {"fisher_psd", "metric_psd", "qfi_psd"}


# -- spec files -----------------------------------------------------------------------

@dataclass
class ModelSpec:
    kind: str
    theta: np.ndarray
    model: Any
    echo: dict
    tolerances: dict = field(default_factory=dict)


def _field(obj, key, path, required=True, default=None):
    if not isinstance(obj, dict):
        raise SpecError(f"field '{path}': expected an object")
    if key not in obj:
        if required:
            raise SpecError(f"field '{path + '.' if path else ''}{key}': missing")
        return default
    return obj[key]


def _real_array(value, path, ndim=None):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"field '{path}': not a numeric array ({exc})") from None
    if ndim is not None and arr.ndim != ndim:
        raise SpecError(f"field '{path}': expected {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SpecError(f"field '{path}': non-finite entries")
    return arr


def _complex_array(value, path, ndim):
    """``(..., 2)`` arrays of (real, imaginary) pairs -> complex array with ``ndim`` axes."""
    arr = _real_array(value, path)
    if arr.ndim != ndim + 1 or arr.shape[-1] != 2:
        raise SpecError(
            f"field '{path}': expected {ndim}-d array of [real, imag] pairs, got shape {arr.shape}"
        )
    return arr[..., 0] + 1j * arr[..., 1]


def parse_spec_text(text: str, source: str = "<spec>") -> ModelSpec:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return parse_spec(raw)
    except SpecError as exc:
        raise SpecError(f"{source}: {exc}") from None


def load_spec(path) -> ModelSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read spec file {path}: {exc}") from None
    return parse_spec_text(text, str(path))


def parse_spec(raw: dict) -> ModelSpec:
    kind = _field(raw, "kind", "")
    if kind not in SPEC_KINDS:
        raise SpecError(f"field 'kind': must be one of {list(SPEC_KINDS)}, got {kind!r}")
    theta = _real_array(_field(raw, "theta", ""), "theta", ndim=1)
    if theta.size < 1:
        raise SpecError("field 'theta': needs at least one parameter")
    options = _field(raw, "options", "", required=False, default={}) or {}
    tolerances = _field(options, "tolerances", "options", required=False, default={}) or {}
    for name, value in tolerances.items():
        if name not in DEFAULT_TOLERANCES and name != "normalization":
            raise SpecError(f"field 'options.tolerances.{name}': unknown check name")
        if not isinstance(value, (int, float)) or value < 0:
            raise SpecError(f"field 'options.tolerances.{name}': must be a nonnegative number")

    if kind == "catalog":
        name = _field(raw, "catalog_name", "")
        params = _field(raw, "catalog_params", "", required=False, default={}) or {}
        if not isinstance(params, dict):
            raise SpecError("field 'catalog_params': expected an object")
        try:
            model = catalog.build(name, params)
        except ValidationError as exc:
            raise SpecError(f"field 'catalog_name'/'catalog_params': {exc}") from None
        except TypeError as exc:
            raise SpecError(f"field 'catalog_params': {exc}") from None
        model_kind = catalog.CATALOG[name].kind
    else:
        model = _tabulated_model(raw, kind, theta)
        model_kind = kind
    if model.dim_params != theta.size:
        raise SpecError(f"field 'theta': model has {model.dim_params} parameter(s), got {theta.size}")
    return ModelSpec(model_kind, theta, model, raw, dict(tolerances))


def _stencil_lookup(theta, steps, center, plus, minus, name):
    keys = [(theta.copy(), center)]
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = steps[j]
        keys.append((theta + e, plus[j]))
        keys.append((theta - e, minus[j]))

    def func(t):
        t = np.asarray(t, dtype=float)
        for key, table in keys:
            if np.allclose(t, key, rtol=0, atol=1e-15 * max(1.0, float(np.max(np.abs(key))))):
                return table
        raise DomainError(f"{name}: tabulated model is only defined on its stencil, got {t.tolist()}")

    return func


def _tabulated_model(raw, kind, theta):
    m = theta.size
    steps_raw = _field(raw, "steps", "", required=False)
    steps = default_steps(theta) if steps_raw is None else _real_array(steps_raw, "steps", ndim=1)
    if steps.shape != (m,) or np.any(steps <= 0):
        raise SpecError(f"field 'steps': need {m} positive step(s)")
    values = _field(raw, "values", "")
    param_names = _field(raw, "param_names", "", required=False)
    if param_names is not None and len(param_names) != m:
        raise SpecError(f"field 'param_names': need {m} name(s)")

    if kind == "density":
        n = _field(raw, "dim_hilbert", "")
        if not isinstance(n, int) or n < 1:
            raise SpecError("field 'dim_hilbert': must be a positive integer")
        shape, ndim, conv = (n, n), 2, _complex_array
    else:
        points = _real_array(_field(raw, "points", ""), "points", ndim=1)
        weights_raw = _field(raw, "weights", "", required=False)
        weights = np.ones_like(points) if weights_raw is None else _real_array(weights_raw, "weights", ndim=1)
        try:
            space = SampleSpace(points, weights)
        except ValidationError as exc:
            raise SpecError(f"field 'points'/'weights': {exc}") from None
        shape = (len(space),)
        ndim = 1
        conv = _complex_array if kind == "pure_state" else (lambda v, p, d: _real_array(v, p, ndim=d))

    center = conv(_field(values, "center", "values"), "values.center", ndim)
    plus_raw = _field(values, "plus", "values")
    minus_raw = _field(values, "minus", "values")
    if not isinstance(plus_raw, list) or len(plus_raw) != m:
        raise SpecError(f"field 'values.plus': need one table per parameter ({m})")
    if not isinstance(minus_raw, list) or len(minus_raw) != m:
        raise SpecError(f"field 'values.minus': need one table per parameter ({m})")
    plus = [conv(t, f"values.plus[{j}]", ndim) for j, t in enumerate(plus_raw)]
    minus = [conv(t, f"values.minus[{j}]", ndim) for j, t in enumerate(minus_raw)]
    for label, table in [("values.center", center)] + \
            [(f"values.plus[{j}]", t) for j, t in enumerate(plus)] + \
            [(f"values.minus[{j}]", t) for j, t in enumerate(minus)]:
        if table.shape != shape:
            raise SpecError(f"field '{label}': shape {table.shape} does not match {shape}")

    name = raw.get("name", f"tabulated_{kind}")
    func = _stencil_lookup(theta, steps, center, plus, minus, name)
    common = dict(func=func, dim_params=m, param_names=param_names, norm_tol=NORM_TOL_TABULATED,
                  fd_steps=tuple(steps), name=name)
    if kind == "probability":
        return ProbabilityModel(space=space, **common)
    if kind == "pure_state":
        return PureStateModel(space=space, **common)
    return DensityModel(dim_hilbert=shape[0], **common)


# -- checks ---------------------------------------------------------------------------

class _Checks:
    def __init__(self, mode: str, overrides: dict):
        self.mode = mode
        self.overrides = overrides
        self.items: list[dict] = []

    def tol(self, name, scale=1.0):
        if name in self.overrides:
            return float(self.overrides[name])
        analytic, fd, _ = DEFAULT_TOLERANCES[name]
        base = analytic if self.mode == "analytic" else fd
        return base * scale if name in RELATIVE_CHECKS else base

    def add(self, name, residual, scale=1.0):
        tol = self.tol(name, scale)
        residual = float(residual)
        if residual <= tol:
            status = "pass"
        else:
            status = DEFAULT_TOLERANCES[name][2]
        self.items.append({"name": name, "residual": residual, "tolerance": tol, "status": status})

    def not_applicable(self, name, reason):
        self.items.append({"name": name, "residual": None, "tolerance": self.tol(name),
                           "status": "n/a", "reason": reason})


def _neg_eig(mat) -> float:
    mat = np.asarray(mat)
    if mat.size == 0:
        return 0.0
    return max(0.0, -float(np.linalg.eigvalsh((mat + mat.conj().T) / 2).min()))


def _norm(mat) -> float:
    return float(np.max(np.abs(mat), initial=0.0))


def _cplx(mat):
    mat = np.asarray(mat)
    return {"real": mat.real.tolist(), "imag": mat.imag.tolist()}


def _real(mat):
    return np.asarray(mat, dtype=float).tolist()


def _probability_section(model: ProbabilityModel, theta, checks: _Checks, diff: Differential):
    p = np.asarray(diff.value, dtype=float)
    checks.add("nonnegativity", max(0.0, -float(p.min())))
    scores = score_functions(model, theta, diff)
    F = classical_fisher_matrix(model, theta, diff)
    means = score_means(model, theta, diff)
    checks.add("fisher_psd", _neg_eig(F), scale=_norm(F))
    checks.add("score_zero_mean", np.max(np.abs(means)))
    dp = np.asarray(diff.per_parameter, dtype=float)
    off = ~support_mask(p)
    checks.add("support_boundary", np.max(np.abs(dp[:, off]), initial=0.0))
    return F, scores, means


def _fd_section(diff: Differential, checks: _Checks):
    if diff.mode == "analytic":
        checks.not_applicable("fd_one_sided", "analytic derivatives")
    else:
        checks.add("fd_one_sided", diff.one_sided_gap)


def _run_probability(model: ProbabilityModel, theta, checks: _Checks):
    diff = differentiate(model, theta)
    _fd_section(diff, checks)
    F, _, means = _probability_section(model, theta, checks, diff)
    dens = probability_to_density(model)
    rho = dens.evaluate(theta)
    w = model.space.weights
    drho = np.stack([np.diag(w * row) for row in np.asarray(diff.per_parameter, dtype=float)])
    slds = sld_solve(rho, drho, sld_tol=np.inf, trace_tol=np.inf)
    Q = qfi_tensor(rho, slds)
    checks.add("classical_reduction", _norm(Q.metric_part - F))
    return {
        "classical_fisher": _real(F),
        "score_means": _real(means),
        "diagonal_qfi_metric_part": _real(Q.metric_part),
    }


def density_from_pure(space: SampleSpace, diff: Differential):
    """``rho = |u><u|`` and its partials from amplitude partials (chain rule, ``u = sqrt(w) psi``)."""
    sqrt_w = np.sqrt(space.weights)
    u = sqrt_w * diff.value
    du = sqrt_w * diff.per_parameter
    rho = np.outer(u, u.conj())
    outer = du[:, :, None] * u.conj()[None, None, :]
    return rho, outer + np.conj(np.swapaxes(outer, 1, 2))


def _gauge_phase(m):
    """Fixed smooth test phase ``beta(theta) = sum_j sin(theta_j + j) + theta_1 theta_m / 2``."""
    offs = np.arange(m, dtype=float)

    def beta(t):
        return float(np.sum(np.sin(t + offs)) + 0.5 * t[0] * t[-1])

    def dbeta(t):
        g = np.cos(t + offs)
        g[0] += 0.5 * t[-1]
        g[-1] += 0.5 * t[0]
        return g

    return beta, dbeta


def _run_pure(model: PureStateModel, theta, checks: _Checks, mutate: Optional[str] = None):
    diff = differentiate(model, theta)
    _fd_section(diff, checks)
    checks.add("normalization_differential", check_normalization_differential(model, theta, diff))
    checks.add("log_reconstruction", reconstruction_defect(model, theta, diff))

    dec = decompose(model, theta, diff, strict=False)
    H = dec.h.entries
    omega = dec.omega
    res_imag = dec.assembly_residual_imag
    if mutate == "omega-sign":
        omega = -omega
        res_imag = _norm(omega - dec.omega_polar)
    elif mutate is not None:
        raise ValidationError(f"unknown mutation {mutate!r}")
    checks.add("hermiticity", dec.h.hermiticity_defect())
    checks.add("metric_psd", _neg_eig(dec.g), scale=_norm(H))
    checks.add("assembly_real", dec.assembly_residual_real)
    checks.add("assembly_imag", res_imag)
    gap = dec.g - dec.quarter_classical
    checks.add("dominance_psd", _neg_eig(gap), scale=_norm(dec.g))

    prob = pure_to_probability(model)
    pdiff = Differential(np.abs(diff.value) ** 2,
                         2.0 * np.real(np.conj(diff.value) * diff.per_parameter), diff.mode)
    F, _, means = _probability_section(prob, theta, checks, pdiff)
    if dec.dalpha_vanishes():
        checks.add("classical_recovery", _norm(4 * dec.g - F))
    else:
        checks.not_applicable("classical_recovery", "phase differential d alpha is nonzero")

    rho, drho = density_from_pure(model.space, diff)
    slds = sld_solve(rho, drho, sld_tol=np.inf, trace_tol=np.inf,
                     psd_tol=np.inf, herm_tol=np.inf)
    checks.add("sld_residual", float(np.max(slds.residuals, initial=0.0)))
    Q_sld = qfi_tensor(rho, slds)
    Q_trace = qfi_via_trace(rho, drho)
    Q_fast = 4.0 * dec.g
    three = max(_norm(Q_sld.metric_part - Q_trace.metric_part),
                _norm(Q_sld.metric_part - Q_fast),
                _norm(Q_trace.metric_part - Q_fast))
    checks.add("qfi_three_way", three)
    ident = pure_state_identities(rho, drho, require_pure=False)
    checks.add("pure_identity_i", np.max(ident[:, 0]))
    checks.add("pure_identity_ii", np.max(ident[:, 1]))
    checks.add("pure_identity_iii", np.max(ident[:, 2]))

    beta, dbeta = _gauge_phase(model.dim_params)
    gauged = gauge_transform(model, beta, dbeta)
    H_gauged = hermitian_tensor(gauged, theta).entries
    checks.add("gauge_invariance", _norm(H_gauged - H))

    return {
        "classical_fisher": _real(F),
        "score_means": _real(means),
        "hermitian_tensor": _cplx(H),
        "g": _real(dec.g),
        "omega": _real(omega),
        "omega_polar": _real(dec.omega_polar),
        "quarter_classical": _real(dec.quarter_classical),
        "alpha_covariance": _real(dec.alpha_covariance),
        "mean_dalpha": _real(dec.mean_dalpha),
        "dominance_gap": _real(gap),
        "qfi": {
            "Q": _cplx(Q_sld.entries),
            "metric_part": _real(Q_sld.metric_part),
            "asym_part": _real(Q_sld.asym_part),
            "sld_residuals": _real(slds.residuals),
            "support_rank": slds.support_rank,
        },
    }


def _run_density(model: DensityModel, theta, checks: _Checks):
    diff = differentiate(model, theta)
    _fd_section(diff, checks)
    rho = diff.value
    drho = diff.per_parameter
    checks.add("density_hermiticity", _norm(rho - rho.conj().T))
    checks.add("density_positivity", _neg_eig(rho))
    checks.add("drho_hermiticity", max(_norm(d - d.conj().T) for d in drho))
    checks.add("drho_traceless", max(abs(np.trace(d)) for d in drho))
    slds = sld_solve(rho, drho, sld_tol=np.inf, trace_tol=np.inf, herm_tol=np.inf,
                     psd_tol=np.inf)
    checks.add("sld_residual", float(np.max(slds.residuals, initial=0.0)))
    Q = qfi_tensor(rho, slds)
    checks.add("qfi_hermiticity", _norm(Q.entries - Q.entries.conj().T))
    checks.add("qfi_psd", _neg_eig(Q.metric_part), scale=_norm(Q.metric_part))
    purity = purity_check(rho)
    if purity <= PURITY_TOL:
        ident = pure_state_identities(rho, drho)
        checks.add("pure_identity_i", np.max(ident[:, 0]))
        checks.add("pure_identity_ii", np.max(ident[:, 1]))
        checks.add("pure_identity_iii", np.max(ident[:, 2]))
        checks.add("qfi_pure_shortcut", _norm(Q.metric_part - qfi_via_trace(rho, drho).metric_part))
    else:
        for name in ("pure_identity_i", "pure_identity_ii", "pure_identity_iii", "qfi_pure_shortcut"):
            checks.not_applicable(name, "state is mixed")
    return {
        "purity_defect": purity,
        "qfi": {
            "Q": _cplx(Q.entries),
            "metric_part": _real(Q.metric_part),
            "asym_part": _real(Q.asym_part),
            "sld_residuals": _real(slds.residuals),
            "support_rank": slds.support_rank,
        },
    }


def _normalization_check(model, theta, checks: _Checks):
    value = model.evaluate(theta)
    if isinstance(model, DensityModel):
        defect = abs(np.trace(value) - 1.0)
    elif isinstance(model, PureStateModel):
        defect = abs(model.space.integrate(np.abs(value) ** 2) - 1.0)
    else:
        defect = abs(model.space.integrate(value) - 1.0)
    tol = float(checks.overrides.get("normalization", model.norm_tol))
    checks.items.append({"name": "normalization", "residual": float(defect), "tolerance": tol,
                         "status": "pass" if defect <= tol else "fail"})


def evaluate_model(model, theta, kind: str, tolerances: Optional[dict] = None,
                   mutate: Optional[str] = None):
    """Run every check for ``model`` at ``theta``; returns ``(results, checks, diagnostics)``."""
    theta = as_parameters(theta, model.dim_params)
    checks = _Checks(model.derivative_mode, tolerances or {})
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        _normalization_check(model, theta, checks)
        if kind == "probability":
            results = _run_probability(model, theta, checks)
        elif kind == "pure_state":
            results = _run_pure(model, theta, checks, mutate)
        elif kind == "density":
            results = _run_density(model, theta, checks)
        else:
            raise ValidationError(f"unknown model kind {kind!r}")
    diagnostics = sorted({f"{w.category.__name__}: {w.message}" for w in caught})
    return results, checks.items, diagnostics


def summarize(checks) -> dict:
    counts = {"pass": 0, "warn": 0, "fail": 0, "n/a": 0}
    for c in checks:
        counts[c["status"]] += 1
    status = "fail" if counts["fail"] else "warn" if counts["warn"] else "pass"
    return {**counts, "status": status}


def run(spec: ModelSpec, mutate: Optional[str] = None) -> dict:
    """Full report for one model specification."""
    model = spec.model
    results, checks, diagnostics = evaluate_model(model, spec.theta, spec.kind, spec.tolerances, mutate)
    echo = {
        "spec": spec.echo,
        "kind": spec.kind,
        "name": model.name,
        "dim_params": model.dim_params,
        "param_names": [model.param_name(j) for j in range(model.dim_params)],
        "derivative_mode": model.derivative_mode,
    }
    return {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "model": echo,
        "conventions": CONVENTIONS,
        "results": results,
        "checks": checks,
        "diagnostics": diagnostics,
        "summary": summarize(checks),
    }


def render(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=True) + "\n"


EXIT_CODES = {"pass": 0, "warn": 1, "fail": 2}
EXIT_INPUT_ERROR = 3


def exit_code(report_or_summary: dict) -> int:
    summary = report_or_summary.get("summary", report_or_summary)
    return EXIT_CODES[summary["status"]]


# -- batch verification ---------------------------------------------------------------

def _suite_models(rng: np.random.Generator):
    n = int(rng.integers(2, 9))
    m = int(rng.integers(1, 4))
    s = int(rng.integers(2**31))
    pure = catalog.make_random_pure(n, m, s)
    real = catalog.make_random_real_pure(n, m, s)
    dens = catalog.make_random_density(n, m, s)
    return [
        ("pure_state", pure),
        ("pure_state", pure.with_fd()),
        ("pure_state", real),
        ("pure_state", real.with_fd()),
        ("density", dens),
        ("probability", pure_to_probability(real)),
    ]


def verify_suite(seed: int, count: int, mutate: Optional[str] = None) -> dict:
    """Run every check over ``count`` batches of random models; deterministic per seed."""
    if not isinstance(count, (int, np.integer)) or count < 1:
        raise ValidationError(f"count must be a positive integer, got {count!r}")
    rng = np.random.default_rng(seed)
    totals = {"pass": 0, "warn": 0, "fail": 0, "n/a": 0}
    failures = []
    n_models = 0
    for i in range(count):
        for kind, model in _suite_models(rng):
            theta = model.sample_parameters(rng)
            try:
                _, checks, _ = evaluate_model(model, theta, kind,
                                              mutate=mutate if kind == "pure_state" else None)
            except QFisherError as exc:
                totals["fail"] += 1
                failures.append(f"[{i}] {model.name}: {type(exc).__name__}: {exc}")
                continue
            n_models += 1
            for c in checks:
                totals[c["status"]] += 1
                if c["status"] in ("fail", "warn"):
                    failures.append(f"[{i}] {model.name} ({model.derivative_mode}): "
                                    f"{c['name']} {c['status']} ({c['residual']:.3e} > {c['tolerance']:.1e})")
    status = "fail" if totals["fail"] else "warn" if totals["warn"] else "pass"
    return {"seed": seed, "count": count, "models": n_models, "mutation": mutate,
            "checks": totals, "status": status, "problems": failures}

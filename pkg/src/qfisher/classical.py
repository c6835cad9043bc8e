"""Expectations under a density and the classical Fisher information matrix."""
from __future__ import annotations

import warnings

import numpy as np

from .errors import SupportBoundaryWarning, ValidationError
from .models import ProbabilityModel, SampleSpace
from .numdiff import BOUNDARY_TOL, Differential, differentiate, support_mask

SCORE_TOL_ANALYTIC = 1e-8
SCORE_TOL_FD = 1e-6


def expectation(space: SampleSpace, p, f):
    """``E_p[f] = sum_i w_i f_i p_i``; ``f`` may carry leading batch axes."""
    p = np.asarray(p)
    f = np.asarray(f)
    if p.shape != (len(space),) or f.shape[-1:] != p.shape:
        raise ValidationError(
            f"length mismatch: space has {len(space)} points, p {p.shape}, f {f.shape}"
        )
    return space.integrate(f * p)


def score_functions(model: ProbabilityModel, theta, diff: Differential | None = None) -> np.ndarray:
    """Scores ``d_j ln p`` as an ``(m, N)`` array, zero off the support."""
    if diff is None:
        diff = differentiate(model, theta)
    p = np.asarray(diff.value, dtype=float)
    dp = np.asarray(diff.per_parameter, dtype=float)
    mask = support_mask(p)
    scores = np.zeros_like(dp)
    scores[:, mask] = dp[:, mask] / p[mask]
    edge = ~mask & np.any(np.abs(dp) > BOUNDARY_TOL, axis=0)
    if edge.any():
        warnings.warn(
            f"{model.name or 'model'}: density vanishes at {int(edge.sum())} point(s) where its "
            "derivative does not; Fisher information may diverge",
            SupportBoundaryWarning, stacklevel=2,
        )
    return scores


def fisher_from_scores(space: SampleSpace, p, scores) -> np.ndarray:
    scores = np.asarray(scores)
    F = (scores * (space.weights * p)) @ scores.T
    return (F + F.T) / 2


def classical_fisher_matrix(model: ProbabilityModel, theta, diff: Differential | None = None) -> np.ndarray:
    """``F_jk = E_p[d_j ln p * d_k ln p]``, exactly symmetric."""
    if diff is None:
        diff = differentiate(model, theta)
    scores = score_functions(model, theta, diff)
    return fisher_from_scores(model.space, np.asarray(diff.value, dtype=float), scores)


def score_means(model: ProbabilityModel, theta, diff: Differential | None = None) -> np.ndarray:
    """``E_p[d_j ln p]`` per parameter; zero for a normalized family."""
    if diff is None:
        diff = differentiate(model, theta)
    scores = score_functions(model, theta, diff)
    return expectation(model.space, np.asarray(diff.value, dtype=float), scores)

"""Rebuild the golden spec and report files.

    python tests/golden/regenerate.py

Only run this after an intentional change to the report format or values;
review the diff of every *.report.json before committing.
"""
import json
from pathlib import Path

import numpy as np

from qfisher import catalog
from qfisher.cli import main
from qfisher.numdiff import default_steps

HERE = Path(__file__).parent

CATALOG_SPECS = {
    "bernoulli": {"kind": "catalog", "catalog_name": "bernoulli", "theta": [0.5]},
    "qubit": {"kind": "catalog", "catalog_name": "qubit", "theta": [np.pi / 2, 0.0]},
    "phase_encoding": {"kind": "catalog", "catalog_name": "phase_encoding", "theta": [0.3]},
    "random_density": {"kind": "catalog", "catalog_name": "random_density",
                       "catalog_params": {"n": 3, "m": 2, "seed": 5}, "theta": [0.2, -0.4]},
}


def _pairs(z):
    z = np.asarray(z, dtype=complex)
    return np.stack([z.real, z.imag], axis=-1).tolist()


def _stencil(model, theta):
    theta = np.asarray(theta, dtype=float)
    steps = default_steps(theta)
    plus, minus = [], []
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = steps[j]
        plus.append(model.evaluate(theta + e))
        minus.append(model.evaluate(theta - e))
    return model.evaluate(theta), plus, minus


def tabulated_pure():
    model = catalog.make_qubit()
    theta = [1.0, 0.4]
    c, p, m = _stencil(model, theta)
    return {
        "kind": "pure_state", "name": "tabulated_qubit",
        "points": [0.0, 1.0], "weights": [1.0, 1.0], "theta": theta,
        "param_names": ["theta", "phi"],
        "values": {"center": _pairs(c), "plus": [_pairs(v) for v in p], "minus": [_pairs(v) for v in m]},
    }


def tabulated_probability_leaky():
    """Bernoulli table whose normalization drifts by 5e-9 across the stencil: warns, never fails."""
    model = catalog.make_bernoulli()
    theta = [0.3]
    c, p, m = _stencil(model, theta)
    p[0] = p[0] + np.array([0.0, 5e-9])
    m[0] = m[0] - np.array([0.0, 5e-9])
    return {
        "kind": "probability", "name": "leaky_bernoulli", "points": [0.0, 1.0], "theta": theta,
        "values": {"center": c.tolist(), "plus": [v.tolist() for v in p], "minus": [v.tolist() for v in m]},
    }


def tabulated_density():
    model = catalog.make_random_density(3, 1, seed=9)
    theta = [0.25]
    c, p, m = _stencil(model, theta)
    return {
        "kind": "density", "name": "tabulated_density", "dim_hilbert": 3, "theta": theta,
        "values": {"center": _pairs(c), "plus": [_pairs(v) for v in p], "minus": [_pairs(v) for v in m]},
        "options": {"tolerances": {"drho_traceless": 1e-9}},
    }


def main_():
    specs = dict(CATALOG_SPECS)
    specs["tabulated_pure"] = tabulated_pure()
    specs["tabulated_probability_leaky"] = tabulated_probability_leaky()
    specs["tabulated_density"] = tabulated_density()
    for name, spec in specs.items():
        spec_path = HERE / f"{name}.spec.json"
        spec_path.write_text(json.dumps(spec, indent=2) + "\n", encoding="utf-8")
        code = main(["compute", str(spec_path), "--out", str(HERE / f"{name}.report.json")])
        print(f"{name}: exit {code}")
    mut = HERE / "qubit.spec.json"
    code = main(["compute", str(mut), "--mutate", "omega-sign", "--out", str(HERE / "qubit_mutated.report.json")])
    print(f"qubit_mutated: exit {code}")


if __name__ == "__main__":
    main_()

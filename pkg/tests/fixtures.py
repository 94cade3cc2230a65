"""Shared model fixtures for the test suite."""

import math
import os

import numpy as np

from latkam.model import load_model, model_to_document, recenter

HERE = os.path.dirname(__file__)
EXAMPLE_MODEL_PATH = os.path.join(HERE, "..", "models", "single_site_quintic.json")

# three-site frequency target with min |<omega, nu>| ~ 2.06 over all modes
# of l1 order <= 10 (verified in test_model), comfortably above the
# desk-scale Diophantine threshold eps**gamma ~ 0.97
MULTISITE_OMEGA = {-1: 41.8589584, 0: 57.3767023, 1: 59.56694396}


def example_model():
    return load_model(EXAMPLE_MODEL_PATH)


def multisite_document():
    """Three active sites, nonzero Taylor tail, every interaction flavour:
    on-site quintic, two pair couplings, plus a cross h0 term."""
    doc = {
        "weights": {"alpha": 1.0, "lambda": 4},
        "h0": [],
        "initial": {"I0": {"-1": 0.08, "0": 0.3, "1": 0.08,
                           "-2": 0.0005, "2": 0.0005}},
        "coupling": [
            {"site": 0, "exponent": 5,
             "modes": {"1": [1e-4, 0.0], "-1": [1e-4, 0.0]}},
            {"sites": [0, 1], "exponents": [3, 2],
             "modes": {"1,-1": [5e-4, 0.0], "-1,1": [5e-4, 0.0]}},
            {"sites": [-1, 0], "exponents": [2, 3],
             "modes": {"1,1": [5e-4, 0.0], "-1,-1": [5e-4, 0.0]}},
        ],
        "perturbation": {"epsilon": 1e-4, "K": 0.015625, "l": 5.0},
    }
    for j in range(-4, 5):
        entry = {"site": j, "terms": {"1": 1.0, "2": 0.5}}
        if j == 0:
            entry["terms"]["3"] = 0.2
        doc["h0"].append(entry)
    doc["h0"].append({"sites": [0, 1], "terms": {"1,1": 0.05}})
    # second pass: shift the linear h0 coefficients so the re-centered
    # frequency hits the resonance-free target exactly on sites -1, 0, 1
    rec = recenter(load_model(doc))
    for entry in doc["h0"]:
        j = entry.get("site")
        if j in MULTISITE_OMEGA:
            entry["terms"]["1"] += MULTISITE_OMEGA[j] - rec.omega[j]
    return doc


def multisite_model():
    return load_model(multisite_document())


def seeded_random_model(seed, radius=3):
    """Random short-range model obeying every assumption: monotonically
    decaying I0, quadratic h0 with order-one linear parts, and coupling
    amplitudes well inside the decay envelope."""
    rng = np.random.default_rng(seed)
    alpha = 1.0
    decay_k = 2.0 ** -6
    decay_rate = 5.0
    i0 = {}
    scale = rng.uniform(0.05, 0.15)
    for j in range(-radius, radius + 1):
        i0[j] = scale * math.exp(-abs(j) ** (1 + alpha)) * 0.8 ** abs(j)
    doc = {
        "weights": {"alpha": alpha, "lambda": radius},
        "h0": [{"site": j, "terms": {"1": float(rng.uniform(1.0, 3.0)),
                                     "2": float(rng.uniform(0.5, 1.5))}}
               for j in range(-radius, radius + 1)],
        "initial": {"I0": {str(j): v for j, v in i0.items()}},
        "coupling": [],
        "perturbation": {"epsilon": 1e-4, "K": decay_k, "l": decay_rate},
    }
    for j in range(-radius + 1, radius):
        outer = abs(j) + 1
        envelope = decay_k * math.exp(-decay_rate * max(outer - 1, 0) ** (1 + alpha))
        amp = envelope / 64.0 * float(rng.uniform(0.1, 1.0))
        exps = [[3, 2], [2, 3], [4, 1], [1, 4]][int(rng.integers(0, 4))]
        doc["coupling"].append({
            "sites": [j, j + 1],
            "exponents": exps,
            "modes": {"1,-1": [amp / 2, 0.0], "-1,1": [amp / 2, 0.0]},
        })
        if rng.random() < 0.5:
            on_amp = envelope / 64.0 * float(rng.uniform(0.1, 1.0))
            doc["coupling"].append({
                "site": j,
                "exponent": 5,
                "modes": {"1": [on_amp / 2, 0.0], "-1": [on_amp / 2, 0.0]},
            })
    return load_model(doc)


def minimal_document():
    """The smallest accepted document: quadratic h0, one quintic coupling,
    localized I0 with weighted norm 0.9."""
    return {
        "weights": {"alpha": 1.0, "lambda": 2},
        "h0": [{"site": j, "terms": {"2": 0.5}} for j in range(-2, 3)],
        "initial": {"I0": {"-1": 0.3 * math.exp(-1.0), "0": 0.3,
                           "1": 0.3 * math.exp(-1.0)}},
        "coupling": [
            {"site": 0, "exponent": 5,
             "modes": {"1": [1e-4, 0.0], "-1": [1e-4, 0.0]}}
        ],
        "perturbation": {"epsilon": 1e-4, "K": 0.015625, "l": 5.0},
    }

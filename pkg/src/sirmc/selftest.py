"""Built-in oracle and invariant suites, runnable from the CLI.

Each suite checks one family of contracts on the four named penalties at
threshold 1 with their strict-mode boundary shapes. The prox under test can
be overridden (the CLI uses that as a negative-control hook); everything
else is evaluated through the package's public API.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import penalties as pen
from .penalties import (
    Penalty,
    hoc,
    hog,
    how,
    loss_eval,
    moreau_argmin_oracle,
    prox_eval,
    soft_threshold,
)
from .spectral import shrink_singular_values


def default_penalties() -> list[Penalty]:
    return [soft_threshold(1.0), how(1.0), hoc(1.0), hog(1.0)]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str


def _result(name, passed, detail) -> SuiteResult:
    return SuiteResult(name, bool(passed), detail)


def suite_oddness(prox: Callable) -> SuiteResult:
    xs = np.linspace(0.0, 12.0, 4001)
    worst = 0.0
    for p in default_penalties():
        diff = np.abs(np.asarray(prox(p, -xs)) + np.asarray(prox(p, xs)))
        worst = max(worst, float(diff.max()))
    return _result("prox_oddness", worst == 0.0, f"max |P(-x)+P(x)| = {worst:.3g}")


def suite_thresholding(prox: Callable) -> SuiteResult:
    xs = np.linspace(-10.0, 10.0, 10001)  # lam = 1
    ok = True
    detail = []
    for p in default_penalties():
        vals = np.asarray(prox(p, xs))
        inside = np.abs(xs) <= p.lam
        zero_inside = np.all(vals[inside] == 0.0)
        nonzero_outside = np.all(vals[~inside] != 0.0)
        if not (zero_inside and nonzero_outside):
            ok = False
            detail.append(f"{p.kind}: inside-zero={zero_inside} outside-nonzero={nonzero_outside}")
    return _result("prox_thresholding", ok, "; ".join(detail) or "P(x)=0 iff |x|<=lam on 10^4 points")


def suite_monotone(prox: Callable) -> SuiteResult:
    xs = np.linspace(-10.0, 10.0, 10001)
    ok = True
    detail = []
    for p in default_penalties():
        vals = np.asarray(prox(p, xs))
        if np.any(np.diff(vals) < 0.0):
            ok = False
            detail.append(p.kind)
    return _result("prox_monotone", ok,
                   "nondecreasing on sampled grid" if ok else f"decreasing: {detail}")


def suite_bias_dominance(prox: Callable) -> SuiteResult:
    xs = np.linspace(1.0, 10.0, 2001)  # x >= lam = 1
    ok = True
    detail = []
    for p in default_penalties():
        b = xs - np.asarray(prox(p, xs))
        at_lam_exact = b[0] == p.lam
        bounded = np.all(b <= p.lam + 1e-12)
        nonincreasing = p.kind == "soft" or np.all(np.diff(b) <= 1e-12)
        if not (at_lam_exact and bounded and nonincreasing):
            ok = False
            detail.append(f"{p.kind}: at_lam={at_lam_exact} bounded={bounded} dec={nonincreasing}")
    return _result("bias_dominance", ok, "; ".join(detail) or "bias(lam)=lam, <=lam, nonincreasing")


def suite_loss_smoothness(prox: Callable) -> SuiteResult:
    ok = True
    details = []
    h = 1e-7
    for p in default_penalties():
        lam = p.lam
        left = (loss_eval(p, lam) - loss_eval(p, lam - h)) / h
        right = (loss_eval(p, lam + h) - loss_eval(p, lam)) / h
        c1_gap = abs(left - right)
        xs = np.linspace(-5.0, 5.0, 200)
        xs = xs[np.minimum(np.abs(xs - lam), np.abs(xs + lam)) > 1e-3]
        fd = (np.asarray(loss_eval(p, xs + 1e-4)) - np.asarray(loss_eval(p, xs - 1e-4))) / 2e-4
        grad_gap = float(np.max(np.abs(fd - (xs - np.asarray(prox(p, xs))))))
        if c1_gap > 1e-6 or grad_gap > 1e-5:
            ok = False
        details.append(f"{p.kind}: C1 gap {c1_gap:.2g}, grad gap {grad_gap:.2g}")
    return _result("loss_smoothness", ok, "; ".join(details))


def suite_moreau_oracle(prox: Callable, n_points: int = 9) -> SuiteResult:
    ok = True
    details = []
    step = 1.0 / pen.ORACLE_STEP_DIV
    xs = np.linspace(-4.0, 4.0, n_points)
    for p in default_penalties():
        argmin, minval = moreau_argmin_oracle(p, xs)
        arg_gap = float(np.max(np.abs(argmin - np.asarray(prox(p, xs)))))
        val_gap = float(np.max(np.abs(minval - np.asarray(loss_eval(p, xs)))))
        if arg_gap > step or val_gap > 1e-4:
            ok = False
        details.append(f"{p.kind}: arg {arg_gap:.2g}, val {val_gap:.2g}")
    return _result("moreau_oracle", ok, "; ".join(details))


def suite_spectral(prox: Callable, seed: int = 0) -> SuiteResult:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    ok = True
    details = []
    for p in default_penalties():
        worst_spec = worst_unitary = 0.0
        for _ in range(5):
            D = rng.standard_normal((12, 8)) * 1.5
            out = shrink_singular_values(D, p)
            s_in = np.linalg.svd(D, compute_uv=False)
            s_out = np.linalg.svd(out, compute_uv=False)
            expected = np.sort(np.asarray(prox(p, s_in)))[::-1]
            worst_spec = max(worst_spec, float(np.max(np.abs(s_out - expected))))
            Q1, _ = np.linalg.qr(rng.standard_normal((12, 12)))
            Q2, _ = np.linalg.qr(rng.standard_normal((8, 8)))
            rotated = shrink_singular_values(Q1 @ D @ Q2.T, p)
            worst_unitary = max(worst_unitary, float(np.max(np.abs(rotated - Q1 @ out @ Q2.T))))
        zero_ok = np.all(shrink_singular_values(0.5 * np.eye(6), p) == 0.0)
        if worst_spec > 1e-8 or worst_unitary > 1e-8 or not zero_ok:
            ok = False
        details.append(f"{p.kind}: spec {worst_spec:.2g}, unit {worst_unitary:.2g}")
    return _result("spectral_shrinkage", ok, "; ".join(details))


def run_selftest(prox: Optional[Callable] = None) -> list[SuiteResult]:
    """Run every suite; returns one result per suite."""
    prox = prox_eval if prox is None else prox
    return [
        suite_oddness(prox),
        suite_thresholding(prox),
        suite_monotone(prox),
        suite_bias_dominance(prox),
        suite_loss_smoothness(prox),
        suite_moreau_oracle(prox),
        suite_spectral(prox),
    ]

"""Classical optimizers used by the VQE loop.

Both work on plain callables so they can be exercised on synthetic
objectives; :mod:`himit.vqe` wraps them for circuit energies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InputError


@dataclass
class OptimizerStep:
    params: np.ndarray
    value: float
    evaluations: int


@dataclass
class OptimizerResult:
    steps: list[OptimizerStep] = field(default_factory=list)
    converged: bool = False
    message: str = ""

    @property
    def x(self) -> np.ndarray:
        return self.steps[-1].params

    @property
    def fun(self) -> float:
        return self.steps[-1].value


@dataclass
class AdamSettings:
    lr: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam(
    fun: Callable[[np.ndarray, int], float],
    grad: Callable[[np.ndarray, int], tuple[np.ndarray, int]],
    x0: Sequence[float],
    settings: AdamSettings | None = None,
    max_iters: int = 100,
    gtol: float = 0.0,
) -> OptimizerResult:
    """Adam with an externally supplied (possibly stochastic) gradient.

    ``fun(x, it)`` returns the objective and ``grad(x, it)`` returns
    ``(gradient, evaluations_spent)``; ``it`` lets callers derive per-iteration
    random streams. Every iterate is recorded.
    """
    if max_iters < 1:
        raise InputError("max_iters must be >= 1")
    hp = settings or AdamSettings()
    x = np.array(x0, dtype=float)
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    evals = 1
    result = OptimizerResult([OptimizerStep(x.copy(), float(fun(x, 0)), evals)])
    for t in range(1, max_iters + 1):
        g, spent = grad(x, t)
        evals += spent
        g = np.asarray(g, dtype=float)
        m = hp.beta1 * m + (1 - hp.beta1) * g
        v = hp.beta2 * v + (1 - hp.beta2) * g * g
        m_hat = m / (1 - hp.beta1**t)
        v_hat = v / (1 - hp.beta2**t)
        x = x - hp.lr * m_hat / (np.sqrt(v_hat) + hp.eps)
        evals += 1
        result.steps.append(OptimizerStep(x.copy(), float(fun(x, t)), evals))
        if gtol and np.linalg.norm(g) < gtol:
            result.converged = True
            result.message = "gradient norm below tolerance"
            break
    else:
        result.message = "iteration limit reached"
    return result


# --------------------------------------------------------------------------
# derivative-free trust region


def _quad_basis(s: np.ndarray) -> np.ndarray:
    """Rows ``[1, s_i, s_i s_j (i <= j)]`` for each row of ``s``."""
    n = s.shape[1]
    cols = [np.ones(len(s))] + [s[:, i] for i in range(n)]
    cols += [s[:, i] * s[:, j] for i, j in itertools.combinations_with_replacement(range(n), 2)]
    return np.column_stack(cols)


def _model(points: np.ndarray, fvals: np.ndarray, center: np.ndarray, scale: float):
    """Min-norm quadratic interpolant around ``center``: returns (g, H)."""
    n = points.shape[1]
    s = (points - center) / scale
    coef, *_ = np.linalg.lstsq(_quad_basis(s), fvals - fvals.min(), rcond=None)
    g = coef[1 : n + 1] / scale
    h = np.zeros((n, n))
    for k, (i, j) in enumerate(itertools.combinations_with_replacement(range(n), 2)):
        c = coef[n + 1 + k] / scale**2
        if i == j:
            h[i, i] = 2 * c
        else:
            h[i, j] = h[j, i] = c
    return g, h


def trust_region_step(g: np.ndarray, h: np.ndarray, radius: float) -> np.ndarray:
    """Global minimiser of ``g.s + s.H.s / 2`` subject to ``|s| <= radius``."""
    w, vecs = np.linalg.eigh(h)
    gt = vecs.T @ g
    if w[0] > 0:
        s = -vecs @ (gt / w)
        if np.linalg.norm(s) <= radius:
            return s
    lo = max(0.0, -w[0])

    def norm_at(lam):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.linalg.norm(gt / (w + lam))

    if not np.isfinite(norm_at(lo)) or norm_at(lo + 1e-12 * (1 + lo)) > radius:
        hi = lo + np.linalg.norm(g) / radius + abs(w).max() + 1.0
        lo_b = lo
        for _ in range(200):
            mid = 0.5 * (lo_b + hi)
            if norm_at(mid) > radius:
                lo_b = mid
            else:
                hi = mid
        return -vecs @ (gt / (w + hi))
    # hard case: move along the lowest eigenvector to reach the boundary
    lam = lo
    mask = np.abs(w + lam) > 1e-14
    coeffs = np.zeros_like(gt)
    coeffs[mask] = -gt[mask] / (w[mask] + lam)
    s = vecs @ coeffs
    tau = np.sqrt(max(radius**2 - s @ s, 0.0))
    return s + tau * vecs[:, 0]


def model_based_minimize(
    fun: Callable[[np.ndarray], float],
    x0: Sequence[float],
    budget: int,
    rhobeg: float = 0.5,
    rhoend: float = 1e-6,
    bounds: tuple[Sequence[float], Sequence[float]] | None = None,
) -> OptimizerResult:
    """Quadratic-model trust-region minimisation without derivatives.

    Interpolation set of ``(n+1)(n+2)/2`` points (fewer if the budget is
    tight, with a minimum-norm quadratic fit). Each iteration minimises the
    model in the trust region, evaluates once, swaps the new point for the
    one farthest from the incumbent and adapts the radius. When the model
    fails and the set is spread out, a geometry point maximising the
    conditioning of the interpolation system is evaluated instead. Only
    improving iterates are recorded.
    """
    x0 = np.array(x0, dtype=float)
    n = x0.size
    if budget < 2 * n + 1:
        raise InputError(f"budget must be at least 2n+1 = {2 * n + 1}")
    lower = upper = None
    if bounds is not None:
        lower = np.asarray(bounds[0], dtype=float)
        upper = np.asarray(bounds[1], dtype=float)
        x0 = np.clip(x0, lower, upper)

    def clip(x):
        return x if lower is None else np.clip(x, lower, upper)

    evals = 0

    def evaluate(x):
        nonlocal evals
        evals += 1
        return float(fun(x))

    delta = float(rhobeg)
    eye = np.eye(n)
    init = [x0] + [x0 + sgn * delta * eye[i] for i in range(n) for sgn in (1, -1)]
    init += [x0 + delta * (eye[i] + eye[j]) for i, j in itertools.combinations(range(n), 2)]
    npt = min(len(init), budget)
    pts = [clip(p) for p in init[:npt]]
    fv = [evaluate(p) for p in pts]
    points, fvals = np.array(pts), np.array(fv)
    best = int(np.argmin(fvals))
    result = OptimizerResult([OptimizerStep(points[0].copy(), fvals[0], 1)])
    if best != 0:
        result.steps.append(OptimizerStep(points[best].copy(), fvals[best], evals))

    candidates = [eye[i] * sgn for i in range(n) for sgn in (1, -1)]
    candidates += [(eye[i] + sgn * eye[j]) / np.sqrt(2) for i, j in itertools.combinations(range(n), 2) for sgn in (1, -1)]

    while evals < budget:
        if delta < rhoend:
            result.converged = True
            result.message = "trust radius below rhoend"
            break
        xk, fk = points[best], fvals[best]
        g, h = _model(points, fvals, xk, delta)
        s = clip(xk + trust_region_step(g, h, delta)) - xk
        snorm = np.linalg.norm(s)
        predicted = -(g @ s + 0.5 * s @ h @ s)
        if snorm < 0.1 * delta or predicted <= 0:
            far = np.linalg.norm(points - xk, axis=1)
            if far.max() > 2 * delta:
                _improve_geometry(points, fvals, best, delta, candidates, clip, evaluate)
                best = _note_best(points, fvals, best, result, evals)
            else:
                delta *= 0.1 if snorm < 0.1 * delta else 0.5
            continue
        xn = xk + s
        fn = evaluate(xn)
        ratio = (fk - fn) / predicted
        dist = np.linalg.norm(points - (xn if fn < fk else xk), axis=1)
        dist[best] = -1.0 if fn >= fk else dist[best]
        replace_idx = int(np.argmax(dist))
        points[replace_idx], fvals[replace_idx] = xn, fn
        best = _note_best(points, fvals, best, result, evals)
        if ratio >= 0.7 and snorm >= 0.9 * delta:
            delta = min(2.0 * delta, 1e3 * rhobeg)
        elif ratio < 0.1:
            far = np.linalg.norm(points - points[best], axis=1)
            if far.max() > 2 * delta and evals < budget:
                _improve_geometry(points, fvals, best, delta, candidates, clip, evaluate)
                best = _note_best(points, fvals, best, result, evals)
            else:
                delta *= 0.5
    else:
        result.message = "evaluation budget exhausted"
    return result


def _note_best(points, fvals, best, result, evals) -> int:
    new_best = int(np.argmin(fvals))
    if fvals[new_best] < result.steps[-1].value:
        result.steps.append(OptimizerStep(points[new_best].copy(), float(fvals[new_best]), evals))
    return new_best


def _improve_geometry(points, fvals, best, delta, candidates, clip, evaluate) -> None:
    xk = points[best]
    far = np.linalg.norm(points - xk, axis=1)
    idx = int(np.argmax(far))
    best_score, best_pt = -1.0, None
    for d in candidates:
        trial = points.copy()
        trial[idx] = clip(xk + delta * d)
        basis = _quad_basis((trial - xk) / delta)
        score = np.linalg.svd(basis, compute_uv=False)[-1]
        if score > best_score:
            best_score, best_pt = score, trial[idx]
    points[idx] = best_pt
    fvals[idx] = evaluate(best_pt)

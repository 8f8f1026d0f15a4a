"""Extraction of physical probabilities from noisy relative frequencies.

Maximum-likelihood extraction runs an accelerated projected-gradient ascent
over the state space; least-squares extraction (used for projector records)
minimizes the squared distance between frequencies and Born probabilities.
Both return probabilities together with a generating state, so downstream
certification always receives a feasible constraint set.
"""

from dataclasses import dataclass

import numpy as np

from .config import TOL
from .qcore import basis_projectors, born_probabilities_basis, born_probabilities_projectors
from .records import BASES, PROJECTORS, FrequencyData, MeasurementRecord, PhysicalProbabilities

__all__ = [
    "ConvergenceError",
    "project_simplex",
    "project_psd_trace1",
    "extract_ml_probs",
    "extract_ls_probs",
    "ml_reconstruct",
    "log_likelihood",
    "dykstra_project",
]

_APG_MAX_ITER = 5000
_APG_REL_TOL = 1e-10
_BACKTRACK_SHRINK = 0.5


class ConvergenceError(RuntimeError):
    """Optimization hit its iteration cap; carries the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of a real vector onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    cond = u - css / idx > 0
    k = idx[cond][-1]
    tau = css[k - 1] / k
    return np.clip(v - tau, 0.0, None)


def project_psd_trace1(h: np.ndarray) -> np.ndarray:
    """Frobenius-nearest PSD unit-trace matrix to a Hermitian input."""
    h = np.asarray(h, dtype=complex)
    h = 0.5 * (h + h.conj().T)
    ev, vec = np.linalg.eigh(h)
    lam = project_simplex(ev)
    return (vec * lam) @ vec.conj().T


def log_likelihood(rho, record: MeasurementRecord, freqs: FrequencyData) -> float:
    """Multinomial (bases) or per-setting binomial (projectors) log-likelihood."""
    if freqs.kind == BASES:
        p = np.stack([born_probabilities_basis(rho, u) for u in record.elements])
        nu = freqs.values
        with np.errstate(divide="ignore"):
            terms = nu * np.log(np.clip(p, TOL.prob_floor, None))
        return float(np.sum(terms[nu > 0]))
    p = born_probabilities_projectors(rho, record.constraint_operators())
    nu = freqs.values
    lo = TOL.prob_floor
    val = 0.0
    val += np.sum(nu[nu > 0] * np.log(np.clip(p[nu > 0], lo, None)))
    anti = 1.0 - nu
    val += np.sum(anti[anti > 0] * np.log(np.clip(1.0 - p[anti > 0], lo, None)))
    return float(val)


def _apg_minimize(objective, gradient, d, max_iter=_APG_MAX_ITER, rel_tol=_APG_REL_TOL):
    """FISTA-style accelerated projected gradient with adaptive restart.

    Minimizes a smooth convex objective over density matrices; the projection
    is the eigenvalue simplex projection.  Backtracking halves the step until
    the quadratic majorization holds.
    """
    x = np.eye(d, dtype=complex) / d
    y = x.copy()
    t = 1.0
    fx = objective(x)
    step = 1.0
    for _ in range(max_iter):
        g = gradient(y)
        fy = objective(y)
        while True:
            x_new = project_psd_trace1(y - step * g)
            diff = x_new - y
            quad = fy + np.real(np.vdot(g, diff)) + np.linalg.norm(diff) ** 2 / (2.0 * step)
            f_new = objective(x_new)
            if f_new <= quad + 1e-12 * max(1.0, abs(quad)) or step < 1e-18:
                break
            step *= _BACKTRACK_SHRINK
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        if f_new > fx:  # objective rose: restart momentum at the last good point
            y = x.copy()
            t = 1.0
            step *= _BACKTRACK_SHRINK
            continue
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        rel_change = abs(fx - f_new) / max(1.0, abs(f_new))
        x, fx, t = x_new, f_new, t_new
        step *= 1.1  # let the step recover between backtracks
        if rel_change < rel_tol:
            return x, fx, True
    return x, fx, False


def _ml_state(record: MeasurementRecord, freqs: FrequencyData):
    d = record.dim
    if freqs.kind == BASES:
        proj_stacks = [basis_projectors(u) for u in record.elements]
        nu = freqs.values

        def objective(rho):
            return -log_likelihood(rho, record, freqs)

        def gradient(rho):
            g = np.zeros((d, d), dtype=complex)
            for k, u in enumerate(record.elements):
                p = born_probabilities_basis(rho, u)
                w = np.where(nu[k] > 0, nu[k] / np.clip(p, TOL.prob_floor, None), 0.0)
                g -= np.einsum("j,jik->ik", w, proj_stacks[k])
            return g

    else:
        pis = record.constraint_operators()
        nu = freqs.values

        def objective(rho):
            return -log_likelihood(rho, record, freqs)

        def gradient(rho):
            p = born_probabilities_projectors(rho, pis)
            p = np.clip(p, TOL.prob_floor, 1.0 - TOL.prob_floor)
            w = np.where(nu > 0, nu / p, 0.0) - np.where(1.0 - nu > 0, (1.0 - nu) / (1.0 - p), 0.0)
            return -np.einsum("l,lik->ik", w, pis)

    rho, fval, ok = _apg_minimize(objective, gradient, d)
    if not ok:
        raise ConvergenceError("ML extraction did not converge within the iteration cap", best=rho)
    return rho


def extract_ml_probs(record: MeasurementRecord, freqs: FrequencyData) -> PhysicalProbabilities:
    """Physical probabilities at the likelihood maximizer over valid states."""
    if freqs.kind != record.kind:
        raise ValueError("frequency layout does not match the record kind")
    rho = _ml_state(record, freqs)
    if record.kind == BASES:
        values = np.stack([born_probabilities_basis(rho, u) for u in record.elements])
    else:
        values = born_probabilities_projectors(rho, record.constraint_operators())
    return PhysicalProbabilities(record.kind, values, rho)


def extract_ls_probs(record: MeasurementRecord, freqs: FrequencyData) -> PhysicalProbabilities:
    """Least-squares projection of projector frequencies onto attainable ones.

    The squared distance to the Born probabilities is minimized over density
    matrices; probabilities are read off the (trace-renormalized) minimizer.
    """
    if record.kind != PROJECTORS or freqs.kind != PROJECTORS:
        raise ValueError("least-squares extraction expects a projector record")
    pis = record.constraint_operators()
    nu = freqs.values
    d = record.dim

    def objective(rho):
        p = born_probabilities_projectors(rho, pis)
        return float(np.sum((nu - p) ** 2))

    def gradient(rho):
        p = born_probabilities_projectors(rho, pis)
        return -2.0 * np.einsum("l,lik->ik", nu - p, pis)

    rho, _, ok = _apg_minimize(objective, gradient, d)
    if not ok:
        raise ConvergenceError("LS extraction did not converge within the iteration cap", best=rho)
    rho = rho / np.trace(rho).real
    values = born_probabilities_projectors(rho, pis)
    return PhysicalProbabilities(PROJECTORS, values, rho)


def ml_reconstruct(record: MeasurementRecord, freqs: FrequencyData) -> np.ndarray:
    """Maximum-likelihood state estimator for either record layout."""
    return _ml_state(record, freqs)


def _affine_projector(ops: np.ndarray, targets: np.ndarray):
    """Projection onto {H : <A_i, H> = t_i} via the pseudo-inverse Gram matrix."""
    n, d, _ = ops.shape
    flat = ops.reshape(n, d * d)
    gram = np.real(flat.conj() @ flat.T)
    gram_pinv = np.linalg.pinv(gram, rcond=1e-12)

    def project(h):
        resid = np.real(flat.conj() @ h.reshape(-1)) - targets
        coeff = gram_pinv @ resid
        return h - np.tensordot(coeff, ops, axes=1)

    return project


def dykstra_project(start, record: MeasurementRecord, probs, tol: float = 1e-8, max_sweeps: int = 5000):
    """Dykstra projection onto {rho >= 0, tr rho = 1} intersected with the data constraints.

    The affine data set needs no correction term; the correction is kept only
    for the spectrahedron, per the standard Boyle-Dykstra scheme.
    """
    ops = record.constraint_operators()
    targets = probs.flat if hasattr(probs, "flat") else np.asarray(probs, dtype=float).reshape(-1)
    affine = _affine_projector(ops, targets)
    flat = ops.reshape(ops.shape[0], -1)

    x = np.asarray(start, dtype=complex)
    increment = np.zeros_like(x)
    best = x
    for _ in range(max_sweeps):
        y = affine(x)
        x_corr = y + increment
        x = project_psd_trace1(x_corr)
        increment = x_corr - x
        resid = np.linalg.norm(np.real(flat.conj() @ x.reshape(-1)) - targets)
        best = x
        if resid < tol:
            return x
    raise ConvergenceError(
        f"Dykstra projection residual did not reach {tol} within {max_sweeps} sweeps", best=best
    )

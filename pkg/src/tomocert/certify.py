"""Informational-completeness certification via the two anchored SDPs.

The width of the linear functional tr(rho Z) over the set of states
consistent with the extracted probabilities is zero exactly when the
measurement data determine the state uniquely.  Both extremal problems are
solved with the interior-point core; reported bounds are the dual (outer)
ones, so a certificate can overstate but never understate the width.
"""

from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .qcore import RngStream, random_state
from .records import MeasurementRecord
from .sdp import SdpResult, prune_constraints, solve_sdp

__all__ = [
    "ScvxCertificate",
    "sample_anchor",
    "solve_scvx",
    "normalize_scvx",
    "is_ic",
    "logmap_scvx",
    "inverse_logmap_scvx",
]

DEFAULT_ANCHOR_SEED = 20210907


@dataclass(frozen=True)
class ScvxCertificate:
    f_min: float
    f_max: float
    scvx_raw: float
    scvx_normalized: float | None
    anchor_id: str
    iterations: int
    gap: float
    primal_resid: float
    dual_resid: float
    accuracy_warning: bool = False
    minimizer: np.ndarray | None = field(default=None, repr=False, compare=False)
    maximizer: np.ndarray | None = field(default=None, repr=False, compare=False)

    def with_normalization(self, denominator: float) -> "ScvxCertificate":
        value, _ = normalize_scvx(self.scvx_raw, denominator)
        return ScvxCertificate(
            self.f_min, self.f_max, self.scvx_raw, value, self.anchor_id,
            self.iterations, self.gap, self.primal_resid, self.dual_resid,
            self.accuracy_warning, self.minimizer, self.maximizer,
        )


def sample_anchor(d: int, seed: int = DEFAULT_ANCHOR_SEED) -> np.ndarray:
    """Deterministic full-rank anchor state for dimension d.

    A Wishart-random state is mixed with 10% of the maximally mixed state so
    the smallest eigenvalue is bounded well away from zero.  The same
    (d, seed) pair always yields the same anchor, which is how training and
    inference share one anchor per dimension.
    """
    if d < 2:
        raise ValueError("anchor dimension must be >= 2")
    w = random_state(d, d, RngStream(seed, stream=d))
    return 0.9 * w + 0.1 * np.eye(d) / d


def anchor_id(d: int, seed: int = DEFAULT_ANCHOR_SEED) -> str:
    return f"anchor-d{d}-s{seed}"


_FACE_PROB_TOL = 1e-12


def _reduce_to_face(ops: np.ndarray, targets: np.ndarray, d: int):
    """Restrict the problem to the face forced by zero/one probabilities.

    A constraint <Pi, rho> = 0 with Pi >= 0 confines rho to ker(Pi); one with
    <Pi, rho> = 1 = tr(rho) and Pi <= I confines rho to ker(I - Pi).  The
    states satisfying such data have no interior in the full cone, which
    stalls interior-point iterations; on the reduced support the interior is
    restored and those constraints become trivial.
    """
    face = np.zeros((d, d), dtype=complex)
    for op, t in zip(ops, targets):
        if t <= _FACE_PROB_TOL:
            face += op
        elif t >= 1.0 - _FACE_PROB_TOL and np.trace(op).real <= 1.0 + 1e-9:
            face += np.eye(d) - op
    ev, vec = np.linalg.eigh(face)
    support = vec[:, ev < 1e-11]
    if support.shape[1] == d:
        return None
    if support.shape[1] == 0:
        raise SdpInfeasibleError("zero/one probabilities admit no PSD state")
    v = support
    red_ops = np.einsum("ia,nij,jb->nab", v.conj(), ops, v)
    return v, red_ops


def solve_scvx(
    record: MeasurementRecord,
    probs,
    anchor: np.ndarray,
    gap_tol: float = TOL.sdp_gap,
    label: str = "anchor",
) -> ScvxCertificate:
    """Solve the min/max pair of tr(rho Z) over the data-consistent states."""
    d = record.dim
    ops = np.concatenate([record.constraint_operators(), np.eye(d, dtype=complex)[None]])
    targets = np.concatenate([probs.flat if hasattr(probs, "flat") else np.asarray(probs, float).reshape(-1), [1.0]])

    reduction = _reduce_to_face(ops, targets, d)
    if reduction is not None:
        v, ops = reduction
        anchor_eff = v.conj().T @ anchor @ v
    else:
        v = None
        anchor_eff = anchor
    anchor_eff = 0.5 * (anchor_eff + anchor_eff.conj().T)

    kept_ops, kept_b, _ = prune_constraints(ops, targets, tol=TOL.constraint_prune)

    if kept_ops.shape[-1] == 1:
        # the face is one-dimensional: the feasible state is unique
        val = float(anchor_eff[0, 0].real) * float(kept_b[0] / kept_ops[0, 0, 0].real)
        state = v @ v.conj().T if v is not None else np.eye(1, dtype=complex)
        return ScvxCertificate(val, val, 0.0, None, label, 0, 0.0, 0.0, 0.0, False, state, state)

    res_min = solve_sdp(anchor_eff, kept_ops, kept_b, gap_tol=gap_tol)
    res_max = solve_sdp(-anchor_eff, kept_ops, kept_b, gap_tol=gap_tol)

    f_min = res_min.dual_obj
    f_max = -res_max.dual_obj
    raw = max(f_max - f_min, 0.0)
    warn = not (res_min.converged and res_max.converged)
    x_min, x_max = res_min.x, res_max.x
    if v is not None:
        x_min = v @ x_min @ v.conj().T
        x_max = v @ x_max @ v.conj().T
    return ScvxCertificate(
        f_min=f_min,
        f_max=f_max,
        scvx_raw=raw,
        scvx_normalized=None,
        anchor_id=label,
        iterations=res_min.iterations + res_max.iterations,
        gap=max(res_min.gap, res_max.gap),
        primal_resid=max(res_min.primal_resid, res_max.primal_resid),
        dual_resid=max(res_min.dual_resid, res_max.dual_resid),
        accuracy_warning=warn,
        minimizer=x_min,
        maximizer=x_max,
    )


def normalize_scvx(raw: float, raw_at_first_setting: float) -> tuple[float, bool]:
    """Normalize against the width at the first measurement setting.

    Returns (normalized value clamped to [0, 1], flag) where the flag marks
    a vanishing denominator, i.e. the first setting was already IC.
    """
    if raw_at_first_setting <= TOL.scvx_clamp:
        return 0.0, True
    return float(np.clip(raw / raw_at_first_setting, 0.0, 1.0)), False


def is_ic(cert: ScvxCertificate, epsilon: float = TOL.ic_epsilon) -> bool:
    """IC verdict: the (normalized, when available) width is below epsilon."""
    value = cert.scvx_normalized if cert.scvx_normalized is not None else cert.scvx_raw
    return value < epsilon


def logmap_scvx(y: float) -> float:
    """Log-compressed width y' = -log10(y)/10 with the 1e-10 lower clamp."""
    y = max(float(y), TOL.scvx_clamp)
    return -np.log10(y) / 10.0


def inverse_logmap_scvx(y_prime: float) -> float:
    return float(10.0 ** (-10.0 * y_prime))

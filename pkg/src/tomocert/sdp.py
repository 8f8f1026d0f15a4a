"""Dense primal-dual interior-point solver for the certification SDPs.

Solves  min <C, X>  s.t.  <A_i, X> = b_i,  X >= 0  over complex Hermitian
matrices, using Nesterov-Todd scaling with a Mehrotra-style predictor and
corrector.  Problem sizes here are small (d <= 64, a few hundred
constraints), so everything is dense and factorized directly.

The dual objective b'y is a certified outer bound on the optimum (up to the
residual norms reported in the result), which is what the certification
layer reports: widths derived from outer bounds can only over-estimate the
size of the feasible set, never under-estimate it.

Many certification instances have a singleton feasible set and therefore no
strictly feasible interior; the dual sequence is then unbounded and the gap
stalls near the f64 floor instead of reaching machine zero.  The solver
tracks the best iterate seen and returns it when progress stops.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = ["SdpResult", "solve_sdp", "svec", "prune_constraints", "SdpInfeasibleError"]


class SdpInfeasibleError(RuntimeError):
    """The constraint data admits no PSD solution."""


@dataclass
class SdpResult:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    primal_obj: float
    dual_obj: float
    gap: float
    primal_resid: float
    dual_resid: float
    iterations: int
    converged: bool
    message: str = ""


def svec(h: np.ndarray) -> np.ndarray:
    """Isometric real vectorization of a Hermitian matrix.

    Diagonal entries, then sqrt(2)-scaled real and imaginary upper-triangle
    parts; Frobenius inner products become real dot products.
    """
    h = np.asarray(h, dtype=complex)
    d = h.shape[0]
    iu = np.triu_indices(d, k=1)
    return np.concatenate([np.real(np.diagonal(h)), np.sqrt(2.0) * h[iu].real, np.sqrt(2.0) * h[iu].imag])


def prune_constraints(ops: np.ndarray, b: np.ndarray, tol: float = 1e-10):
    """Drop linearly dependent constraint operators by pivoted QR.

    Returns (kept_ops, kept_b, kept_indices).  Raises if a dropped
    constraint's target is inconsistent with the kept ones, which cannot
    happen for physically generated probabilities.
    """
    ops = np.asarray(ops, dtype=complex)
    b = np.asarray(b, dtype=float)
    n = ops.shape[0]
    rows = np.stack([svec(a) for a in ops])
    _, r, piv = scipy.linalg.qr(rows.T, mode="economic", pivoting=True)
    diag = np.abs(np.diagonal(r))
    if diag.size == 0 or diag[0] == 0.0:
        raise ValueError("constraint set is entirely zero")
    rank = int(np.sum(diag > tol * diag[0]))
    keep = np.sort(piv[:rank])
    if rank < n:
        drop = np.sort(piv[rank:])
        coeff, *_ = np.linalg.lstsq(rows[keep].T, rows[drop].T, rcond=None)
        implied = coeff.T @ b[keep]
        if np.max(np.abs(implied - b[drop])) > 1e-7:
            raise SdpInfeasibleError("dependent constraints carry inconsistent targets")
    return ops[keep], b[keep], keep


def _min_step(chol_lower: np.ndarray, direction: np.ndarray) -> float:
    """Largest alpha with X + alpha*dX PSD, given chol(X) and Hermitian dX."""
    s1 = scipy.linalg.solve_triangular(chol_lower, direction, lower=True)
    g = scipy.linalg.solve_triangular(chol_lower, s1.conj().T, lower=True).conj().T
    lam_min = np.linalg.eigvalsh(0.5 * (g + g.conj().T))[0]
    if lam_min >= -1e-16:
        return np.inf
    return -1.0 / lam_min


def _chol_psd(h: np.ndarray):
    """Cholesky factor with escalating diagonal shifts; None if hopeless."""
    scale = max(1.0, float(np.trace(h).real))
    shift = 0.0
    for _ in range(6):
        try:
            return np.linalg.cholesky(h + shift * np.eye(h.shape[0]))
        except np.linalg.LinAlgError:
            shift = max(shift * 100.0, 1e-15 * scale)
    return None


def solve_sdp(
    c: np.ndarray,
    ops: np.ndarray,
    b: np.ndarray,
    gap_tol: float = 1e-8,
    feas_primal: float = 1e-7,
    feas_dual: float = 1e-9,
    max_iter: int = 200,
) -> SdpResult:
    """Interior-point solve of min <c, X> s.t. <A_i, X> = b_i, X >= 0.

    ``ops`` must be linearly independent (see ``prune_constraints``).
    Convergence is declared when the relative duality gap falls below
    ``gap_tol`` and the residual norms below their tolerances; iteration
    continues past loose thresholds only while the gap keeps shrinking.
    """
    c = np.asarray(c, dtype=complex)
    ops = np.asarray(ops, dtype=complex)
    b = np.asarray(b, dtype=float)
    d = c.shape[0]
    m = ops.shape[0]
    ops_flat = ops.reshape(m, d * d)

    def apply_a(mat):
        return np.real(ops_flat.conj() @ mat.reshape(-1))

    def apply_at(y):
        return np.tensordot(y, ops, axes=1)

    x = np.eye(d, dtype=complex) / d
    z = np.eye(d, dtype=complex) * max(1.0, np.linalg.norm(c))
    y = np.zeros(m)

    b_scale = 1.0 + np.linalg.norm(b)
    c_scale = 1.0 + np.linalg.norm(c)
    eye = np.eye(d)

    def metrics(x, y, z):
        gap = float(np.real(np.vdot(x.reshape(-1), z.reshape(-1))))
        pobj = float(np.real(np.vdot(c.reshape(-1), x.reshape(-1))))
        dobj = float(b @ y)
        rel_gap = abs(gap) / (1.0 + abs(pobj) + abs(dobj))
        rp_norm = float(np.linalg.norm(b - apply_a(x))) / b_scale
        rd = c - apply_at(y) - z
        rd_norm = float(np.linalg.norm(rd)) / c_scale
        return gap, pobj, dobj, rel_gap, rp_norm, rd_norm

    best = None
    best_err = np.inf
    stall = 0
    status, converged = "iteration cap reached", False
    it = 0

    for it in range(1, max_iter + 1):
        gap, pobj, dobj, rel_gap, rp_norm, rd_norm = metrics(x, y, z)
        err = max(rel_gap / gap_tol, rp_norm / feas_primal, rd_norm / feas_dual)
        if err < best_err * 0.97:
            stall = 0
        else:
            stall += 1
        if err < best_err:
            best_err = err
            best = (x.copy(), y.copy(), z.copy(), it - 1)
        if rel_gap < gap_tol and rp_norm < feas_primal and rd_norm < feas_dual:
            status, converged = "converged", True
            best = (x.copy(), y.copy(), z.copy(), it - 1)
            break
        if not np.isfinite(gap) or np.linalg.norm(x) > 1e14 or np.linalg.norm(z) > 1e14:
            status = "iterates diverged"
            break
        if stall >= 25:
            status = "progress stalled near the numerical floor"
            break

        lx = _chol_psd(x)
        lz = _chol_psd(z)
        if lx is None or lz is None:
            status = "iterate lost positive definiteness"
            break
        # Nesterov-Todd scaling point W = Lx (Lx' Z Lx)^(-1/2) Lx'
        inner = lx.conj().T @ z @ lx
        ev, vec = np.linalg.eigh(0.5 * (inner + inner.conj().T))
        ev = np.clip(ev, 1e-300, None)
        inv_sqrt = (vec * (ev ** -0.5)) @ vec.conj().T
        w = lx @ inv_sqrt @ lx.conj().T
        w = 0.5 * (w + w.conj().T)

        waw = np.einsum("ab,ibc,cd->iad", w, ops, w, optimize=True)
        mmat = np.real(ops_flat.conj() @ waw.reshape(m, d * d).T)
        mmat = 0.5 * (mmat + mmat.T)
        try:
            mchol = scipy.linalg.cho_factor(mmat + 1e-13 * max(1.0, mmat.diagonal().max()) * np.eye(m))
        except scipy.linalg.LinAlgError:
            status = "schur complement not positive definite"
            break

        rp = b - apply_a(x)
        rd = c - apply_at(y) - z
        rd = 0.5 * (rd + rd.conj().T)
        w_rd_w = w @ rd @ w
        z_inv = scipy.linalg.cho_solve((lz, True), eye)
        z_inv = 0.5 * (z_inv + z_inv.conj().T)
        mu = gap / d

        def direction(r_c):
            rhs = rp - apply_a(r_c) + apply_a(w_rd_w)
            dy = scipy.linalg.cho_solve(mchol, rhs)
            dz = rd - apply_at(dy)
            dz = 0.5 * (dz + dz.conj().T)
            dx = r_c - w @ dz @ w
            dx = 0.5 * (dx + dx.conj().T)
            return dx, dy, dz

        # predictor: aim straight at complementarity zero
        dx_a, dy_a, dz_a = direction(-x)
        ap_a = min(1.0, 0.98 * _min_step(lx, dx_a))
        ad_a = min(1.0, 0.98 * _min_step(lz, dz_a))
        gap_aff = np.real(np.vdot((x + ap_a * dx_a).reshape(-1), (z + ad_a * dz_a).reshape(-1)))
        ratio = min(max(gap_aff / gap, 0.0), 1.0) if gap > 0 else 0.0
        sigma = min(1.0, max(ratio ** 3, 1e-10))

        # corrector with a second-order Mehrotra term
        corr = dx_a @ dz_a @ z_inv
        r_c = sigma * mu * z_inv - x - 0.5 * (corr + corr.conj().T)
        dx, dy, dz = direction(r_c)
        ap = min(1.0, 0.98 * _min_step(lx, dx))
        ad = min(1.0, 0.98 * _min_step(lz, dz))
        if min(ap, ad) < 0.5 * min(ap_a, ad_a):
            # second-order term backfired; retreat to plain centering
            dx, dy, dz = direction(sigma * mu * z_inv - x)
            ap = min(1.0, 0.98 * _min_step(lx, dx))
            ad = min(1.0, 0.98 * _min_step(lz, dz))
        if ap < 1e-10 and ad < 1e-10:
            status = "step size collapsed"
            break
        if not all(np.all(np.isfinite(v)) for v in (dx, dy, dz)):
            status = "direction numerically invalid"
            break
        x = 0.5 * ((x + ap * dx) + (x + ap * dx).conj().T)
        y = y + ad * dy
        z = 0.5 * ((z + ad * dz) + (z + ad * dz).conj().T)

    if best is not None:
        x, y, z, _ = best
    gap, pobj, dobj, rel_gap, rp_norm, rd_norm = metrics(x, y, z)
    if not converged and rel_gap < 10 * gap_tol and rp_norm < 10 * feas_primal and rd_norm < 10 * feas_dual:
        converged = True
        status = "converged (near floor)"
    return SdpResult(
        x=x,
        y=y,
        z=z,
        primal_obj=pobj,
        dual_obj=dobj,
        gap=gap,
        primal_resid=rp_norm,
        dual_resid=rd_norm,
        iterations=it,
        converged=converged,
        message=status,
    )

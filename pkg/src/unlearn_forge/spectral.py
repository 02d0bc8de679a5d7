"""Matrix-free estimation of extreme Hessian eigenvalues via power
iteration on Hessian-vector products.

Only the two extreme eigenvalues are needed (they feed the adaptive
relearning step-size and the condition-number bound), so no deflation or
solver-based inverse iteration is used. The smallest eigenvalue comes from
power iteration on the shifted operator ``lambda_max * I - H``.

For non-convex models the Hessian can be indefinite; ``psd_flag`` records
whether the estimate is consistent with positive semidefiniteness, and the
condition number is only reported when it is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numcore import RngStream, check_finite

__all__ = [
    "SpectralEstimate",
    "lambda_max",
    "lambda_min",
    "condition_number",
    "estimate_spectrum",
    "NON_PSD_DIAGNOSTIC",
]

NON_PSD_DIAGNOSTIC = "non-PSD Hessian; bound not applicable"
KAPPA_FLOOR = 1e-12


@dataclass
class SpectralEstimate:
    lambda_max: float
    lambda_min: float
    kappa: float | None
    iterations_used: int
    residual: float
    psd_flag: bool

    def to_dict(self) -> dict:
        return {
            "lambda_max": self.lambda_max,
            "lambda_min": self.lambda_min,
            "kappa": self.kappa,
            "iterations_used": self.iterations_used,
            "residual": self.residual,
            "psd_flag": self.psd_flag,
        }


def _power_iteration(apply_op, d: int, tol: float, max_iter: int, rng: RngStream):
    """Dominant-by-magnitude eigenvalue of a symmetric operator.

    Returns (rayleigh, vector, iterations, residual).
    """
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    lam, resid = 0.0, np.inf
    for it in range(1, max_iter + 1):
        w = apply_op(v)
        check_finite(w, "operator output in power iteration")
        lam = float(np.dot(v, w))
        resid = float(np.linalg.norm(w - lam * v))
        if resid <= tol:
            return lam, v, it, resid
        nw = np.linalg.norm(w)
        if nw == 0.0:  # v is in the null space and the Rayleigh quotient is 0
            return 0.0, v, it, 0.0
        v = w / nw
    return lam, v, max_iter, resid


def lambda_max(obj, theta: np.ndarray, tol: float = 1e-10, max_iter: int = 100_000,
               rng: RngStream | None = None):
    """Largest-magnitude Hessian eigenvalue of ``obj`` at ``theta``.

    Returns ``(eigenvalue, diagnostics)`` where diagnostics is a dict with
    the final residual, iteration count, and the converged vector.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if rng is None:
        rng = RngStream(0, 0)
    lam, v, it, resid = _power_iteration(
        lambda u: obj.hvp(theta, u), theta.size, tol, max_iter, rng
    )
    return lam, {"residual": resid, "iterations": it, "vector": v, "converged": resid <= tol}


def lambda_min(obj, theta: np.ndarray, lam_max: float, tol: float = 1e-10,
               max_iter: int = 100_000, rng: RngStream | None = None):
    """Smallest Hessian eigenvalue via the shifted operator ``lam_max*I - H``.

    Returns ``(eigenvalue, psd_flag, diagnostics)``.
    """
    if rng is None:
        rng = RngStream(0, 1)

    def shifted(u):
        return lam_max * u - obj.hvp(theta, u)

    shift_top, v, it, resid = _power_iteration(shifted, theta.size, tol, max_iter, rng)
    # isotropic case: the shifted operator is null, the iteration stops at
    # once with shift_top == 0 and the whole spectrum sits at lam_max
    lam = lam_max - shift_top
    psd = lam > -tol
    return lam, psd, {"residual": resid, "iterations": it, "vector": v, "converged": resid <= tol}


def condition_number(est: SpectralEstimate, floor: float = KAPPA_FLOOR):
    """``lambda_max / lambda_min`` when defined, else a diagnostic string."""
    if not est.psd_flag:
        return NON_PSD_DIAGNOSTIC
    if est.lambda_min <= floor:
        return f"lambda_min {est.lambda_min:.3e} at or below floor {floor:.1e}; kappa undefined"
    return est.lambda_max / est.lambda_min


def estimate_spectrum(obj, theta: np.ndarray, tol: float = 1e-10, max_iter: int = 100_000,
                      rng: RngStream | None = None) -> SpectralEstimate:
    """Estimate both extreme eigenvalues and the condition number."""
    if rng is None:
        rng = RngStream(0, 0)
    lmax, diag_max = lambda_max(obj, theta, tol, max_iter, rng)
    lmin, psd, diag_min = lambda_min(obj, theta, lmax, tol, max_iter, rng)
    est = SpectralEstimate(
        lambda_max=lmax,
        lambda_min=lmin,
        kappa=None,
        iterations_used=diag_max["iterations"] + diag_min["iterations"],
        residual=diag_max["residual"],
        psd_flag=psd,
    )
    kappa = condition_number(est)
    if isinstance(kappa, float):
        est.kappa = kappa
    return est

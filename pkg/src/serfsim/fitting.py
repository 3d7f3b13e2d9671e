"""Complex damped-exponential fitting for precession/decay time series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

__all__ = ["ComplexDecayFit", "fit_complex_decay"]


@dataclass(frozen=True)
class ComplexDecayFit:
    """Parameters of z(t) ~ c * exp((i*omega - Gamma) * t)."""

    c: complex
    omega: float  # rad/s (signed)
    Gamma: float  # 1/s
    residual: float  # ||z - model|| / ||z||


def _linear_prediction(z: np.ndarray, dt: float) -> complex:
    num = np.vdot(z[:-1], z[1:])
    den = np.vdot(z[:-1], z[:-1])
    if abs(den) == 0:
        raise ValueError("cannot fit an all-zero series")
    alpha = num / den
    if abs(alpha) == 0:
        raise ValueError("degenerate linear-prediction estimate")
    return np.log(alpha) / dt


def fit_complex_decay(t: np.ndarray, z: np.ndarray, refine: bool = True) -> ComplexDecayFit:
    """Least-squares fit of a single complex decaying exponential.

    Starts from a linear-prediction estimate (requires a uniform grid
    with |omega|*dt < pi so the frequency is not aliased), then refines
    (c, omega, Gamma) with Gauss-Newton on the stacked real/imaginary
    residuals.
    """
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=complex)
    if t.ndim != 1 or t.shape != z.shape:
        raise ValueError("t and z must be 1-d arrays of equal length")
    if len(t) < 4:
        raise ValueError("need at least 4 samples")
    dts = np.diff(t)
    if not np.allclose(dts, dts[0], rtol=1e-9, atol=0.0):
        raise ValueError("time grid must be uniform")
    dt = dts[0]

    lam = _linear_prediction(z, dt)
    t0 = t - t[0]

    def model(params):
        cr, ci, gamma, omega = params
        return (cr + 1j * ci) * np.exp((1j * omega - gamma) * t0)

    def residuals(params):
        r = z - model(params)
        return np.concatenate([r.real, r.imag])

    e = np.exp(lam * t0)
    c0 = np.vdot(e, z) / np.vdot(e, e)
    x0 = np.array([c0.real, c0.imag, -lam.real, lam.imag])
    if refine:
        sol = least_squares(residuals, x0, method="lm", max_nfev=200)
        x = sol.x
    else:
        x = x0
    resid = np.linalg.norm(z - model(x)) / np.linalg.norm(z)
    return ComplexDecayFit(c=complex(x[0], x[1]), omega=float(x[3]), Gamma=float(x[2]),
                           residual=float(resid))

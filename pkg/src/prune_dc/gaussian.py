"""Gaussian tail probabilities and truncated moments for mixture components.

CDF values come from ``scipy.special.ndtr`` (Cephes, erf/erfc based,
~1e-16 absolute). Upper tails are evaluated as ``ndtr(-z)`` rather than
``1 - ndtr(z)`` so that large thresholds do not cancel.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr

INV_SQRT_2PI = 0.3989422804014327


def norm_pdf(z):
    z = np.asarray(z, dtype=float)
    return INV_SQRT_2PI * np.exp(-0.5 * z * z)


def abs_tail(mean, std, t):
    """P(|X| >= t) for X ~ N(mean, std^2), elementwise; std == 0 is a point mass."""
    mean, std, t = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (mean, std, t)))
    out = np.empty(mean.shape)
    pos = std > 0
    if np.any(pos):
        m, s, tt = mean[pos], std[pos], t[pos]
        out[pos] = ndtr((-tt - m) / s) + ndtr((m - tt) / s)
    point = ~pos
    if np.any(point):
        out[point] = (np.abs(mean[point]) >= t[point]).astype(float)
    return out


def _tail_moments(z, upper):
    """Zeroth..second moments of a standard normal Z over {Z >= z} (upper)
    or {Z <= z} (lower).

    Upper:  P = Q(z),    E[Z; .] = phi(z),   E[Z^2; .] = Q(z) + z phi(z)
    Lower:  P = Phi(z),  E[Z; .] = -phi(z),  E[Z^2; .] = Phi(z) - z phi(z)
    Both follow from d/dz phi(z) = -z phi(z) and integration by parts.
    At z = +-inf the z*phi(z) products are taken as 0.
    """
    phi = norm_pdf(z)
    with np.errstate(invalid="ignore"):
        zphi = np.where(np.isfinite(z), z * phi, 0.0)
    if upper:
        p0 = ndtr(-z)
        return p0, phi, p0 + zphi
    p0 = ndtr(z)
    return p0, -phi, p0 - zphi


def thresholded_sq_error(target, mean, std, t):
    """E[(target - T_t(X))^2] for X ~ N(mean, std^2), T_t hard thresholding.

    T_t(x) = x if |x| > t else 0. Split over the kept region K = {|X| > t}:

        E[(b - X)^2; K] + b^2 P(|X| <= t).

    With D = X - b = d + s Z, d = m - b, the kept part is
    d^2 P(K) + 2 d s E[Z; K] + s^2 E[Z^2; K], using the two half-line
    moments from ``_tail_moments`` at z_hi = (t - m)/s and z_lo = (-t - m)/s.
    Zero-width components are evaluated exactly as point masses.
    """
    b, m, s, t = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (target, mean, std, t)))
    out = np.empty(b.shape)
    pos = s > 0
    if np.any(pos):
        bb, mm, ss, tt = b[pos], m[pos], s[pos], t[pos]
        d = mm - bb
        z_hi = (tt - mm) / ss
        z_lo = (-tt - mm) / ss
        p_hi, e1_hi, e2_hi = _tail_moments(z_hi, upper=True)
        p_lo, e1_lo, e2_lo = _tail_moments(z_lo, upper=False)
        kept = d * d * (p_hi + p_lo) + 2.0 * d * ss * (e1_hi + e1_lo) + ss * ss * (e2_hi + e2_lo)
        out[pos] = kept + bb * bb * np.maximum(ndtr(z_hi) - ndtr(z_lo), 0.0)
    point = ~pos
    if np.any(point):
        mm = m[point]
        kept = np.abs(mm) > t[point]
        out[point] = np.where(kept, b[point] - mm, b[point]) ** 2
    return out

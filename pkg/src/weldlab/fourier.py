"""Circle-grid Fourier utilities: conjugation, analytic series, spectral energies.

Everything here works on uniform grids theta_j = 2*pi*j/N.  Real boundary data
is extended into the disk through its analytic completion sum(c_n w^n); the
exact Dirichlet energy of such a field is sum(n |c_n|^2).
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def circle_grid(n: int) -> np.ndarray:
    """Uniform angles [0, 2pi) with n nodes."""
    return TWO_PI * np.arange(n) / n


def conjugate_periodic(values: np.ndarray) -> np.ndarray:
    """Boundary values of the harmonic conjugate (conjugate vanishing at 0).

    Acts on real samples over a uniform circle grid.  Multiplies Fourier mode n
    by -i*sign(n); the mean and the Nyquist mode are annihilated.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    vh = np.fft.fft(v)
    k = np.fft.fftfreq(n, d=1.0 / n)
    mult = -1j * np.sign(k)
    if n % 2 == 0:
        mult[n // 2] = 0.0
    return np.real(np.fft.ifft(vh * mult))


def analytic_coeffs_from_real_part(values: np.ndarray) -> np.ndarray:
    """Taylor coefficients of the analytic completion L with Re L = values on the circle.

    Returns c[0..N/2] with c[0] = mean (real), c[n] = 2 * fft-coefficient, so that
    values(theta) = Re sum_n c_n e^{i n theta}.  Im c[0] is left at 0.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    vh = np.fft.fft(v) / n
    m = n // 2
    c = np.zeros(m + 1, dtype=complex)
    c[0] = np.real(vh[0])
    c[1:m] = 2.0 * vh[1:m]
    if n % 2 == 0:
        c[m] = vh[m]  # Nyquist: keep as-is, real for real input
    else:
        c[m] = 2.0 * vh[m]
    return c


def analytic_coeffs_from_boundary(values: np.ndarray, drop_tol: float | None = None):
    """Taylor coefficients of an analytic function sampled on the unit circle.

    Returns (coeffs[0..N/2], leak) where leak is the largest magnitude among the
    negative-frequency coefficients; a large leak signals the data is not the
    boundary trace of a function analytic in the disk.
    """
    v = np.asarray(values, dtype=complex)
    n = v.size
    vh = np.fft.fft(v) / n
    m = n // 2
    coeffs = vh[: m + 1].copy()
    leak = float(np.max(np.abs(vh[m + 1:]))) if m + 1 < n else 0.0
    if drop_tol is not None and leak > drop_tol:
        raise ValueError(f"negative-frequency leakage {leak:.3e} exceeds {drop_tol:.1e}")
    return coeffs, leak


def polyval_series(coeffs: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Evaluate sum c_n w^n by Horner's scheme (complex, vectorized)."""
    w = np.asarray(w, dtype=complex)
    out = np.full(w.shape, coeffs[-1], dtype=complex)
    for c in coeffs[-2::-1]:
        out = out * w + c
    return out


def series_derivative(coeffs: np.ndarray, order: int = 1) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex)
    for _ in range(order):
        n = np.arange(1, c.size)
        c = c[1:] * n
    return c


def dirichlet_energy_series(coeffs: np.ndarray) -> float:
    """Exact disk Dirichlet energy (1/pi) * int |grad Re L|^2 for L = sum c_n w^n."""
    n = np.arange(len(coeffs))
    return float(np.sum(n * np.abs(coeffs) ** 2))


def h12_circle_fourier(values: np.ndarray) -> float:
    """H^{1/2} seminorm squared of real circle data via Fourier modes: 2*sum |n||a_n|^2."""
    v = np.asarray(values, dtype=float)
    n = v.size
    vh = np.fft.fft(v) / n
    k = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    return float(2.0 * np.sum(k * np.abs(vh) ** 2))


def resample_periodic(nodes: np.ndarray, values: np.ndarray, query: np.ndarray,
                      period: float = TWO_PI) -> np.ndarray:
    """Periodic cubic-spline resampling of (nodes, values) at query points."""
    from scipy.interpolate import CubicSpline

    x = np.asarray(nodes, dtype=float)
    y = np.asarray(values, dtype=float)
    x_ext = np.concatenate([x, [x[0] + period]])
    y_ext = np.concatenate([y, [y[0]]])
    spl = CubicSpline(x_ext, y_ext, bc_type="periodic")
    return spl(np.mod(query - x[0], period) + x[0])

"""Loewner energy and chordal Loewner evolution.

Energies come from the conformal-map formulas: the half-plane expression sums
the Dirichlet energies of the two log-derivatives, the disk expression adds the
4 log|f'(0)| - 4 log|g'(infinity)| correction.  The evolution itself is
discretized with tilted straight slits: each capacity step removes a slit whose
angle and length match the driving increment exactly.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .conformal import ConformalPair, map_curve
from .curves import JordanCurve, build_curve, build_curve_from_nodes
from .fourier import dirichlet_energy_series

ENERGY_CLAMP = 1e-6
STEPS_PER_UNIT_CAPACITY = 2000


class LoewnerError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Driving functions
# ---------------------------------------------------------------------------

@dataclass
class DrivingFunction:
    """Piecewise-linear real driving term on a strictly increasing time grid."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.size != self.values.size or self.times.size < 2:
            raise LoewnerError("need matching time/value arrays with at least two nodes")
        if np.any(np.diff(self.times) <= 0):
            raise LoewnerError("time nodes must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise LoewnerError("driving values must be finite")

    def __call__(self, t):
        return np.interp(np.asarray(t, dtype=float), self.times, self.values)

    @property
    def total_time(self) -> float:
        return float(self.times[-1])

    @classmethod
    def from_callable(cls, fn, total_time: float, n: int = 256) -> "DrivingFunction":
        t = np.linspace(0.0, total_time, n)
        return cls(t, np.asarray([fn(tt) for tt in t], dtype=float))

    @classmethod
    def from_csv(cls, text: str) -> "DrivingFunction":
        rows = [line.strip() for line in text.splitlines() if line.strip()]
        header = [c.strip().lower() for c in rows[0].split(",")]
        if header[:2] != ["t", "lambda"]:
            raise LoewnerError("driving CSV must start with header 't,lambda'")
        data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
        return cls(data[:, 0], data[:, 1])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,lambda\n")
        for t, v in zip(self.times, self.values):
            buf.write(f"{t!r},{v!r}\n")
        return buf.getvalue()


def driving_energy(lam: DrivingFunction) -> float:
    """(1/2) integral of (d lambda / dt)^2 for piecewise-linear driving (exact)."""
    dt = np.diff(lam.times)
    if np.any(dt == 0.0):
        raise LoewnerError("zero-length time step")
    dv = np.diff(lam.values)
    return float(0.5 * np.sum(dv * dv / dt))


# ---------------------------------------------------------------------------
# Tilted slit maps
# ---------------------------------------------------------------------------

def _slit_params_from_driving(delta: float, dt: float):
    """(alpha, p, q) of the tilted slit matching a driving increment over dt."""
    d = delta / (2.0 * np.sqrt(dt))
    alpha = 0.5 * (1.0 - d / np.sqrt(4.0 + d * d))
    p = np.sqrt(4.0 * alpha * dt / (1.0 - alpha))
    q = p * (1.0 - alpha) / alpha
    return alpha, p, q


def _slit_map_up(u, alpha, p, q):
    """Hydrodynamically normalized map adding a tilted slit at the origin."""
    return (u + p) ** (1.0 - alpha) * (u - q) ** alpha


def _slit_tip(alpha, p):
    return p * ((1.0 - alpha) / alpha) ** (1.0 - alpha) * np.exp(1j * np.pi * alpha)


def drive_to_trace(lam: DrivingFunction,
                   steps_per_unit: int = STEPS_PER_UNIT_CAPACITY) -> JordanCurve:
    """Chord traced by the driving function, by composing tilted slit maps."""
    total = lam.total_time
    n = max(8, int(np.ceil(total * steps_per_unit)))
    t = np.linspace(0.0, total, n + 1)
    lv = lam(t)
    dt = np.diff(t)
    dl = np.diff(lv)
    alphas = np.empty(n)
    ps = np.empty(n)
    qs = np.empty(n)
    for j in range(n):
        alphas[j], ps[j], qs[j] = _slit_params_from_driving(dl[j], dt[j])
    tips = lv[:-1] + _slit_tip(alphas, ps)
    # gamma_k = E_1 o ... o E_k(tip), applied by sweeping j downward
    pts = np.array(tips, dtype=complex)
    for j in range(n - 1, 0, -1):
        u = pts[j:] - lv[j - 1]
        pts[j:] = lv[j - 1] + _slit_map_up(u, alphas[j - 1], ps[j - 1], qs[j - 1])
    samples = np.concatenate([[complex(lv[0])], pts])
    if np.any(~np.isfinite(samples)) :
        raise LoewnerError("trace evaluation produced non-finite points")
    if np.any(samples[1:].imag < -1e-9):
        raise LoewnerError("discrete trace left the upper half-plane (step too coarse)")
    return build_curve_from_nodes("chord", t, samples, check_simple=False)


def trace_to_drive(chord) -> DrivingFunction:
    """Driving function of a simple chord in the upper half-plane from R.

    Each increment is absorbed by the tilted slit through the current image of
    the next sample; remaining samples are pushed down by Newton inversion of
    the slit map.
    """
    z = np.asarray(chord.samples if hasattr(chord, "samples") else chord, dtype=complex)
    if z.size < 3:
        raise LoewnerError("chord needs at least three samples")
    if abs(z[0].imag) > 1e-9:
        raise LoewnerError("chord must start on the real axis")
    lam0 = float(z[0].real)
    y = z[1:].copy()
    if np.any(y.imag < -1e-12):
        raise LoewnerError("chord increment leaves the upper half-plane")
    times = [0.0]
    lams = [lam0]
    lam = lam0
    t_acc = 0.0
    for k in range(y.size):
        tip = y[0] - lam
        im = max(tip.imag, 0.0)
        tip = complex(tip.real, im)
        if abs(tip) < 1e-14:
            raise LoewnerError("repeated chord samples")
        alpha = np.clip(np.angle(tip) / np.pi, 1e-9, 1.0 - 1e-9)
        p = abs(tip) / ((1.0 - alpha) / alpha) ** (1.0 - alpha)
        dt = (1.0 - alpha) * p * p / (4.0 * alpha)
        if dt <= 1e-18:
            raise LoewnerError("capacity step underflow")
        delta = p * (1.0 - 2.0 * alpha) / alpha
        t_acc += dt
        lam_prev = lam
        lam = lam + delta
        times.append(t_acc)
        lams.append(lam)
        if y.size > 1:
            y = lam_prev + _invert_slit_map(y[1:] - lam_prev, alpha, p,
                                            p * (1.0 - alpha) / alpha, dt)
        else:
            break
    return DrivingFunction(np.asarray(times), np.asarray(lams))


def _invert_slit_map(targets, alpha, p, q, dt):
    """Solve (u+p)^(1-a) (u-q)^a = target for u in the closed upper half-plane."""
    t = np.asarray(targets, dtype=complex)
    # vertical-slit initial guess with the same capacity
    u = np.sqrt(t * t + 4.0 * dt)
    u = np.where(u.imag < 0, -u, u)
    for _ in range(12):
        f = _slit_map_up(u, alpha, p, q)
        df = f * ((1.0 - alpha) / (u + p) + alpha / (u - q))
        step = (f - t) / df
        mag = np.abs(step)
        cap = 0.5 * (p + q)
        step = np.where(mag > cap, step * (cap / np.maximum(mag, 1e-300)), step)
        u_new = u - step
        u_new = np.where(u_new.imag < 0.0, u_new.real + 0.0j, u_new)
        u = u_new
        if np.max(np.abs(f - t)) < 1e-13 * max(1.0, float(np.max(np.abs(t)))):
            break
    return u


# ---------------------------------------------------------------------------
# Loewner energy of curves
# ---------------------------------------------------------------------------

def loop_energy(curve: JordanCurve, pair: ConformalPair | None = None,
                n: int | None = None) -> float:
    """Energy of a bounded loop from the disk formula (clamped at zero)."""
    if not curve.is_loop:
        raise LoewnerError("loop energy needs a bounded loop")
    if pair is None:
        pair = map_curve(curve, "disk", n=n)
    d_int = dirichlet_energy_series(pair.plus.sigma_coeffs)
    d_ext = dirichlet_energy_series(pair.minus.sigma_coeffs)
    value = (d_int + d_ext + 4.0 * np.log(abs(pair.fprime0()))
             - 4.0 * np.log(abs(pair.gprime_inf())))
    return _clamp_energy(value)


def line_energy(curve: JordanCurve, pair: ConformalPair | None = None,
                n: int | None = None) -> float:
    """Energy of a curve through infinity from the half-plane formula."""
    if not curve.is_through_infinity:
        raise LoewnerError("line energy needs a curve through infinity")
    if pair is None:
        pair = map_curve(curve, "halfplane", n=n)
    value = (dirichlet_energy_series(pair.plus.sigma_coeffs)
             + dirichlet_energy_series(pair.minus.sigma_coeffs))
    return _clamp_energy(value)


def curve_energy(curve: JordanCurve, pair: ConformalPair | None = None) -> float:
    return loop_energy(curve, pair) if curve.is_loop else line_energy(curve, pair)


def _clamp_energy(value: float) -> float:
    if value < 0.0:
        if value < -ENERGY_CLAMP:
            raise LoewnerError(f"energy {value:.3e} is negative beyond quadrature noise")
        return 0.0
    return float(value)


# ---------------------------------------------------------------------------
# Equipotential families
# ---------------------------------------------------------------------------

def equipotentials(pair: ConformalPair, params) -> list[tuple[JordanCurve, float]]:
    """Level curves of the plus-side map with their energies.

    Disk geometry: images of circles of radius r in (0,1).  Half-plane
    geometry: images of horizontal lines at height y > 0.
    """
    out = []
    for value in params:
        curve = equipotential_curve(pair, float(value))
        out.append((curve, curve_energy(curve)))
    return out


def equipotential_curve(pair: ConformalPair, value: float,
                        samples_n: int = 512) -> JordanCurve:
    if pair.geometry == "disk":
        if not 0.0 < value < 1.0:
            raise LoewnerError("disk equipotential parameter must lie in (0, 1)")
        coeffs = pair.plus.map_coeffs
        scale = value ** np.arange(len(coeffs))
        cdict = {int(k): complex(c) for k, c in enumerate(coeffs * scale)
                 if abs(c) > 1e-16 or k <= 1}
        return build_curve({"kind": "fourier_loop", "params": {"coeffs": cdict},
                            "samples_n": samples_n})
    if value <= 0.0:
        raise LoewnerError("half-plane equipotential parameter must be positive")
    plus = pair.plus

    def map_fn(t):
        t = np.asarray(t, dtype=float)
        w = plus.disk_from_ref(t + 1j * value)
        return plus.to_plane(w)

    escape = pair.curve.escape_radius
    span = 60.0
    while np.min(np.abs(map_fn(np.asarray([-span, span])))) <= 1.02 * escape and span < 1e7:
        span *= 2.0
    t = np.linspace(-span, span, samples_n)
    curve = build_curve_from_nodes("through-infinity", t, map_fn(t),
                                   closed_form="halfplane_equipotential",
                                   form_data={"map_fn": map_fn},
                                   escape_radius=escape,
                                   mobius_hint=pair.transport.inverse(),
                                   check_simple=False)
    return curve

"""Conformal maps onto the two sides of a Jordan curve.

The workhorse is a boundary-correspondence iteration for starlike analytic
loops, driven by the circle conjugation operator (FFT).  Exterior maps reuse
the interior solver through inversion of the curve about the designated center.
Curves through infinity are transported to bounded loops by a Moebius transform
and solved there; log-derivatives transform with an explicit correction whose
apparent boundary singularity is cancelled analytically before evaluation.

Both sides of every pair are ultimately functions of a unit-disk coordinate, so
all energies reduce to disk integrals or exact spectral sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import (CurveError, JordanCurve, MobiusTransform, build_curve_from_nodes)
from .fields import BoundaryFunction, DiskSeriesField
from .fourier import (analytic_coeffs_from_boundary, analytic_coeffs_from_real_part,
                      circle_grid, conjugate_periodic, polyval_series, series_derivative)

TWO_PI = 2.0 * np.pi


class MappingError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Polar boundary representations (starlike about a center)
# ---------------------------------------------------------------------------

class PolarBoundary:
    """Starlike view of a bounded loop: radius and source parameter per angle.

    Built from a dense table of (angle, log-radius, parameter); queries are
    spline-interpolated and then Newton-polished against the exact evaluator
    when one is available.
    """

    def __init__(self, phi_dense, logrho_dense, param_dense,
                 center: complex, point_fn=None, velocity_fn=None,
                 param_period: float | None = TWO_PI):
        phi = np.asarray(phi_dense, dtype=float)
        if np.any(np.diff(phi) <= 0):
            raise MappingError("boundary is not starlike about the chosen center")
        self.phi = phi
        self.logrho = np.asarray(logrho_dense, dtype=float)
        self.param = np.asarray(param_dense, dtype=float)
        self.center = complex(center)
        self.point_fn = point_fn
        self.velocity_fn = velocity_fn
        self.param_period = param_period

    @classmethod
    def from_loop(cls, curve: JordanCurve, center: complex, n_dense: int = 4096):
        d = curve.form_data
        if curve.closed_form == "circle" and abs(center - d["center"]) < 1e-14:
            phi = np.linspace(0.0, TWO_PI, n_dense, endpoint=False)
            return cls(phi, np.full(n_dense, np.log(d["radius"])), phi, center,
                       point_fn=curve.point, velocity_fn=curve.velocity)
        t = np.linspace(0.0, TWO_PI, n_dense, endpoint=False)
        pts = curve.point(t)
        rel = pts - center
        phi = np.unwrap(np.angle(rel))
        if np.any(np.diff(phi) <= 0) or phi[-1] < phi[0]:
            raise MappingError("loop is not starlike counterclockwise about the center")
        return cls(phi, np.log(np.abs(rel)), t, center,
                   point_fn=curve.point, velocity_fn=curve.velocity)

    def _interp(self, phi_query, values, period_increment: float | None):
        from scipy.interpolate import CubicSpline
        q = np.mod(np.asarray(phi_query, dtype=float) - self.phi[0], TWO_PI) + self.phi[0]
        if period_increment is None:
            # open table (parameters diverge at the seam): clamp to the range
            spl = CubicSpline(self.phi, values)
            return spl(np.clip(q, self.phi[0], self.phi[-1]))
        x = np.concatenate([self.phi, [self.phi[0] + TWO_PI]])
        y = np.concatenate([values, [values[0] + period_increment]])
        spl = CubicSpline(x, y)
        return spl(q)

    def polish(self, phi_query, t_guess):
        """Newton-polish parameters so that arg(point(t) - center) = phi."""
        if self.point_fn is None or self.velocity_fn is None:
            return t_guess
        t = np.array(t_guess, dtype=float)
        for _ in range(3):
            rel = self.point_fn(t) - self.center
            vel = self.velocity_fn(t)
            err = np.angle(rel * np.exp(-1j * np.asarray(phi_query)))
            dang = np.imag(vel / rel)
            t = t - err / np.where(np.abs(dang) < 1e-14, 1e-14, dang)
        return t

    def param_at(self, phi):
        phi = np.asarray(phi, dtype=float)
        return self.polish(phi, self._interp(phi, self.param, self.param_period))

    def log_rho(self, phi):
        phi = np.asarray(phi, dtype=float)
        if self.point_fn is not None:
            t = self.param_at(phi)
            return np.log(np.abs(self.point_fn(t) - self.center))
        return self._interp(phi, self.logrho, 0.0)

    def point_at(self, phi):
        phi = np.asarray(phi, dtype=float)
        return self.center + np.exp(self.log_rho(phi) + 1j * phi)

    def inverted(self) -> "InvertedBoundary":
        return InvertedBoundary(self)


class InvertedBoundary:
    """Polar view of the inverted curve 1/(eta - center), starlike about 0.

    A point of the original at angle -phi and radius rho appears at angle +phi
    with radius 1/rho.
    """

    def __init__(self, base: PolarBoundary):
        self.base = base
        self.center = 0.0 + 0.0j

    def log_rho(self, phi):
        return -self.base.log_rho(-np.asarray(phi, dtype=float))

    def param_at(self, phi):
        return self.base.param_at(-np.asarray(phi, dtype=float))

    def point_at(self, phi):
        phi = np.asarray(phi, dtype=float)
        return np.exp(self.log_rho(phi) + 1j * phi)


class TransportedBoundary(PolarBoundary):
    """Bounded Moebius image of a curve through infinity, with exact tails.

    The straight tails of the source map to analytic arcs ending at
    y_star = M(infinity); the dense table covers them with geometrically
    refined nodes so the polar interpolant stays accurate near y_star.
    """

    def __init__(self, curve: JordanCurve, m: MobiusTransform, n_dense: int = 4096):
        self.curve = curve
        self.m = m
        self.y_star = m.at_infinity()
        t_lo, t_hi = curve.params[0], curve.params[-1]
        open_interval = curve.closed_form == "mobius_of"
        if open_interval:
            eps = 1e-9 * (t_hi - t_lo)
            lo, hi = curve.form_data["t_range"]
            t_dense = np.concatenate([
                lo + (hi - lo) * 1e-12 + np.geomspace(1e-9, 0.2, 600) * (hi - lo),
                np.linspace(lo + 0.2 * (hi - lo), hi - 0.2 * (hi - lo), n_dense),
                hi - (hi - lo) * 1e-12 - np.geomspace(0.2, 1e-9, 600)[::-1] * (hi - lo),
            ])
            t_dense = np.sort(t_dense)
        else:
            tail = np.geomspace(1e-3, 1e7, 700)
            t_dense = np.concatenate([t_lo - tail[::-1], np.linspace(t_lo, t_hi, n_dense), t_hi + tail])
        pts = self._point_source(t_dense)
        img = m(pts)
        finite = np.isfinite(img)
        img, t_dense = img[finite], t_dense[finite]
        center = _polygon_centroid(np.concatenate([img, [self.y_star]]))
        rel = img - center
        phi = np.unwrap(np.angle(rel))
        if phi[-1] < phi[0]:
            raise MappingError("transported image traverses clockwise; transport pole on wrong side")
        if np.any(np.diff(phi) <= 0):
            raise MappingError("transported image is not starlike about its centroid")
        super().__init__(phi, np.log(np.abs(rel)), t_dense, center,
                         point_fn=lambda t: self.m(self._point_source(np.asarray(t, dtype=float))),
                         velocity_fn=self._velocity_img, param_period=None)
        self.phi_star = float(np.angle(self.y_star - center))

    def _point_source(self, t):
        return extended_point(self.curve, t)

    def _velocity_img(self, t):
        pts = self._point_source(np.asarray(t, dtype=float))
        vel = extended_velocity(self.curve, t)
        return self.m.derivative(pts) * vel


GLOBAL_FORMS = ("graph", "mobius_of", "halfplane_equipotential")


def extended_point(curve: JordanCurve, t):
    """curve.point with straight-tail continuation beyond the parameter range."""
    t = np.asarray(t, dtype=float)
    lo, hi = curve.params[0], curve.params[-1]
    if curve.closed_form in GLOBAL_FORMS or curve.is_loop:
        return curve.point(t)
    out = curve.point(np.clip(t, lo, hi))
    if curve.is_through_infinity:
        (a0, d0), (a1, d1) = curve.tail_rays()
        s0 = np.abs(curve.velocity(np.asarray(lo)))
        s1 = np.abs(curve.velocity(np.asarray(hi)))
        out = np.where(t < lo, a0 + d0 * s0 * (lo - t), out)
        out = np.where(t > hi, a1 + d1 * s1 * (t - hi), out)
    return out


def extended_velocity(curve: JordanCurve, t):
    t = np.asarray(t, dtype=float)
    lo, hi = curve.params[0], curve.params[-1]
    if curve.closed_form in GLOBAL_FORMS or curve.is_loop:
        return curve.velocity(t)
    out = curve.velocity(np.clip(t, lo, hi))
    if curve.is_through_infinity:
        (a0, d0), (a1, d1) = curve.tail_rays()
        s0 = np.abs(curve.velocity(np.asarray(lo)))
        s1 = np.abs(curve.velocity(np.asarray(hi)))
        out = np.where(t < lo, -d0 * s0, out)
        out = np.where(t > hi, d1 * s1, out)
    return out


def _polygon_centroid(z: np.ndarray) -> complex:
    zn = np.roll(z, -1)
    cross = z.real * zn.imag - zn.real * z.imag
    area = 0.5 * np.sum(cross)
    if abs(area) < 1e-14:
        return complex(np.mean(z))
    cx = np.sum((z.real + zn.real) * cross) / (6.0 * area)
    cy = np.sum((z.imag + zn.imag) * cross) / (6.0 * area)
    return complex(cx, cy)


# ---------------------------------------------------------------------------
# Boundary-correspondence iteration
# ---------------------------------------------------------------------------

def boundary_correspondence(log_rho, n: int, damping: float = 0.5,
                            tol: float = 1e-10, maxiter: int = 200):
    """Solve phi(theta) = theta + K[log_rho(phi)] by damped fixed point.

    Returns (phi, iterations, last_correction).  K is the circle conjugation
    operator; the zero-mean convention makes the derivative at the disk center
    positive for the resulting map.
    """
    theta = circle_grid(n)
    phi = theta.copy()
    correction = np.inf
    for it in range(1, maxiter + 1):
        target = theta + conjugate_periodic(log_rho(phi))
        delta = target - phi
        correction = float(np.max(np.abs(delta)))
        phi = phi + damping * delta
        if correction < tol:
            break
    else:
        raise MappingError(f"boundary correspondence stalled: correction {correction:.3e}")
    if np.any(np.diff(np.concatenate([phi, [phi[0] + TWO_PI]])) <= 0):
        raise MappingError("boundary correspondence is not monotone")
    return phi, it, correction


def _solve_side(polar, n: int):
    """One interior-type solve: returns (series coeffs, phi at grid, leak, iters)."""
    phi, iters, corr = boundary_correspondence(polar.log_rho, n)
    boundary = polar.point_at(phi)
    coeffs, leak = analytic_coeffs_from_boundary(boundary)
    return coeffs, phi, leak, iters


# ---------------------------------------------------------------------------
# Sigma (log-derivative) series assembly
# ---------------------------------------------------------------------------

def _sigma_from_boundary(re_values: np.ndarray, anchor_w: complex | None,
                         anchor_value: float) -> np.ndarray:
    """Series of L with Re L sampled on the circle and Im L(anchor_w) = anchor_value.

    With anchor_w None the anchor is the disk center: Im L(0) = anchor_value.
    """
    coeffs = analytic_coeffs_from_real_part(re_values)
    if anchor_w is None:
        coeffs[0] = coeffs[0].real + 1j * anchor_value
        return coeffs
    im_at_anchor = np.imag(polyval_series(coeffs, np.asarray(anchor_w)))
    coeffs[0] = coeffs[0].real + 1j * (anchor_value - im_at_anchor)
    return coeffs


def _stable_ratio_series(numer_coeffs: np.ndarray, unit_root: complex) -> np.ndarray:
    """Taylor series of numer(w) / (1 - conj(unit_root) * w).

    Requires numer(unit_root) = 0; the recursion q_n = c_n + conj(root) q_{n-1}
    then produces decaying coefficients.
    """
    beta = np.conj(unit_root)
    q = np.empty_like(numer_coeffs)
    acc = 0.0 + 0.0j
    for i, c in enumerate(numer_coeffs):
        acc = c + beta * acc
        q[i] = acc
    return q


# ---------------------------------------------------------------------------
# Side maps and the conformal pair
# ---------------------------------------------------------------------------

@dataclass
class SideMap:
    """One side of a pair, reduced to a unit-disk coordinate w.

    to_plane(w) evaluates the Riemann map; sigma_coeffs is the series of
    log (derivative with respect to the reference coordinate), so Re gives
    log|f'| and Im a continuous branch of arg f'.
    """

    pair: "ConformalPair"
    side: str                      # "plus" | "minus"
    map_coeffs: np.ndarray         # interior-type series in the disk coordinate
    sigma_coeffs: np.ndarray
    theta: np.ndarray              # disk-coordinate boundary angles (grid)
    boundary_points: np.ndarray    # curve points at the grid
    boundary_params: np.ndarray    # source curve parameters at the grid
    arcpos: np.ndarray             # monotone position along the curve at the grid
    data: dict = field(default_factory=dict)

    # -- disk-coordinate evaluation ------------------------------------------

    def to_plane(self, w):
        w = np.asarray(w, dtype=complex)
        pair = self.pair
        if self.side == "plus":
            y = polyval_series(self.map_coeffs, w)
        else:
            fhat = polyval_series(self.map_coeffs, w)
            with np.errstate(divide="ignore", invalid="ignore"):
                y = pair.center + 1.0 / fhat
        if pair.transport is None:
            return y
        return pair.transport(y)

    def dplane(self, w):
        """d(to_plane)/dw; blows up only at the disk point over curve-infinity."""
        w = np.asarray(w, dtype=complex)
        pair = self.pair
        if self.side == "plus":
            dy = polyval_series(series_derivative(self.map_coeffs), w)
            y = polyval_series(self.map_coeffs, w) if pair.transport is not None else None
        else:
            fhat = polyval_series(self.map_coeffs, w)
            dfhat = polyval_series(series_derivative(self.map_coeffs), w)
            with np.errstate(divide="ignore", invalid="ignore"):
                dy = -dfhat / fhat ** 2
                y = pair.center + 1.0 / fhat if pair.transport is not None else None
        if pair.transport is None:
            return dy
        return pair.transport.derivative(y) * dy

    def sigma_field(self) -> DiskSeriesField:
        return DiskSeriesField(self.sigma_coeffs.copy(), part="re")

    def arg_field(self) -> DiskSeriesField:
        return DiskSeriesField(self.sigma_coeffs.copy(), part="im")

    def log_speed_boundary(self, theta=None) -> np.ndarray:
        """log |d(map)/d(reference boundary coordinate)| on the grid (or at theta)."""
        th = self.theta if theta is None else np.asarray(theta, dtype=float)
        return np.real(polyval_series(self.sigma_coeffs, np.exp(1j * th)))

    # -- reference-coordinate conversions --------------------------------------

    def disk_from_ref(self, z):
        """Reference-domain point (D, D*, H, H*) -> disk coordinate."""
        z = np.asarray(z, dtype=complex)
        pair = self.pair
        if pair.geometry == "disk":
            return z if self.side == "plus" else 1.0 / z
        a, b = (pair.psi_in_ab if self.side == "plus" else pair.psi_out_ab)
        w_anchor = pair.w_inf if self.side == "plus" else np.exp(1j * pair.psi_inf)
        zeta = a * z + b
        w = w_anchor * (zeta - 1j) / (zeta + 1j)
        return w if self.side == "plus" else 1.0 / w

    def ref_from_disk(self, w):
        w = np.asarray(w, dtype=complex)
        pair = self.pair
        if pair.geometry == "disk":
            return w if self.side == "plus" else 1.0 / w
        a, b = (pair.psi_in_ab if self.side == "plus" else pair.psi_out_ab)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.side == "plus":
                what = np.conj(pair.w_inf) * w
            else:
                what = np.conj(np.exp(1j * pair.psi_inf)) * (1.0 / w)
            zeta = 1j * (1.0 + what) / (1.0 - what)
            return (zeta - b) / a

    def invert_plane(self, z, newton_steps: int = 25) -> np.ndarray:
        """Disk coordinate of plane points on this side (Newton on the series)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        pair = self.pair
        y = pair.transport.inverse()(z) if pair.transport is not None else z
        if self.side == "plus":
            target = y
        else:
            target = 1.0 / (y - pair.center)
        coeffs = self.map_coeffs
        dcoeffs = series_derivative(coeffs)
        # initial guess from a coarse image lattice
        if "lattice" not in self.data:
            r = np.concatenate([np.linspace(0.05, 0.95, 14), [0.99]])
            th = circle_grid(96)
            wl = (r[:, None] * np.exp(1j * th)[None, :]).ravel()
            self.data["lattice"] = (wl, polyval_series(coeffs, wl))
        wl, fl = self.data["lattice"]
        idx = np.argmin(np.abs(fl[None, :] - target[:, None]), axis=1)
        w = wl[idx]
        for _ in range(newton_steps):
            fw = polyval_series(coeffs, w)
            dfw = polyval_series(dcoeffs, w)
            step = (fw - target) / np.where(np.abs(dfw) < 1e-300, 1e-300, dfw)
            step_len = np.abs(step)
            step = np.where(step_len > 0.2, step * (0.2 / step_len), step)
            w = w - step
            w = np.where(np.abs(w) > 1.0 - 1e-13, w / np.abs(w) * (1.0 - 1e-13), w)
            if np.max(np.abs(fw - target)) < 1e-13 * max(1.0, float(np.max(np.abs(target)))):
                break
        return w


@dataclass
class ConformalPair:
    """Riemann maps for the two sides of a Jordan curve.

    geometry "disk": plus side is the bounded component via f: D -> Omega with
    f(0) = center and f'(0) > 0; minus side via g: D* -> Omega* with
    g(infinity) = infinity, stored through the inversion series F with
    g(z) = center + 1/F(1/z).  The exterior parameter is rotated so the two
    boundary anchors coincide: g(1) = f(1).

    geometry "halfplane": the curve is transported to a bounded loop, solved
    there, and both sources H, H* are wired through rotated Cayley transforms
    fixing infinity, normalized by two curve anchor points.
    """

    curve: JordanCurve
    geometry: str
    center: complex
    transport: MobiusTransform | None = None     # bounded rep -> plane (None for disk)
    w_inf: complex | None = None                 # disk boundary point over curve-infinity
    psi_inf: float | None = None                 # exterior boundary angle over infinity
    psi_in_ab: tuple | None = None
    psi_out_ab: tuple | None = None
    normalization: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    _sides: dict = field(default_factory=dict)

    def side(self, which: str) -> SideMap:
        key = "plus" if which in ("plus", "interior", "upper") else "minus"
        return self._sides[key]

    @property
    def plus(self) -> SideMap:
        return self._sides["plus"]

    @property
    def minus(self) -> SideMap:
        return self._sides["minus"]

    def fprime0(self) -> complex:
        """f'(0) for disk geometry."""
        return self._sides["plus"].map_coeffs[1]

    def gprime_inf(self) -> complex:
        """g'(infinity) for disk geometry (1 / F'(0))."""
        return 1.0 / self._sides["minus"].map_coeffs[1]


# ---------------------------------------------------------------------------
# map_curve
# ---------------------------------------------------------------------------

def map_curve(curve: JordanCurve, geometry: str | None = None, *,
              center: complex | None = None, n: int | None = None,
              transport_pole: complex | None = None) -> ConformalPair:
    """Solve for the conformal pair of a curve.

    geometry defaults to "disk" for bounded loops and "halfplane" for curves
    through infinity.
    """
    if geometry is None:
        geometry = "disk" if curve.is_loop else "halfplane"
    n = n or max(len(curve.params), 256)
    n = 1 << int(np.ceil(np.log2(n)))
    if geometry == "disk":
        if not curve.is_loop:
            raise MappingError("disk geometry requires a bounded loop")
        return _map_bounded(curve, center, n)
    if geometry == "halfplane":
        if not curve.is_through_infinity:
            raise MappingError("halfplane geometry requires a curve through infinity")
        return _map_through_infinity(curve, n, transport_pole)
    raise MappingError(f"unknown geometry {geometry!r}")


def _map_bounded(curve: JordanCurve, center: complex | None, n: int) -> ConformalPair:
    z_c = curve.centroid() if center is None else complex(center)
    polar = PolarBoundary.from_loop(curve, z_c)
    theta = circle_grid(n)

    f_coeffs, phi_int, leak_int, it_int = _solve_side(polar, n)
    inv = polar.inverted()
    fhat_coeffs, phihat, leak_ext, it_ext = _solve_side(inv, n)
    fhat_coeffs[0] = 0.0  # F(0) = 0 exactly: the inverted domain is centered

    pair = ConformalPair(curve=curve, geometry="disk", center=z_c)

    # interior tables
    t_int = polar.param_at(phi_int)
    pts_int = polar.point_at(phi_int)
    s_int = _param_to_arclength(curve, t_int)

    # exterior tables before alignment: boundary angle psi = -theta_hat (mod 2pi)
    psi_raw = np.mod(-theta, TWO_PI)
    t_ext = inv.param_at(phihat)
    pts_ext = polar.point_at(-phihat)
    s_ext = _param_to_arclength(curve, t_ext)

    total = _loop_length(curve)
    # rotation beta aligning g(1) with f(1) through equal arclength positions
    order = np.argsort(psi_raw)
    psi_sorted = psi_raw[order]
    s_sorted = np.unwrap(s_ext[order] * (TWO_PI / total)) * (total / TWO_PI)
    s_sorted = s_sorted - np.floor(s_sorted[0] / total) * total
    s_query = s_sorted[0] + np.mod(s_int[0] - s_sorted[0], total)
    beta = float(np.interp(s_query, np.concatenate([s_sorted, [s_sorted[0] + total]]),
                           np.concatenate([psi_sorted, [psi_sorted[0] + TWO_PI]])))
    m_idx = np.arange(fhat_coeffs.size)
    fhat_aligned = fhat_coeffs * np.exp(-1j * m_idx * beta)
    psi_new = np.mod(psi_raw - beta, TWO_PI)

    # sigma series
    fp_boundary = polyval_series(series_derivative(f_coeffs), np.exp(1j * theta))
    sigma_f = _sigma_from_boundary(np.log(np.abs(fp_boundary)), None,
                                   float(np.angle(f_coeffs[1])))
    sigma_g = _exterior_sigma(fhat_aligned, theta)

    pair._sides["plus"] = SideMap(pair, "plus", f_coeffs, sigma_f, theta,
                                  pts_int, t_int, s_int)
    ext_order = np.argsort(psi_new)
    pair._sides["minus"] = SideMap(pair, "minus", fhat_aligned, sigma_g,
                                   psi_new[ext_order], pts_ext[ext_order],
                                   t_ext[ext_order], s_ext[ext_order])
    pair.normalization = {
        "f0": z_c, "fprime0": complex(f_coeffs[1]),
        "gprime_inf_abs": float(1.0 / np.abs(fhat_aligned[1])),
        "exterior_rotation": beta,
    }
    pair.diagnostics = {
        "interior_iterations": it_int, "exterior_iterations": it_ext,
        "interior_leak": leak_int, "exterior_leak": leak_ext,
    }
    return pair


def _loop_length(curve: JordanCurve) -> float:
    s = curve.arclength
    tail = np.abs(curve.samples[0] - curve.samples[-1])
    if curve.closed_form is not None:
        # arclength table from quadrature covers panels up to the closing one
        gx, gw = np.polynomial.legendre.leggauss(6)
        t0, t1 = curve.params[-1], curve.params[0] + TWO_PI
        mid, half = 0.5 * (t0 + t1), 0.5 * (t1 - t0)
        tail = float(np.sum(np.abs(curve.velocity(mid + half * gx)) * gw) * half)
    return float(s[-1] + tail)


def _param_to_arclength(curve: JordanCurve, t: np.ndarray) -> np.ndarray:
    from scipy.interpolate import CubicSpline
    tp = curve.params
    sp = curve.arclength
    if curve.is_loop:
        total = _loop_length(curve)
        t_ext = np.concatenate([tp, [tp[0] + TWO_PI]])
        s_ext = np.concatenate([sp, [total]])
        spl = CubicSpline(t_ext, s_ext)
        tt = np.mod(t - tp[0], TWO_PI) + tp[0]
        return spl(tt)
    spl = CubicSpline(tp, sp)
    return spl(np.clip(t, tp[0], tp[-1]))


def _exterior_sigma(fhat_coeffs: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Series of log g'(1/w) on the disk, g(z) = center + 1/F(1/z).

    log g'(1/w) = log F'(w) - 2 log (F(w)/w); both factors are analytic and
    zero-free, so the real parts are FFT'd and the imaginary anchor is taken
    at the disk center where arg g'(infinity) = -arg F'(0).
    """
    w = np.exp(1j * theta)
    fp = polyval_series(series_derivative(fhat_coeffs), w)
    f_over_w = polyval_series(fhat_coeffs[1:], w)  # F(w)/w
    re_vals = np.log(np.abs(fp)) - 2.0 * np.log(np.abs(f_over_w))
    return _sigma_from_boundary(re_vals, None, float(-np.angle(fhat_coeffs[1])))


# ---------------------------------------------------------------------------
# Through-infinity solve
# ---------------------------------------------------------------------------

def pick_transport(curve: JordanCurve, transport_pole: complex | None) -> MobiusTransform:
    """Moebius sending the curve to a bounded loop (hint wins when present)."""
    if transport_pole is None and curve.mobius_hint is not None:
        return curve.mobius_hint
    if transport_pole is None:
        k = len(curve.params) // 2
        t_mid = curve.params[k]
        tang = curve.unit_tangents()[k]
        span = float(np.max(np.abs(curve.samples.imag - np.median(curve.samples.imag))))
        depth = 2.0 + 2.0 * span
        pole = curve.point(np.asarray(t_mid)) + (-1j * tang) * depth
        if curve.side_of(pole)[0] != -1:
            pole = curve.point(np.asarray(t_mid)) + (1j * tang) * depth
        transport_pole = complex(pole)
    return MobiusTransform.inversion_about(transport_pole)


def _map_through_infinity(curve: JordanCurve, n: int,
                          transport_pole: complex | None) -> ConformalPair:
    m = pick_transport(curve, transport_pole)
    polar = TransportedBoundary(curve, m)
    back = m.inverse()
    theta = circle_grid(n)
    tail_angle = float(np.angle(curve.tail_rays()[1][1]))

    f_coeffs, phi_int, leak_int, it_int = _solve_side(polar, n)
    inv = polar.inverted()
    fhat_coeffs, phihat, leak_ext, it_ext = _solve_side(inv, n)
    fhat_coeffs[0] = 0.0

    pair = ConformalPair(curve=curve, geometry="halfplane", center=polar.center,
                         transport=back)

    # disk boundary point over curve-infinity, both sides
    phi_star = polar.phi_star
    theta_star = _theta_at_angle(theta, phi_int, phi_star)
    w_inf = np.exp(1j * theta_star)
    psi_raw = np.mod(-theta, TWO_PI)
    thetahat_star = _theta_at_angle(theta, phihat, np.mod(-phi_star, TWO_PI),
                                    wrap=TWO_PI)
    psi_inf = float(np.mod(-thetahat_star, TWO_PI))

    # source normalization anchors: curve params 0 and a nearby node
    t_anchor, t_second = _anchor_params(curve)
    tab_int = polar.param_at(phi_int)
    tab_ext = inv.param_at(phihat)
    a_int, b_int = _source_affine(theta, tab_int, theta_star, t_anchor, t_second)
    psi_tab = psi_raw
    a_ext, b_ext = _source_affine_ext(psi_tab, tab_ext, psi_inf, t_anchor, t_second)

    pair.w_inf = w_inf
    pair.psi_inf = psi_inf
    pair.psi_in_ab = (a_int, b_int)
    pair.psi_out_ab = (a_ext, b_ext)

    # sigma series with analytic cancellation of the infinity singularity
    w_grid = np.exp(1j * theta)
    sigma_f = _halfplane_sigma_interior(f_coeffs, back, w_inf, a_int, w_grid, tail_angle)
    sigma_g = _halfplane_sigma_exterior(fhat_coeffs, back, polar.center,
                                        psi_inf, a_ext, w_grid, tail_angle)

    pts_int = polar.point_at(phi_int)
    pts_ext = polar.point_at(-phihat)
    plane_int = back(pts_int)
    plane_ext = back(pts_ext)

    pair._sides["plus"] = SideMap(pair, "plus", f_coeffs, sigma_f, theta,
                                  plane_int, tab_int, tab_int)
    ext_order = np.argsort(psi_tab)
    pair._sides["minus"] = SideMap(pair, "minus", fhat_coeffs, sigma_g,
                                   psi_tab[ext_order], plane_ext[ext_order],
                                   tab_ext[ext_order], tab_ext[ext_order])
    pair.normalization = {
        "f_fixes_infinity": True,
        "anchor_params": (float(t_anchor), float(t_second)),
        "anchor_points": (complex(extended_point(curve, np.asarray(t_anchor))),
                          complex(extended_point(curve, np.asarray(t_second)))),
    }
    pair.diagnostics = {
        "interior_iterations": it_int, "exterior_iterations": it_ext,
        "interior_leak": leak_int, "exterior_leak": leak_ext,
        "transport_pole": complex(m.pole()),
    }
    return pair


def _anchor_params(curve: JordanCurve):
    lo, hi = curve.params[0], curve.params[-1]
    span = hi - lo
    t0 = 0.0 if lo < 0.0 < hi else lo + 0.5 * span
    t1 = t0 + min(1.0, 0.05 * span)
    return t0, t1


def _theta_at_angle(theta: np.ndarray, phi: np.ndarray, phi_target: float,
                    wrap: float = TWO_PI) -> float:
    """Invert the monotone correspondence phi(theta) at a single target angle."""
    phi_u = np.unwrap(phi)
    tgt = phi_u[0] + np.mod(phi_target - phi_u[0], wrap)
    th_ext = np.concatenate([theta, [theta[0] + TWO_PI]])
    phi_ext = np.concatenate([phi_u, [phi_u[0] + TWO_PI]])
    return float(np.interp(tgt, phi_ext, th_ext))


def _source_affine(theta, params, theta_star, t_anchor, t_second):
    """(a, b) with psi_in(z) = w_inf (az+b-i)/(az+b+i) matching two anchors."""
    alpha0 = _angle_of_param(theta, params, t_anchor, theta_star)
    alpha1 = _angle_of_param(theta, params, t_second, theta_star)
    b = -1.0 / np.tan(alpha0 / 2.0)
    a = -1.0 / np.tan(alpha1 / 2.0) - b
    if a <= 0:
        raise MappingError("interior boundary correspondence runs against orientation")
    return float(a), float(b)


def _source_affine_ext(psi, params, psi_inf, t_anchor, t_second):
    alpha0 = _angle_of_param(psi, params, t_anchor, psi_inf)
    alpha1 = _angle_of_param(psi, params, t_second, psi_inf)
    b = -1.0 / np.tan(alpha0 / 2.0)
    a = -1.0 / np.tan(alpha1 / 2.0) - b
    if a <= 0:
        raise MappingError("exterior boundary correspondence runs against orientation")
    return float(a), float(b)


def _angle_of_param(grid, params, t_target, grid_star) -> float:
    """Angle (relative to the infinity node, in (0, 2pi)) of a source parameter."""
    order = np.argsort(params)
    g = np.interp(t_target, params[order], grid[order])
    return float(np.mod(g - grid_star, TWO_PI))


def _halfplane_sigma_interior(f_coeffs, back: MobiusTransform, w_inf, a_int,
                              w_grid, tail_angle) -> np.ndarray:
    # f'(z) = K * ftilde'(w) / q(w)^2,  q = (C ftilde + D) / (1 - conj(w_inf) w)
    C, D = back.c, back.d
    numer = C * f_coeffs.copy()
    numer[0] += D
    q_coeffs = _stable_ratio_series(numer, w_inf)
    fp = polyval_series(series_derivative(f_coeffs), w_grid)
    qv = polyval_series(q_coeffs, w_grid)
    K_abs = abs(back.det) * a_int / 2.0
    re_vals = np.log(K_abs) + np.log(np.abs(fp)) - 2.0 * np.log(np.abs(qv))
    return _sigma_from_boundary(re_vals, w_inf, tail_angle)


def _halfplane_sigma_exterior(fhat_coeffs, back: MobiusTransform, center,
                              psi_inf, a_ext, w_grid, tail_angle) -> np.ndarray:
    # g'(z) = K* F'(w) / Q(w)^2,  Q = ((C center + D) F + C) / (w - e^{-i psi_inf})
    C, D = back.c, back.d
    numer = (C * center + D) * fhat_coeffs.copy()
    numer[0] += C
    root = np.exp(-1j * psi_inf)
    # divide by (w - root) = -root (1 - conj(root)... ) careful: w - root = -root(1 - w/root)
    q_over = _stable_ratio_series(numer, root)
    # numer/(1 - conj(root) w) = numer/(1 - w/root); and (w - root) = -root (1 - w/root)
    fp = polyval_series(series_derivative(fhat_coeffs), w_grid)
    qv = polyval_series(q_over, w_grid) / (-root)
    K_abs = abs(back.det) * a_ext / 2.0
    re_vals = np.log(K_abs) + np.log(np.abs(fp)) - 2.0 * np.log(np.abs(qv))
    what_inf = np.exp(-1j * psi_inf)
    return _sigma_from_boundary(re_vals, what_inf, tail_angle)


# ---------------------------------------------------------------------------
# Welding homeomorphism of a pair
# ---------------------------------------------------------------------------

@dataclass
class Homeomorphism:
    """Strictly increasing boundary map with log-derivative samples.

    domain "circle": nodes and values are angles, h(0) = 0 and degree 1.
    domain "line": h(0) = 0; affine continuation beyond the sampled window.
    """

    domain: str
    nodes: np.ndarray
    values: np.ndarray
    log_deriv: np.ndarray | None = None
    normalization: dict = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(self.values) <= 0):
            raise MappingError("homeomorphism samples are not strictly increasing")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.domain == "circle":
            per_n = np.concatenate([self.nodes, [self.nodes[0] + TWO_PI]])
            per_v = np.concatenate([self.values, [self.values[0] + TWO_PI]])
            k = np.floor((x - self.nodes[0]) / TWO_PI)
            xr = x - TWO_PI * k
            return np.interp(xr, per_n, per_v) + TWO_PI * k
        lo, hi = self.nodes[0], self.nodes[-1]
        out = np.interp(np.clip(x, lo, hi), self.nodes, self.values)
        sl_lo = self.slope_end("lo")
        sl_hi = self.slope_end("hi")
        out = np.where(x < lo, self.values[0] + sl_lo * (x - lo), out)
        out = np.where(x > hi, self.values[-1] + sl_hi * (x - hi), out)
        return out

    def slope_end(self, which: str) -> float:
        if self.log_deriv is not None:
            return float(np.exp(self.log_deriv[0 if which == "lo" else -1]))
        if which == "lo":
            return float((self.values[1] - self.values[0]) / (self.nodes[1] - self.nodes[0]))
        return float((self.values[-1] - self.values[-2]) / (self.nodes[-1] - self.nodes[-2]))

    def inverse_at(self, y):
        y = np.asarray(y, dtype=float)
        if self.domain == "circle":
            per_v = np.concatenate([self.values, [self.values[0] + TWO_PI]])
            per_n = np.concatenate([self.nodes, [self.nodes[0] + TWO_PI]])
            k = np.floor((y - self.values[0]) / TWO_PI)
            yr = y - TWO_PI * k
            return np.interp(yr, per_v, per_n) + TWO_PI * k
        lo, hi = self.values[0], self.values[-1]
        out = np.interp(np.clip(y, lo, hi), self.values, self.nodes)
        out = np.where(y < lo, self.nodes[0] + (y - lo) / self.slope_end("lo"), out)
        out = np.where(y > hi, self.nodes[-1] + (y - hi) / self.slope_end("hi"), out)
        return out

    def inverse(self) -> "Homeomorphism":
        ld = None if self.log_deriv is None else -_resample_monotone(
            self.values, self.log_deriv, self.values)
        return Homeomorphism(self.domain, self.values.copy(), self.nodes.copy(), ld,
                             {"inverse_of": self.normalization})

    def qs_ratios(self, n_triples: int = 64) -> np.ndarray:
        """Sampled quasisymmetry ratios (h(x+t)-h(x)) / (h(x)-h(x-t))."""
        lo, hi = self.nodes[0], self.nodes[-1]
        xs = np.linspace(lo + 0.25 * (hi - lo), hi - 0.25 * (hi - lo), n_triples)
        t = 0.1 * (hi - lo)
        num = self(xs + t) - self(xs)
        den = self(xs) - self(xs - t)
        return num / den


def _resample_monotone(x, y, q):
    return np.interp(q, x, y)


def welding_homeo(pair: ConformalPair) -> Homeomorphism:
    """h = g^{-1} o f on the reference boundary, from the correspondence tables."""
    plus, minus = pair.plus, pair.minus
    if pair.geometry == "disk":
        total = _loop_length(pair.curve)
        s_plus = plus.arcpos
        psi = minus.theta
        s_minus = np.unwrap(minus.arcpos * (TWO_PI / total)) * (total / TWO_PI)
        # shift so s_minus starts at the aligned anchor (= s_plus[0])
        s_minus = s_minus - np.round((s_minus[0] - s_plus[0]) / total) * total
        psi_ext = np.concatenate([psi, [psi[0] + TWO_PI]])
        s_ext = np.concatenate([s_minus, [s_minus[0] + total]])
        sq = np.unwrap(s_plus * (TWO_PI / total)) * (total / TWO_PI)
        sq = s_ext[0] + np.mod(sq - s_ext[0], total)
        h = np.interp(sq, s_ext, psi_ext)
        h = np.unwrap(h)
        h = h - TWO_PI * np.round(h[0] / TWO_PI)
        theta = plus.theta
        ld = (plus.log_speed_boundary()
              - np.real(polyval_series(minus.sigma_coeffs, np.exp(-1j * h))))
        return Homeomorphism("circle", theta, h, ld, {"fixes": 1.0, "degree": 1})
    # halfplane: match source curve parameters
    x_window = pair.curve.escape_radius * 0.8
    t_plus = plus.arcpos
    x_plus = np.real(plus.ref_from_disk(np.exp(1j * plus.theta)))
    keep = np.isfinite(x_plus) & (np.abs(x_plus) < x_window)
    x_plus, t_plus = x_plus[keep], t_plus[keep]
    order = np.argsort(x_plus)
    x_plus, t_plus = x_plus[order], t_plus[order]
    t_minus = minus.arcpos
    x_minus = np.real(minus.ref_from_disk(np.exp(-1j * minus.theta)))
    good = np.isfinite(x_minus)
    t_minus, x_minus = t_minus[good], x_minus[good]
    order = np.argsort(t_minus)
    t_minus, x_minus = t_minus[order], x_minus[order]
    h_vals = np.interp(t_plus, t_minus, x_minus)
    theta_at_x = np.angle(plus.disk_from_ref(x_plus + 0j))
    ld_plus = plus.log_speed_boundary(theta_at_x)
    what = minus.disk_from_ref(h_vals + 0j)
    ld_minus = np.real(polyval_series(minus.sigma_coeffs, what))
    return Homeomorphism("line", x_plus, h_vals, ld_plus - ld_minus, {"fixes": 0.0})


def log_deriv(pair: ConformalPair, side: str) -> DiskSeriesField:
    """log|derivative| of the chosen side as a harmonic disk field.

    The imaginary companion (continuous arg branch) is available through
    .conjugate-free access: DiskSeriesField(part="im") on the same series.
    """
    sm = pair.side(side)
    dcheck = polyval_series(series_derivative(sm.map_coeffs),
                            0.5 * np.exp(1j * circle_grid(16)))
    if np.any(np.abs(dcheck) < 1e-13):
        raise MappingError("map derivative vanishes at an interior probe")
    return sm.sigma_field()

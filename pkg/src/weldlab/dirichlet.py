"""Dirichlet energies, H^{1/2} seminorms, harmonic extension, traces.

Energies over a curve side are always computed by pulling the integrand back to
the side's unit-disk coordinate: spectral parts contribute grad = conj(L'), a
composed plane field contributes conj(T') * (grad phi)(T).  The plane energy of
a field attached to a curve is the sum over the two sides; the curve itself has
measure zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield

import numpy as np

from .conformal import ConformalPair, SideMap
from .fields import (BoundaryFunction, ComplexField, DiskSeriesField, ScalarField,
                     gaussian_plane_energy)
from .fourier import (analytic_coeffs_from_real_part, circle_grid,
                      dirichlet_energy_series, h12_circle_fourier, polyval_series)
from .quadrature import (DELTA_LADDER, disk_integral, plane_integral, disk_average,
                         gauss_legendre, richardson_to_zero)

TWO_PI = 2.0 * np.pi


class EnergyError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Fields attached to one side of a curve
# ---------------------------------------------------------------------------

@dataclass
class SideField:
    """Real field on one side of a curve, expressed in the side's disk coordinate.

    disk_terms are harmonic series in the disk coordinate; plane_field is
    composed with the Riemann map.  Beyond the escape radius the plane part is
    frozen at its value at infinity (gradient zero), which is exact for the
    admissible field classes.
    """

    sidemap: SideMap
    disk_terms: list = dfield(default_factory=list)
    plane_field: ScalarField | None = None
    const: float = 0.0

    def _plane_guard(self, w):
        z = self.sidemap.to_plane(w)
        pf = self.plane_field
        cap = max(pf.support_radius * 1.05, 1.0)
        far = ~np.isfinite(z) | (np.abs(z) > cap)
        return z, far

    def disk_value(self, w):
        w = np.asarray(w, dtype=complex)
        out = np.full(w.shape, self.const, dtype=float)
        for term in self.disk_terms:
            out = out + term.value(w)
        if self.plane_field is not None:
            z, far = self._plane_guard(w)
            vals = self.plane_field.value(np.where(far, 0.0, z))
            c_inf = self.plane_field.c_inf if self.plane_field.c_inf is not None else 0.0
            out = out + np.where(far, c_inf, vals)
        return out

    def disk_grad(self, w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape, dtype=complex)
        for term in self.disk_terms:
            out = out + term.grad(w)
        if self.plane_field is not None:
            z, far = self._plane_guard(w)
            zz = np.where(far, 0.0, z)
            g = self.plane_field.grad(zz) * np.conj(self.sidemap.dplane(w))
            out = out + np.where(far, 0.0, g)
        return out

    def boundary_values(self, theta=None):
        """Values on the reference boundary (disk coordinate |w| = 1)."""
        th = self.sidemap.theta if theta is None else np.asarray(theta, dtype=float)
        w = np.exp(1j * th) if self.sidemap.side == "plus" else np.exp(-1j * th)
        out = np.full(th.shape, self.const, dtype=float)
        for term in self.disk_terms:
            out = out + term.value(w)
        if self.plane_field is not None:
            if theta is None:
                pts = self.sidemap.boundary_points
            else:
                pts = self.sidemap.to_plane(w)
            out = out + self.plane_field.value(pts)
        return out

    def plane_value(self, z):
        w = self.sidemap.invert_plane(z)
        return self.disk_value(w)

    def plane_grad(self, z):
        w = self.sidemap.invert_plane(z)
        dp = self.sidemap.dplane(w)
        out = np.zeros(np.shape(w), dtype=complex)
        for term in self.disk_terms:
            out = out + term.grad(w)
        out = out / np.conj(dp)
        if self.plane_field is not None:
            out = out + self.plane_field.grad(np.asarray(z, dtype=complex))
        return out

    def __sub__(self, other: "SideField") -> "SideField":
        if not isinstance(other, SideField):
            return NotImplemented
        if other.sidemap is not self.sidemap:
            raise EnergyError("side fields live on different sides")
        pf = self.plane_field
        if other.plane_field is not None:
            pf = (pf - other.plane_field) if pf is not None else (other.plane_field * -1.0)
        terms = self.disk_terms + [t.scaled(-1.0) for t in other.disk_terms]
        return SideField(self.sidemap, terms, pf, self.const - other.const)


@dataclass
class TwoSidedField:
    """Field on the whole plane given by one SideField per curve side."""

    curve: object
    pair: ConformalPair
    plus: SideField
    minus: SideField
    glued: bool = True

    def side_fields(self):
        return (self.plus, self.minus)

    def value(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        side = self.curve.side_of(z)
        out = np.empty(z.shape, dtype=float)
        for s, fld in ((1, self.plus), (-1, self.minus)):
            mask = side == s
            if np.any(mask):
                out[mask] = fld.plane_value(z[mask])
        return out

    def grad(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        side = self.curve.side_of(z)
        out = np.empty(z.shape, dtype=complex)
        for s, fld in ((1, self.plus), (-1, self.minus)):
            mask = side == s
            if np.any(mask):
                out[mask] = fld.plane_grad(z[mask])
        return out


# ---------------------------------------------------------------------------
# Dirichlet energies
# ---------------------------------------------------------------------------

def side_energy(fld: SideField, n_radial=None, n_angular=None, spectral: bool = True) -> float:
    """Dirichlet energy of a side field.

    Pure series fields of one part use the exact spectral sum; composed plane
    parts force the disk pullback quadrature.
    """
    kw = {}
    if n_radial:
        kw["n_radial"] = n_radial
    if n_angular:
        kw["n_angular"] = n_angular
    if not fld.disk_terms and fld.plane_field is None:
        return 0.0
    same_part = fld.disk_terms and all(t.part == fld.disk_terms[0].part for t in fld.disk_terms)
    if spectral and fld.plane_field is None and same_part:
        coeffs = fld.disk_terms[0].coeffs.copy()
        for term in fld.disk_terms[1:]:
            coeffs = _add_coeffs(coeffs, term.coeffs)
        return dirichlet_energy_series(coeffs)
    return disk_integral(lambda w: np.abs(fld.disk_grad(w)) ** 2, **kw)


def _add_coeffs(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = a.copy()
    out[: len(b)] += b
    return out


def side_inner(f1: SideField, f2: SideField, **kw) -> float:
    """Dirichlet inner product (1/pi) int <grad f1, grad f2> on a shared side."""
    return disk_integral(lambda w: np.real(f1.disk_grad(w) * np.conj(f2.disk_grad(w))), **kw)


def plane_field_energy(phi: ScalarField, n: int = 192) -> float:
    """Plane energy of a free-standing field (no attached curve).

    Gaussian bump sums use the exact closed form; anything else is integrated
    over a box covering the support (the constant tail contributes nothing).
    """
    if phi.kind == "constant":
        return 0.0
    if phi.kind == "gaussian_bumps":
        return gaussian_plane_energy(phi.data["bumps"])
    radius = max(phi.support_radius, 1.0)
    return plane_integral(lambda z: np.abs(phi.grad(z)) ** 2, radius, n)


def plane_energy_by_sides(two_sided: TwoSidedField) -> float:
    return side_energy(two_sided.plus) + side_energy(two_sided.minus)


def plane_energy_cartesian(fld, radius: float, n: int = 128) -> float:
    """Box quadrature of |grad|^2 / pi for any field with a .grad(z) evaluator."""
    return plane_integral(lambda z: np.abs(fld.grad(z)) ** 2, radius, n)


def dirichlet_energy(obj, region: str = "auto", pair: ConformalPair | None = None,
                     **kw) -> float:
    """Dirichlet energy dispatcher.

    DiskSeriesField -> exact spectral value; SideField -> side quadrature;
    TwoSidedField -> sum of sides; ScalarField on the plane -> closed form or
    box quadrature; ComplexField -> sum over real and imaginary parts.
    """
    if isinstance(obj, ComplexField):
        return dirichlet_energy(obj.re, region, pair, **kw) + dirichlet_energy(obj.im, region, pair, **kw)
    if isinstance(obj, DiskSeriesField):
        if region == "quadrature":
            return disk_integral(lambda w: np.abs(obj.grad(w)) ** 2, **kw)
        return obj.energy()
    if isinstance(obj, SideField):
        return side_energy(obj, **kw)
    if isinstance(obj, TwoSidedField):
        return plane_energy_by_sides(obj)
    if isinstance(obj, ScalarField):
        if region in ("auto", "plane"):
            if pair is not None:
                plus = SideField(pair.plus, [], obj)
                minus = SideField(pair.minus, [], obj)
                return side_energy(plus) + side_energy(minus)
            if obj.c_inf is None:
                raise EnergyError("plane energy needs a value-at-infinity annotation")
            return plane_field_energy(obj, **kw)
        if region in ("plus", "minus", "interior", "exterior") and pair is not None:
            sm = pair.side(region if region in ("plus", "minus") else
                           ("plus" if region == "interior" else "minus"))
            return side_energy(SideField(sm, [], obj))
    raise EnergyError(f"cannot integrate object of type {type(obj).__name__} over {region}")


# ---------------------------------------------------------------------------
# H^{1/2} seminorms
# ---------------------------------------------------------------------------

def h12_seminorm(bf: BoundaryFunction, method: str = "auto", n: int = 1024) -> float:
    """Squared H^{1/2} seminorm of sampled boundary data.

    method "fourier" uses the spectral identity on the circle (line data is
    transported to the circle first, which preserves the seminorm); method
    "double" integrates |u(z)-u(w)|^2 / |z-w|^2 directly with the difference
    quotient rule on the diagonal.
    """
    if method == "auto":
        method = "fourier" if bf.carrier in ("circle", "line") else "double"
    if method == "fourier":
        if bf.carrier == "circle":
            theta = circle_grid(n)
            return h12_circle_fourier(bf(theta))
        if bf.carrier == "line":
            theta = circle_grid(n)
            x = -1.0 / np.tan(np.maximum(theta, 1e-12) / 2.0)
            x[0] = -1e14
            return h12_circle_fourier(bf(x))
        raise EnergyError("fourier path needs a circle or line carrier")
    if bf.carrier == "circle":
        theta = circle_grid(min(n, 2048))
        z = np.exp(1j * theta)
        return _h12_double(z, bf(theta), weights=np.full(theta.size, TWO_PI / theta.size),
                           closed=True)
    if bf.carrier == "line":
        x = np.linspace(-40.0, 40.0, min(n, 2048))
        vals = bf(x)
        w = np.full(x.size, x[1] - x[0])
        base = _h12_double(x.astype(complex), vals, w, closed=False)
        return base + _line_tail_correction(x, vals, bf)
    # curve carrier: nodes are curve parameters
    curve = bf.curve
    t = bf.nodes
    pts = curve.point(t)
    seg = np.gradient(_arclength_of(curve, t))
    base = _h12_double(pts, bf.values, seg, closed=curve.is_loop)
    if curve.is_through_infinity and bf.tail_values is not None:
        base += _curve_tail_correction(pts, bf.values, seg, bf.tail_values)
    return base


def _h12_double(z: np.ndarray, u: np.ndarray, weights: np.ndarray, closed: bool) -> float:
    """(1/2pi^2) * double integral of |u(z)-u(w)|^2/|z-w|^2 with diagonal rule."""
    dz = np.abs(z[:, None] - z[None, :])
    du = u[:, None] - u[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = (du / dz) ** 2
    # diagonal rule: difference quotient along the carrier
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(z)))])
    if closed:
        up = np.roll(u, -1)
        um = np.roll(u, 1)
        ds = np.roll(s, -1) - np.roll(s, 1)
        ds[-1] = (s[-1] - s[-2]) + np.abs(z[0] - z[-1])
        ds[0] = np.abs(z[0] - z[-1]) + (s[1] - s[0])
        slope = (up - um) / ds
    else:
        slope = np.gradient(u, s)
    near = dz < 0.5 * (weights[:, None] + weights[None, :])
    integrand = np.where(near, slope[:, None] ** 2 * 0.5 + slope[None, :] ** 2 * 0.5, integrand)
    w2 = weights[:, None] * weights[None, :]
    return float(np.sum(integrand * w2) / (2.0 * np.pi ** 2))


def _line_tail_correction(x: np.ndarray, vals: np.ndarray, bf: BoundaryFunction) -> float:
    """Contribution of the constant tails beyond the truncation window.

    With equal tail values the cross-tail part vanishes; for each interior point
    the x-integral over a tail is exact: int_X^inf dx/(x-y)^2 = 1/(X-y).
    """
    lo, hi = x[0], x[-1]
    v_lo, v_hi = vals[0], vals[-1]
    if abs(v_lo - v_hi) > 1e-8 * max(1.0, abs(v_lo), abs(v_hi)):
        raise EnergyError("tail values differ: seminorm diverges on the line")
    dx = x[1] - x[0]
    right = np.sum((vals - v_hi) ** 2 / (hi + dx - x)) * dx
    left = np.sum((vals - v_lo) ** 2 / (x - (lo - dx))) * dx
    return float(2.0 * (right + left) / (2.0 * np.pi ** 2))


def _curve_tail_correction(pts, vals, seg, tails) -> float:
    # straight tails with constant data: the outer integral is exact, 1/distance
    v_lo, v_hi = tails
    d_hi = np.abs(pts[-1] - pts)
    d_lo = np.abs(pts[0] - pts)
    right = np.sum((vals - v_hi) ** 2 / (d_hi + seg[-1]) * seg)
    left = np.sum((vals - v_lo) ** 2 / (d_lo + seg[0]) * seg)
    return float(2.0 * (right + left) / (2.0 * np.pi ** 2))


def _arclength_of(curve, t):
    from scipy.interpolate import CubicSpline
    spl = CubicSpline(curve.params, curve.arclength)
    return spl(np.clip(t, curve.params[0], curve.params[-1]))


# ---------------------------------------------------------------------------
# Poisson extension
# ---------------------------------------------------------------------------

def poisson_extend(bf: BoundaryFunction, pair: ConformalPair | None = None,
                   side: str = "interior"):
    """Harmonic extension of boundary data.

    Without a pair the carrier must be the unit circle and the result is a
    DiskSeriesField.  With a pair the data is transported to the reference
    boundary through the boundary correspondence and extended there; side
    "both" returns a TwoSidedField on the plane.
    """
    if pair is None:
        if bf.carrier != "circle":
            raise EnergyError("reference extension needs circle data")
        theta = circle_grid(1024)
        coeffs = analytic_coeffs_from_real_part(bf(theta))
        return DiskSeriesField(coeffs, part="re")
    if side == "both":
        plus = _extend_one_side(bf, pair.plus)
        minus = _extend_one_side(bf, pair.minus)
        return TwoSidedField(pair.curve, pair, plus, minus)
    which = "plus" if side in ("interior", "plus", "upper") else "minus"
    return _extend_one_side(bf, pair.side(which))


def _extend_one_side(bf: BoundaryFunction, sm: SideMap) -> SideField:
    theta = sm.theta
    if bf.carrier == "curve":
        data = bf(sm.boundary_params)
    elif bf.carrier == "circle" and sm.pair.geometry == "disk":
        data = bf(theta)
    elif bf.carrier == "line" and sm.pair.geometry == "halfplane":
        x = np.real(sm.ref_from_disk(np.exp(1j * theta) if sm.side == "plus"
                                     else np.exp(-1j * theta)))
        x = np.where(np.isfinite(x), x, 1e14)
        data = bf(x)
    else:
        raise EnergyError(f"carrier {bf.carrier} incompatible with pair geometry")
    if sm.side == "plus":
        coeffs = analytic_coeffs_from_real_part(data)
    else:
        # data are indexed by the reference boundary angle; the disk coordinate
        # angle runs opposite for the exterior side
        grid = circle_grid(theta.size)
        from .fourier import resample_periodic
        data_disk = resample_periodic(np.sort(np.mod(-theta, TWO_PI)),
                                      data[np.argsort(np.mod(-theta, TWO_PI))], grid)
        coeffs = analytic_coeffs_from_real_part(data_disk)
    return SideField(sm, [DiskSeriesField(coeffs, part="re")], None, 0.0)


def harmonic_conjugate(fld):
    """Conjugate harmonic field with equal Dirichlet energy.

    Spectral fields conjugate exactly; composite fields are rejected after a
    finite-difference Laplacian probe confirms they are not harmonic.
    """
    if isinstance(fld, DiskSeriesField):
        return fld.conjugate()
    if isinstance(fld, SideField) and fld.plane_field is None and len(fld.disk_terms) == 1:
        return SideField(fld.sidemap, [fld.disk_terms[0].conjugate()], None, 0.0)
    res = laplacian_residual(fld)
    raise EnergyError(f"input is not harmonic (Laplacian residual {res:.2e})")


def laplacian_residual(fld, n_probe: int = 24, h: float = 1e-3) -> float:
    """Max |FD Laplacian| over an interior probe grid (disk-coordinate fields)."""
    rng_r = np.linspace(0.15, 0.7, 4)
    th = circle_grid(n_probe // 4 + 1)[: n_probe // 4]
    w = (rng_r[:, None] * np.exp(1j * th)[None, :]).ravel()
    val = fld.disk_value if isinstance(fld, SideField) else fld.value
    lap = (val(w + h) + val(w - h) + val(w + 1j * h) + val(w - 1j * h) - 4.0 * val(w)) / h ** 2
    return float(np.max(np.abs(lap)))


# ---------------------------------------------------------------------------
# Traces by shrinking disk averages
# ---------------------------------------------------------------------------

def trace(fld, curve, side: str = "both", params: np.ndarray | None = None,
          r0: float | None = None, levels: int = 6, spread_tol: float = 1e-3,
          n_radial: int = 12, n_angular: int = 48) -> BoundaryFunction:
    """Boundary values by Richardson-extrapolated shrinking disk averages.

    side "both" averages over full disks; one-sided traces average over the
    part of each disk on that side of the curve.  Nodes whose extrapolation
    spread exceeds spread_tol are flagged and excluded downstream.
    """
    if params is None:
        params = _default_trace_params(curve)
    pts = curve.point(params)
    scale = min(curve.diameter(), 8.0)
    r_top = (0.05 * scale) if r0 is None else r0
    radii = r_top * 0.5 ** np.arange(levels + 1)

    value = fld.value if hasattr(fld, "value") else fld.plane_value
    out = np.empty(params.size)
    flags = np.ones(params.size, dtype=bool)
    for i, z0 in enumerate(pts):
        if side == "both":
            mask = None
        else:
            want = 1 if side in ("interior", "plus", "upper") else -1
            mask = (lambda q, w=want: curve.side_of(q) == w)
        means = [disk_average(value, z0, r, n_radial, n_angular, side_mask=mask)
                 for r in radii]
        est, spread = _richardson_trace(radii, means, first_order=(side != "both"))
        out[i] = est
        flags[i] = spread < spread_tol * max(1.0, abs(est))
    tails = None
    if curve.is_through_infinity:
        tails = (float(out[0]), float(out[-1]))
    return BoundaryFunction(carrier="curve", nodes=np.asarray(params, dtype=float),
                            values=out, curve=curve, tail_values=tails, flags=flags)


def _default_trace_params(curve, n: int = 32):
    if curve.is_loop:
        return circle_grid(n)
    lo, hi = curve.params[0], curve.params[-1]
    span = min(hi - lo, 24.0)
    mid = 0.0 if lo < 0 < hi else 0.5 * (lo + hi)
    return np.linspace(mid - span / 2.0, mid + span / 2.0, n)


def _richardson_trace(radii, means, first_order: bool):
    vals = np.array(means, dtype=float)
    ok = np.isfinite(vals)
    h = np.array(radii, dtype=float)[ok]
    vals = vals[ok]
    if vals.size < 3:
        return (vals[-1] if vals.size else np.nan), np.inf
    # expansion in powers of r starting at r^1 (one-sided) or r^2 (full disks)
    t = vals.copy()
    powers = np.arange(1, vals.size) if first_order else np.arange(2, 2 * vals.size, 2)
    for level, p in enumerate(powers, start=1):
        if level >= vals.size:
            break
        ratio = 2.0 ** p
        t = (ratio * t[1:] - t[:-1]) / (ratio - 1.0)
    spread = abs(t[-1] - t[0]) if t.size > 1 else 0.0
    return float(t[-1]), float(spread)


# ---------------------------------------------------------------------------
# Orthogonal decomposition and the curvature action
# ---------------------------------------------------------------------------

def decompose(fld: ScalarField, pair: ConformalPair, side: str = "interior"):
    """Split a field on one curve side into zero-trace and harmonic parts."""
    sm = pair.side("plus" if side in ("interior", "plus", "upper") else "minus")
    bf = trace(fld, pair.curve, side=side)
    if not np.all(bf.flags):
        bf = BoundaryFunction("curve", *bf.good_nodes(), curve=pair.curve,
                              tail_values=bf.tail_values)
    harmonic = _extend_one_side(bf, sm)
    zero_part = SideField(sm, [harmonic.disk_terms[0].scaled(-1.0)], fld, 0.0)
    return zero_part, harmonic


def curvature_action(fld: SideField) -> float:
    """Dirichlet energy plus the signed boundary term (2/pi) * contour integral.

    The geodesic curvature of the reference boundary is +1 seen from the disk
    and -1 seen from its exterior.
    """
    pair = fld.sidemap.pair
    if pair.geometry != "disk":
        raise EnergyError("curvature action is defined for disk-geometry sides")
    sign = 1.0 if fld.sidemap.side == "plus" else -1.0
    theta = circle_grid(512)
    boundary = fld.boundary_values(theta)
    contour = np.mean(boundary) * TWO_PI
    return side_energy(fld) + (2.0 / np.pi) * sign * contour

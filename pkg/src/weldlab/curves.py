"""Jordan curves: construction, Moebius transforms, arclength, winding.

Orientation convention: a bounded loop runs counterclockwise around its bounded
component; a curve through infinity keeps its "upper" component on the left of
the direction of travel.  Both components are referred to as the plus side
(bounded / upper) and the minus side everywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

DEFAULT_ESCAPE_RADIUS = 50.0
DEFAULT_SAMPLES = 512


class CurveError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Moebius transforms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MobiusTransform:
    """z -> (a z + b) / (c z + d), nondegenerate."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        if abs(self.det) < 1e-14 * max(1.0, abs(self.a) + abs(self.b) + abs(self.c) + abs(self.d)) ** 2:
            raise CurveError("degenerate Moebius transform (ad - bc ~ 0)")

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @classmethod
    def identity(cls) -> "MobiusTransform":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def cayley(cls) -> "MobiusTransform":
        """Upper half-plane -> unit disk, z -> (z - i)/(z + i); infinity -> 1."""
        return cls(1.0, -1j, 1.0, 1j)

    @classmethod
    def inversion_about(cls, pole: complex) -> "MobiusTransform":
        """z -> 1 / (z - pole); sends pole to infinity and infinity to 0."""
        return cls(0.0, 1.0, 1.0, -pole)

    @classmethod
    def affine(cls, scale: complex, shift: complex) -> "MobiusTransform":
        return cls(scale, shift, 0.0, 1.0)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        num = self.a * z + self.b
        den = self.c * z + self.d
        with np.errstate(divide="ignore", invalid="ignore"):
            out = num / den
        if np.isscalar(z) or z.ndim == 0:
            if np.isinf(z):
                return self.at_infinity()
            return complex(out)
        inf_mask = np.isinf(z.real) | np.isinf(z.imag)
        if np.any(inf_mask):
            out = np.where(inf_mask, self.at_infinity(), out)
        return out

    def at_infinity(self) -> complex:
        if self.c == 0:
            return complex(np.inf, np.inf)
        return self.a / self.c

    def pole(self) -> complex:
        if self.c == 0:
            return complex(np.inf, np.inf)
        return -self.d / self.c

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        den = self.c * z + self.d
        return self.det / den ** 2

    def inverse(self) -> "MobiusTransform":
        return MobiusTransform(self.d, -self.b, -self.c, self.a)

    def compose(self, other: "MobiusTransform") -> "MobiusTransform":
        """self after other: (self.compose(other))(z) = self(other(z))."""
        return MobiusTransform(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )


# ---------------------------------------------------------------------------
# Gaussian bump profile used by graph curves (and scalar fields)
# ---------------------------------------------------------------------------

def bump_sum(x, bumps):
    """sum_k a_k exp(-(x-c_k)^2 / (2 sigma_k^2)) for real x."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for amp, center, sigma in bumps:
        out = out + amp * np.exp(-((x - center) ** 2) / (2.0 * sigma ** 2))
    return out


def bump_sum_deriv(x, bumps):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for amp, center, sigma in bumps:
        out = out - amp * (x - center) / sigma ** 2 * np.exp(-((x - center) ** 2) / (2.0 * sigma ** 2))
    return out


# ---------------------------------------------------------------------------
# JordanCurve
# ---------------------------------------------------------------------------

@dataclass
class JordanCurve:
    """Sampled oriented Jordan curve with optional closed form.

    kind: "bounded-loop" (params over [0, 2pi), periodic), "through-infinity"
    (params over an open real interval, straight tails beyond the last nodes),
    or "chord" (Loewner traces; relaxed invariants).
    """

    kind: str
    params: np.ndarray
    samples: np.ndarray
    closed_form: str | None = None
    form_data: dict = field(default_factory=dict)
    arclength: np.ndarray | None = None
    tangents: np.ndarray | None = None
    escape_radius: float = DEFAULT_ESCAPE_RADIUS
    mobius_hint: MobiusTransform | None = None
    checked_simple: bool = False

    # -- basic queries ------------------------------------------------------

    @property
    def is_loop(self) -> bool:
        return self.kind == "bounded-loop"

    @property
    def is_through_infinity(self) -> bool:
        return self.kind == "through-infinity"

    def diameter(self) -> float:
        pts = self.samples
        lo = complex(np.min(pts.real), np.min(pts.imag))
        hi = complex(np.max(pts.real), np.max(pts.imag))
        return abs(hi - lo)

    def centroid(self) -> complex:
        """Area centroid of the sample polygon (bounded loops)."""
        z = self.samples
        zn = np.roll(z, -1)
        cross = z.real * zn.imag - zn.real * z.imag
        area = 0.5 * np.sum(cross)
        if abs(area) < 1e-14:
            return complex(np.mean(z))
        cx = np.sum((z.real + zn.real) * cross) / (6.0 * area)
        cy = np.sum((z.imag + zn.imag) * cross) / (6.0 * area)
        return complex(cx, cy)

    # -- evaluation ---------------------------------------------------------

    def point(self, t):
        """Curve point at parameter t (closed form when available, else spline)."""
        t = np.asarray(t, dtype=float)
        cf = self.closed_form
        d = self.form_data
        if cf == "circle":
            return d["center"] + d["radius"] * np.exp(1j * t)
        if cf == "ellipse":
            return d["center"] + d["a"] * np.cos(t) + 1j * d["b"] * np.sin(t)
        if cf == "fourier_loop":
            out = np.zeros(t.shape, dtype=complex)
            for n, c in d["coeffs"].items():
                out = out + c * np.exp(1j * n * t)
            return out
        if cf == "graph":
            return t + 1j * bump_sum(t, d["bumps"])
        if cf == "mobius_of":
            return d["m"](d["base"].point(t))
        if cf == "halfplane_equipotential":
            return d["map_fn"](t)
        return self._spline_point(t)

    def velocity(self, t):
        """d(point)/d(param); closed form when available."""
        t = np.asarray(t, dtype=float)
        cf = self.closed_form
        d = self.form_data
        if cf == "circle":
            return 1j * d["radius"] * np.exp(1j * t)
        if cf == "ellipse":
            return -d["a"] * np.sin(t) + 1j * d["b"] * np.cos(t)
        if cf == "fourier_loop":
            out = np.zeros(t.shape, dtype=complex)
            for n, c in d["coeffs"].items():
                out = out + 1j * n * c * np.exp(1j * n * t)
            return out
        if cf == "graph":
            return np.ones_like(t) + 1j * bump_sum_deriv(t, d["bumps"])
        if cf == "mobius_of":
            base = d["base"]
            return d["m"].derivative(base.point(t)) * base.velocity(t)
        if cf == "halfplane_equipotential":
            h = 1e-6
            return (d["map_fn"](t + h) - d["map_fn"](t - h)) / (2.0 * h)
        return self._spline_velocity(t)

    def _spline(self):
        if not hasattr(self, "_spline_cache"):
            from scipy.interpolate import CubicSpline
            t = self.params
            z = self.samples
            if self.is_loop:
                t_ext = np.concatenate([t, [t[0] + 2.0 * np.pi]])
                z_ext = np.concatenate([z, [z[0]]])
                sx = CubicSpline(t_ext, z_ext.real, bc_type="periodic")
                sy = CubicSpline(t_ext, z_ext.imag, bc_type="periodic")
            else:
                sx = CubicSpline(t, z.real)
                sy = CubicSpline(t, z.imag)
            self._spline_cache = (sx, sy)
        return self._spline_cache

    def _spline_point(self, t):
        sx, sy = self._spline()
        tt = np.mod(t - self.params[0], 2.0 * np.pi) + self.params[0] if self.is_loop else t
        return sx(tt) + 1j * sy(tt)

    def _spline_velocity(self, t):
        sx, sy = self._spline()
        tt = np.mod(t - self.params[0], 2.0 * np.pi) + self.params[0] if self.is_loop else t
        return sx(tt, 1) + 1j * sy(tt, 1)

    def unit_tangents(self) -> np.ndarray:
        """Unit tangents at the nodes; stored values win over finite differences."""
        if self.tangents is not None:
            return self.tangents
        if self.closed_form is not None:
            v = self.velocity(self.params)
            return v / np.abs(v)
        return _finite_difference_tangents(self.params, self.samples, self.is_loop)

    # -- tails (through-infinity) -------------------------------------------

    def tail_rays(self):
        """((anchor, unit direction) at param start going out, same at param end).

        The start ray points away from the curve (towards t -> -infinity).
        """
        if not self.is_through_infinity:
            raise CurveError("tails only defined for curves through infinity")
        z = self.samples
        d_start = z[0] - z[1]
        d_end = z[-1] - z[-2]
        return ((z[0], d_start / abs(d_start)), (z[-1], d_end / abs(d_end)))

    # -- side classification --------------------------------------------------

    def side_of(self, z) -> np.ndarray:
        """+1 on the plus side (bounded interior / upper), -1 on the other side.

        Points within ~1e-12 of the curve get an arbitrary sign.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.closed_form == "graph":
            return np.where(z.imag > bump_sum(z.real, self.form_data["bumps"]), 1, -1)
        if self.closed_form == "mobius_of":
            d = self.form_data
            return d["base"].side_of(d["m"].inverse()(z))
        if self.closed_form == "circle":
            d = self.form_data
            return np.where(np.abs(z - d["center"]) < d["radius"], 1, -1)
        if self.closed_form == "ellipse":
            d = self.form_data
            w = z - d["center"]
            return np.where((w.real / d["a"]) ** 2 + (w.imag / d["b"]) ** 2 < 1.0, 1, -1)
        if self.is_loop:
            wind = _winding_number(self.samples, z)
            return np.where(np.abs(wind) > 0.5, 1, -1)
        return self._side_of_open(z)

    def _side_of_open(self, z: np.ndarray) -> np.ndarray:
        # Crossing parity of an upward vertical ray against polyline + straight tails.
        pts = self.samples
        (a0, d0), (a1, d1) = self.tail_rays()
        far = 1e7
        ext = np.concatenate([[a0 + far * d0], pts, [a1 + far * d1]])
        crossings = _ray_crossings(ext, z)
        # A point far above the extended polyline has zero crossings and lies on
        # the upper side when the travel direction is globally left-to-right.
        leftward = (pts[-1].real - pts[0].real) < 0
        upper = (crossings % 2 == 0)
        if leftward:
            upper = ~upper
        return np.where(upper, 1, -1)

    # -- misc ----------------------------------------------------------------

    def resampled(self, n: int) -> "JordanCurve":
        """Same curve re-evaluated on n parameter nodes (closed forms stay exact)."""
        if self.is_loop:
            t = 2.0 * np.pi * np.arange(n) / n
        else:
            t = np.linspace(self.params[0], self.params[-1], n)
        pts = self.point(t)
        return build_curve_from_nodes(self.kind, t, pts, self.closed_form, self.form_data,
                                      escape_radius=self.escape_radius,
                                      mobius_hint=self.mobius_hint)

    def to_ndjson(self) -> str:
        import json
        lines = [json.dumps({"t": float(t), "x": float(p.real), "y": float(p.imag)})
                 for t, p in zip(self.params, self.samples)]
        return "\n".join(lines) + "\n"


def _finite_difference_tangents(t: np.ndarray, z: np.ndarray, periodic: bool) -> np.ndarray:
    if periodic:
        zp = np.roll(z, -1)
        zm = np.roll(z, 1)
        v = zp - zm
    else:
        v = np.empty_like(z)
        v[1:-1] = z[2:] - z[:-2]
        v[0] = z[1] - z[0]
        v[-1] = z[-1] - z[-2]
    return v / np.abs(v)


def _winding_number(loop: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Winding number of the closed polyline around each query point."""
    out = np.zeros(z.shape)
    chunk = 2048
    zn = np.roll(loop, -1)
    for i in range(0, z.size, chunk):
        q = z[i:i + chunk]
        a = loop[None, :] - q[:, None]
        b = zn[None, :] - q[:, None]
        ang = np.angle(b / a)
        out[i:i + chunk] = np.sum(ang, axis=1) / (2.0 * np.pi)
    return out


def _ray_crossings(poly: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Number of segments of poly crossed by the upward ray from each query point."""
    x1, y1 = poly[:-1].real, poly[:-1].imag
    x2, y2 = poly[1:].real, poly[1:].imag
    out = np.zeros(z.shape, dtype=int)
    chunk = 2048
    for i in range(0, z.size, chunk):
        q = z[i:i + chunk]
        qx, qy = q.real[:, None], q.imag[:, None]
        straddle = (x1[None, :] <= qx) != (x2[None, :] <= qx)
        with np.errstate(divide="ignore", invalid="ignore"):
            y_at = y1[None, :] + (qx - x1[None, :]) * (y2 - y1)[None, :] / (x2 - x1)[None, :]
        hits = straddle & (y_at > qy)
        out[i:i + chunk] = np.sum(hits, axis=1)
    return out


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def build_curve(spec: dict) -> JordanCurve:
    """Build a curve from a specification dict.

    Supported kinds: circle, ellipse, fourier_loop, graph, samples.  A graph
    spec means x + i*s(x) with s a finite sum of Gaussian bumps, producing a
    curve through infinity.
    """
    if not spec or "kind" not in spec:
        raise CurveError("empty or kind-less curve specification")
    kind = spec["kind"]
    params = spec.get("params", {})
    n = int(spec.get("samples_n", DEFAULT_SAMPLES))
    escape = float(spec.get("escape_radius", DEFAULT_ESCAPE_RADIUS))

    if kind == "circle":
        center = _as_complex(params.get("center", 0.0))
        radius = float(params.get("radius", 1.0))
        if radius <= 0:
            raise CurveError("circle radius must be positive")
        t = 2.0 * np.pi * np.arange(n) / n
        form = {"center": center, "radius": radius}
        return build_curve_from_nodes("bounded-loop", t, center + radius * np.exp(1j * t),
                                      "circle", form, escape_radius=escape)

    if kind == "ellipse":
        center = _as_complex(params.get("center", 0.0))
        a = float(params.get("a", 1.0))
        b = float(params.get("b", 1.0))
        if a <= 0 or b <= 0:
            raise CurveError("ellipse semi-axes must be positive")
        t = 2.0 * np.pi * np.arange(n) / n
        form = {"center": center, "a": a, "b": b}
        return build_curve_from_nodes("bounded-loop", t,
                                      center + a * np.cos(t) + 1j * b * np.sin(t),
                                      "ellipse", form, escape_radius=escape)

    if kind == "fourier_loop":
        coeffs = {int(k): _as_complex(v) for k, v in params["coeffs"].items()}
        t = 2.0 * np.pi * np.arange(n) / n
        pts = np.zeros(n, dtype=complex)
        for m, c in coeffs.items():
            pts = pts + c * np.exp(1j * m * t)
        return build_curve_from_nodes("bounded-loop", t, pts, "fourier_loop",
                                      {"coeffs": coeffs}, escape_radius=escape)

    if kind == "graph":
        bumps = [(float(b["a"]), float(b["center"]), float(b["sigma"]))
                 for b in params.get("bumps", [])]
        span = float(params.get("span", 1.02 * escape))
        t = np.linspace(-span, span, n)
        pts = t + 1j * bump_sum(t, bumps)
        return build_curve_from_nodes("through-infinity", t, pts, "graph",
                                      {"bumps": bumps}, escape_radius=escape)

    if kind == "samples":
        t = np.asarray(params["t"], dtype=float)
        pts = np.asarray([_as_complex(p) for p in params["points"]], dtype=complex)
        k = params.get("curve_kind", "bounded-loop")
        return build_curve_from_nodes(k, t, pts, None, {}, escape_radius=escape)

    raise CurveError(f"unsupported curve kind {kind!r}")


def build_curve_from_nodes(kind: str, params: np.ndarray, samples: np.ndarray,
                           closed_form: str | None = None, form_data: dict | None = None,
                           escape_radius: float = DEFAULT_ESCAPE_RADIUS,
                           tangents: np.ndarray | None = None,
                           mobius_hint: MobiusTransform | None = None,
                           check_simple: bool = True) -> JordanCurve:
    params = np.asarray(params, dtype=float)
    samples = np.asarray(samples, dtype=complex)
    if params.size != samples.size:
        raise CurveError("parameter and sample counts differ")
    if np.any(np.diff(params) <= 0):
        raise CurveError("parameter nodes must be strictly increasing")
    if kind == "through-infinity":
        if abs(samples[0]) < escape_radius or abs(samples[-1]) < escape_radius:
            raise CurveError("through-infinity curve must reach the escape radius at both ends")
    curve = JordanCurve(kind=kind, params=params, samples=samples,
                        closed_form=closed_form, form_data=form_data or {},
                        escape_radius=escape_radius, tangents=tangents,
                        mobius_hint=mobius_hint)
    if kind == "bounded-loop":
        # enforce counterclockwise orientation around the bounded component
        zn = np.roll(samples, -1)
        area = 0.5 * np.sum(samples.real * zn.imag - zn.real * samples.imag)
        if area < 0:
            curve = _reverse_loop(curve)
    if check_simple and kind != "chord":
        ensure_simple(curve)
        curve.checked_simple = True
    curve.arclength = _arclength_nodes(curve)
    return curve


def _reverse_loop(curve: JordanCurve) -> JordanCurve:
    rev = curve.samples[::-1].copy()
    rev = np.roll(rev, 1)  # keep samples[0] first
    tang = None if curve.tangents is None else -np.roll(curve.tangents[::-1], 1)
    cf, fd = curve.closed_form, dict(curve.form_data)
    if cf == "ellipse" or cf == "circle":
        # closed-form evaluators assume the standard orientation; a reversed
        # build indicates an inconsistent spec
        raise CurveError("closed-form loop specified with clockwise orientation")
    if cf == "fourier_loop":
        fd = {"coeffs": {-n: c for n, c in fd["coeffs"].items()}}
    return JordanCurve(kind=curve.kind, params=curve.params, samples=rev,
                       closed_form=cf, form_data=fd, escape_radius=curve.escape_radius,
                       tangents=tang, mobius_hint=curve.mobius_hint)


def _arclength_nodes(curve: JordanCurve) -> np.ndarray:
    """Cumulative arclength at the parameter nodes.

    Closed-form curves refine each panel with Gauss-Legendre on |velocity| so the
    values are stable under node doubling; sampled curves use chord lengths.
    """
    t = curve.params
    z = curve.samples
    if curve.closed_form is not None:
        gx, gw = np.polynomial.legendre.leggauss(6)
        if curve.is_loop:
            t_ext = np.concatenate([t, [t[0] + 2.0 * np.pi]])
        else:
            t_ext = t
        mid = 0.5 * (t_ext[1:] + t_ext[:-1])
        half = 0.5 * np.diff(t_ext)
        nodes = mid[:, None] + half[:, None] * gx[None, :]
        speed = np.abs(curve.velocity(nodes.ravel())).reshape(nodes.shape)
        panel = np.sum(speed * gw[None, :], axis=1) * half
        s = np.concatenate([[0.0], np.cumsum(panel)])
        return s[: t.size] if curve.is_loop else s
    if curve.tangents is not None and curve.is_through_infinity:
        # flow lines are arclength parametrized already
        pass
    chords = np.abs(np.diff(z))
    return np.concatenate([[0.0], np.cumsum(chords)])


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v)
    return complex(v)


# ---------------------------------------------------------------------------
# Simplicity check (spatial hash over segments)
# ---------------------------------------------------------------------------

def ensure_simple(curve: JordanCurve, tol_factor: float = 1e-9) -> None:
    """Raise CurveError if the sample polyline self-intersects.

    Segments are bucketed on a uniform grid keyed by segment bounding boxes, so
    only nearby pairs are tested; adjacent segments are exempt.
    """
    z = curve.samples
    n = z.size
    if n < 4:
        raise CurveError("too few samples")
    tol = tol_factor * curve.diameter()
    if np.min(np.abs(np.diff(z))) <= tol:
        raise CurveError("repeated curve samples")
    closed = curve.is_loop
    a = z
    b = np.roll(z, -1) if closed else z[1:]
    if not closed:
        a = z[:-1]
    nseg = a.size
    cell = max(np.max(np.abs(b - a)), tol)
    buckets: dict[tuple[int, int], list[int]] = {}
    ax = np.minimum(a.real, b.real) // cell
    ay = np.minimum(a.imag, b.imag) // cell
    for i in range(nseg):
        buckets.setdefault((int(ax[i]), int(ay[i])), []).append(i)
    for i in range(nseg):
        cx, cy = int(ax[i]), int(ay[i])
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for j in buckets.get((cx + dx, cy + dy), ()):
                    if j <= i:
                        continue
                    if _adjacent(i, j, nseg, closed):
                        continue
                    if _segments_intersect(a[i], b[i], a[j], b[j], tol):
                        raise CurveError(f"curve self-intersects near segments {i} and {j}")


def _adjacent(i: int, j: int, nseg: int, closed: bool) -> bool:
    if abs(i - j) <= 1:
        return True
    return closed and abs(i - j) == nseg - 1


def _segments_intersect(p1, p2, q1, q2, tol) -> bool:
    d1 = p2 - p1
    d2 = q2 - q1
    denom = d1.real * d2.imag - d1.imag * d2.real
    rx, ry = (q1 - p1).real, (q1 - p1).imag
    if abs(denom) < 1e-30:
        return False
    t = (rx * d2.imag - ry * d2.real) / denom
    u = (rx * d1.imag - ry * d1.real) / denom
    return (0.0 < t < 1.0) and (0.0 < u < 1.0)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def apply_mobius(curve: JordanCurve, m: MobiusTransform) -> JordanCurve:
    """Pointwise Moebius image of a curve, with kind and orientation tracked."""
    z = curve.samples
    den = m.c * z + m.d
    scale = np.max(np.abs(z))
    pole_mask = np.abs(den) < 1e-12 * max(1.0, abs(m.c) * scale + abs(m.d))

    hint = None
    if curve.is_loop:
        hint = m.inverse()
    elif curve.mobius_hint is not None:
        hint = curve.mobius_hint.compose(m.inverse())

    if curve.is_loop and np.any(pole_mask):
        # a curve point is sent to infinity: output passes through infinity
        k = int(np.argmax(pole_mask))
        t_pole = curve.params[k]
        t_new = np.concatenate([curve.params[k + 1:], curve.params[:k] + 2.0 * np.pi])
        pts = m(curve.point(t_new))
        if np.min(np.abs(pts[[0, -1]])) < curve.escape_radius:
            raise CurveError("image escapes too slowly; refine samples near the pole")
        form = {"base": curve, "m": m, "t_range": (t_pole, t_pole + 2.0 * np.pi)}
        return build_curve_from_nodes("through-infinity", t_new, pts,
                                      closed_form="mobius_of", form_data=form,
                                      escape_radius=curve.escape_radius, mobius_hint=hint,
                                      check_simple=False)

    if np.any(pole_mask):
        raise CurveError("Moebius pole lies on the curve away from a node")

    if curve.is_through_infinity and m.c != 0:
        # infinity maps to a finite point: output is a bounded loop
        z_inf = m.at_infinity()
        pts = np.concatenate([[z_inf], m(z)])
        t = 2.0 * np.pi * np.arange(pts.size) / pts.size
        return build_curve_from_nodes("bounded-loop", t, pts,
                                      escape_radius=curve.escape_radius, mobius_hint=hint,
                                      check_simple=False)

    pts = m(z)
    if np.min(np.abs(pts[[0, -1]])) < curve.escape_radius and curve.is_through_infinity:
        raise CurveError("Moebius image no longer reaches the escape radius")
    return build_curve_from_nodes(curve.kind, curve.params, pts,
                                  escape_radius=curve.escape_radius, mobius_hint=hint,
                                  check_simple=False)


def winding(curve: JordanCurve):
    """Continuous branch of arg(tangent) against arclength for a curve through infinity.

    Returns a BoundaryFunction on the curve carrier.  Raises if adjacent nodes
    jump by more than pi (resolution too coarse to unwrap).
    """
    from .fields import BoundaryFunction

    if not curve.is_through_infinity:
        raise CurveError("winding is defined for curves through infinity")
    tang = curve.unit_tangents()
    raw = np.angle(tang)
    tau = np.unwrap(raw)
    if np.any(np.abs(np.diff(tau)) > np.pi):
        raise CurveError("winding unwrap failed: tangent turns faster than the sampling")
    if curve.closed_form == "graph":
        tau = np.arctan(bump_sum_deriv(curve.params, curve.form_data["bumps"]))
    s = curve.arclength if curve.arclength is not None else _arclength_nodes(curve)
    return BoundaryFunction(carrier="curve", nodes=s.copy(), values=tau, curve=curve,
                            tail_values=(float(tau[0]), float(tau[-1])))


def loop_turning(curve: JordanCurve) -> float:
    """Total turning of a loop's tangent over one period (diagnostic; ~2pi)."""
    tang = curve.unit_tangents()
    ang = np.unwrap(np.angle(tang))
    closing = np.angle(tang[0] / tang[-1])
    return float(ang[-1] - ang[0] + closing)

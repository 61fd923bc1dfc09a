"""Scalar and complex fields on the plane or a reference domain.

A ScalarField bundles a value evaluator with a gradient evaluator; gradients are
returned as complex numbers u_x + i u_y.  Plane fields meant for whole-plane
energies carry a constant-at-infinity annotation c_inf together with a radius
beyond which the gradient is negligible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fourier import polyval_series, series_derivative, dirichlet_energy_series


@dataclass
class ScalarField:
    value: callable
    grad: callable
    c_inf: float | None = None
    support_radius: float = 10.0
    kind: str = "generic"
    data: dict = field(default_factory=dict)

    def __add__(self, other: "ScalarField") -> "ScalarField":
        f, g = self, other
        sup = max(f.support_radius, g.support_radius)
        ci = None
        if f.c_inf is not None and g.c_inf is not None:
            ci = f.c_inf + g.c_inf
        return ScalarField(lambda z: f.value(z) + g.value(z),
                           lambda z: f.grad(z) + g.grad(z),
                           c_inf=ci, support_radius=sup, kind="sum")

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        return self + (other * -1.0)

    def __mul__(self, scalar: float) -> "ScalarField":
        f = self
        ci = None if f.c_inf is None else scalar * f.c_inf
        return ScalarField(lambda z: scalar * f.value(z),
                           lambda z: scalar * f.grad(z),
                           c_inf=ci, support_radius=f.support_radius, kind="scaled")

    __rmul__ = __mul__


@dataclass
class ComplexField:
    """Complex-valued field as a pair of real fields; energy adds over parts."""

    re: ScalarField
    im: ScalarField

    def value(self, z):
        return self.re.value(z) + 1j * self.im.value(z)


def constant_field(c: float) -> ScalarField:
    return ScalarField(lambda z: np.full(np.shape(z), float(c)),
                       lambda z: np.zeros(np.shape(z), dtype=complex),
                       c_inf=float(c), support_radius=0.0, kind="constant")


def gaussian_bumps(bumps, c_inf: float = 0.0) -> ScalarField:
    """c_inf + sum_k a_k exp(-|z - c_k|^2 / (2 sigma_k^2)).

    bumps: iterable of (amplitude, center, sigma); center may be complex.
    """
    parsed = [(float(a), complex(c), float(s)) for a, c, s in bumps]

    def value(z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, float(c_inf))
        for a, c, s in parsed:
            out = out + a * np.exp(-np.abs(z - c) ** 2 / (2.0 * s ** 2))
        return out

    def grad(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for a, c, s in parsed:
            out = out - a * (z - c) / s ** 2 * np.exp(-np.abs(z - c) ** 2 / (2.0 * s ** 2))
        return out

    radius = max((abs(c) + 8.0 * s for _, c, s in parsed), default=0.0)
    return ScalarField(value, grad, c_inf=float(c_inf), support_radius=radius,
                       kind="gaussian_bumps", data={"bumps": parsed})


def gaussian_plane_energy(bumps) -> float:
    """Exact plane Dirichlet energy (1/pi)*int |grad|^2 of a Gaussian bump sum.

    The pairwise cross integral has the closed form
    a_j a_k / (s_j^2 s_k^2 g^2) * (1 - ab d^2 / g) * exp(-ab d^2 / g)
    with a = 1/(2 s_j^2), b = 1/(2 s_k^2), g = a + b, d = |c_j - c_k|.
    """
    parsed = [(float(a), complex(c), float(s)) for a, c, s in bumps]
    total = 0.0
    for aj, cj, sj in parsed:
        for ak, ck, sk in parsed:
            al = 1.0 / (2.0 * sj ** 2)
            be = 1.0 / (2.0 * sk ** 2)
            g = al + be
            d2 = abs(cj - ck) ** 2
            expo = al * be * d2 / g
            total += aj * ak / (sj ** 2 * sk ** 2 * g ** 2) * (1.0 - expo) * np.exp(-expo)
    return total


def field_from_spec(spec: dict) -> ScalarField:
    """Field from a JSON-style dict: constant, gaussian_bumps, or grid."""
    kind = spec.get("kind")
    if kind == "constant":
        return constant_field(float(spec.get("value", 0.0)))
    if kind == "gaussian_bumps":
        bumps = [(b["a"], _as_complex(b["center"]), b["sigma"]) for b in spec["bumps"]]
        return gaussian_bumps(bumps, c_inf=float(spec.get("c_inf", 0.0)))
    if kind == "grid":
        x = np.asarray(spec["x"], dtype=float)
        y = np.asarray(spec["y"], dtype=float)
        vals = np.asarray(spec["values"], dtype=float)
        return bilinear_grid_field(x, y, vals)
    raise ValueError(f"unsupported field kind {spec.get('kind')!r}")


def bilinear_grid_field(x: np.ndarray, y: np.ndarray, values: np.ndarray) -> ScalarField:
    """Piecewise-bilinear patch on a rectangular grid; constant outside the patch."""
    from scipy.interpolate import RegularGridInterpolator

    interp = RegularGridInterpolator((x, y), values, method="linear",
                                     bounds_error=False, fill_value=float(values[0, 0]))
    gx, gy = np.gradient(values, x, y, edge_order=2)
    ginterp_x = RegularGridInterpolator((x, y), gx, method="linear",
                                        bounds_error=False, fill_value=0.0)
    ginterp_y = RegularGridInterpolator((x, y), gy, method="linear",
                                        bounds_error=False, fill_value=0.0)

    def value(z):
        z = np.asarray(z, dtype=complex)
        pts = np.stack([z.real.ravel(), z.imag.ravel()], axis=-1)
        return interp(pts).reshape(z.shape)

    def grad(z):
        z = np.asarray(z, dtype=complex)
        pts = np.stack([z.real.ravel(), z.imag.ravel()], axis=-1)
        return (ginterp_x(pts) + 1j * ginterp_y(pts)).reshape(z.shape)

    radius = float(max(np.max(np.abs(x)), np.max(np.abs(y))))
    return ScalarField(value, grad, c_inf=float(values[0, 0]), support_radius=radius,
                       kind="grid")


# ---------------------------------------------------------------------------
# Reference-domain fields backed by analytic series
# ---------------------------------------------------------------------------

@dataclass
class DiskSeriesField:
    """Harmonic field on the unit disk: Re or Im of an analytic L(w) = sum c_n w^n.

    Exposes the same value/grad interface as ScalarField but in the disk
    coordinate.  Its Dirichlet energy is available exactly from the series.
    """

    coeffs: np.ndarray
    part: str = "re"  # "re" or "im"

    def value(self, w):
        lv = polyval_series(self.coeffs, w)
        return lv.real if self.part == "re" else lv.imag

    def grad(self, w):
        dv = polyval_series(series_derivative(self.coeffs), w)
        # grad Re L = conj(L'); grad Im L = i*conj(L')
        return np.conj(dv) if self.part == "re" else 1j * np.conj(dv)

    def energy(self) -> float:
        return dirichlet_energy_series(self.coeffs)

    def conjugate(self) -> "DiskSeriesField":
        """Harmonic conjugate, normalized to vanish at the disk center."""
        c = self.coeffs.copy()
        if self.part == "re":
            c[0] = c[0].real  # conjugate of Re L is Im L with Im L(0) = 0
            return DiskSeriesField(c, part="im")
        c[0] = 1j * c[0].imag
        return DiskSeriesField(-c, part="re")

    def scaled(self, s: float) -> "DiskSeriesField":
        return DiskSeriesField(self.coeffs * s, part=self.part)

    def boundary_values(self, n: int) -> np.ndarray:
        theta = 2.0 * np.pi * np.arange(n) / n
        return self.value(np.exp(1j * theta))


# ---------------------------------------------------------------------------
# Boundary functions
# ---------------------------------------------------------------------------

@dataclass
class BoundaryFunction:
    """Sampled real function on the circle, the real line, or a curve.

    nodes are angles (circle), positions (line), or arclength along the curve.
    Line and curve carriers may annotate constant tail values beyond the nodes.
    """

    carrier: str  # "circle" | "line" | "curve"
    nodes: np.ndarray
    values: np.ndarray
    curve: object | None = None
    tail_values: tuple | None = None
    flags: np.ndarray | None = None  # per-node convergence flags (traces)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.nodes.size != self.values.size:
            raise ValueError("node/value size mismatch")

    def __call__(self, x):
        from scipy.interpolate import CubicSpline

        x = np.asarray(x, dtype=float)
        if self.carrier == "circle":
            t = np.concatenate([self.nodes, [self.nodes[0] + 2.0 * np.pi]])
            v = np.concatenate([self.values, [self.values[0]]])
            spl = CubicSpline(t, v, bc_type="periodic")
            return spl(np.mod(x - self.nodes[0], 2.0 * np.pi) + self.nodes[0])
        spl = CubicSpline(self.nodes, self.values)
        out = spl(np.clip(x, self.nodes[0], self.nodes[-1]))
        if self.tail_values is not None:
            out = np.where(x < self.nodes[0], self.tail_values[0], out)
            out = np.where(x > self.nodes[-1], self.tail_values[1], out)
        return out

    def good_nodes(self):
        if self.flags is None:
            return self.nodes, self.values
        return self.nodes[self.flags], self.values[self.flags]


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(v)

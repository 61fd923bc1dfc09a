"""Curve construction, Moebius transforms, arclength, winding."""

import numpy as np
import pytest

from weldlab.curves import (CurveError, MobiusTransform, apply_mobius, build_curve,
                            bump_sum_deriv, winding)


def ellipse_spec(a=1.0, b=0.8, n=512):
    return {"kind": "ellipse", "params": {"a": a, "b": b}, "samples_n": n}


def test_unit_circle_samples_closed_form():
    c = build_curve({"kind": "circle", "params": {"center": 0.0, "radius": 1.0},
                     "samples_n": 512})
    k = np.arange(512)
    expect = np.exp(2j * np.pi * k / 512)
    assert np.max(np.abs(c.samples - expect)) < 1e-14


def test_graph_without_bumps_is_real_line():
    c = build_curve({"kind": "graph", "params": {"bumps": []}})
    assert c.kind == "through-infinity"
    assert np.max(np.abs(c.samples.imag)) == 0.0
    assert abs(c.samples[0]) > c.escape_radius


def test_fourier_loop_matches_ellipse():
    # oracle: closed-form ellipse evaluator against c_1, c_-1 coefficients
    a, b = 1.0, 0.8
    spec = {"kind": "fourier_loop",
            "params": {"coeffs": {"1": (a + b) / 2.0, "-1": (a - b) / 2.0}},
            "samples_n": 256}
    fl = build_curve(spec)
    el = build_curve(ellipse_spec(a, b, 256))
    assert np.max(np.abs(fl.samples - el.samples)) < 1e-12


def test_self_intersecting_polyline_rejected():
    t = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    pts = np.cos(2 * t) * np.exp(1j * t)  # four-petal figure, self-intersecting
    with pytest.raises(CurveError):
        build_curve({"kind": "samples",
                     "params": {"t": t.tolist(),
                                "points": [[p.real, p.imag] for p in pts]}})


def test_empty_spec_rejected():
    with pytest.raises(CurveError):
        build_curve({})


def test_mobius_identity_and_inversion_on_circle():
    c = build_curve({"kind": "circle", "params": {"radius": 1.0}})
    ident = apply_mobius(c, MobiusTransform.identity())
    assert np.max(np.abs(ident.samples - c.samples)) < 1e-14
    inv = apply_mobius(c, MobiusTransform(0.0, 1.0, 1.0, 0.0))  # z -> 1/z
    assert np.max(np.abs(np.abs(inv.samples) - 1.0)) < 1e-12


def test_mobius_round_trip_on_ellipse():
    el = build_curve(ellipse_spec())
    p = el.point(np.asarray(np.pi / 2))  # curve point sent to infinity
    m = MobiusTransform.inversion_about(complex(p))
    image = apply_mobius(el, m)
    assert image.kind == "through-infinity"
    back = apply_mobius(image, m.inverse())
    assert back.kind == "bounded-loop"
    # sample k+1 of the rebuilt loop is the image point at image.params[k]
    expect = el.point(np.mod(image.params, 2.0 * np.pi))
    assert np.max(np.abs(back.samples[1:] - expect)) < 1e-10


def test_arclength_stable_under_doubling():
    c1 = build_curve(ellipse_spec(n=256))
    c2 = build_curve(ellipse_spec(n=512))
    assert abs(c1.arclength[128] - c2.arclength[256]) < 1e-8


def test_winding_of_line_and_tilted_line():
    line = build_curve({"kind": "graph", "params": {"bumps": []}})
    tau = winding(line)
    assert np.max(np.abs(tau.values)) < 1e-12

    t = np.linspace(-60.0, 60.0, 512)
    pts = t * np.exp(1j * 0.3)
    tilted = build_curve({"kind": "samples",
                          "params": {"t": t.tolist(),
                                     "points": [[p.real, p.imag] for p in pts],
                                     "curve_kind": "through-infinity"}})
    tau2 = winding(tilted)
    assert np.max(np.abs(tau2.values - 0.3)) < 1e-9


def test_winding_of_graph_matches_slope_oracle():
    bumps = [(0.4, 0.0, 1.0)]
    c = build_curve({"kind": "graph", "params": {"bumps": [
        {"a": 0.4, "center": 0.0, "sigma": 1.0}]}})
    tau = winding(c)
    # independent oracle: finite-difference tangents of the closed form
    h = 1e-5
    x = c.params
    fd = (c.point(x + h) - c.point(x - h)) / (2.0 * h)
    expect = np.arctan2(fd.imag, fd.real)
    assert np.max(np.abs(tau.values - expect)) < 1e-6
    assert np.max(np.abs(np.tan(tau.values) - bump_sum_deriv(x, bumps))) < 1e-9


def test_side_classification_graph():
    c = build_curve({"kind": "graph", "params": {"bumps": [
        {"a": 0.5, "center": 0.0, "sigma": 1.0}]}})
    assert c.side_of(2j)[0] == 1
    assert c.side_of(-2j)[0] == -1
    assert c.side_of(0.25j)[0] == -1  # below the bump crest

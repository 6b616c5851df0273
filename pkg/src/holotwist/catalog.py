"""Named parametric loops and cylinders on the built-in models.

Everything here is built from collar-warped smooth pieces, so all
concatenations stay smooth and every object carries exact derivatives.
"""

from __future__ import annotations

import math

import numpy as np

from . import dual as dm
from .dual import Dual, value
from .errors import ConfigError, DomainError
from .geometry import (
    DEFAULT_COLLAR,
    Cylinder,
    Loop,
    collar_warp,
    compose_cylinders_vertical,
    constant_cylinder,
    constant_loop,
    fold_reparam,
    make_model,
    smooth_step,
)

PIECE_COLLAR = 0.2   # collar fraction inside each third of a 3-piece loop


def _w(u):
    return collar_warp(u, PIECE_COLLAR)


def _bump(u):
    """C-infinity bump on [0,1], vanishing to all orders at both ends."""
    return _w(2.0 * u) * (1.0 - _w(2.0 * u - 1.0))


# --------------------------------------------------------------------------
# Sphere
# --------------------------------------------------------------------------

def _sphere_point(theta, phi):
    return [dm.sin(theta) * dm.cos(phi),
            dm.sin(theta) * dm.sin(phi),
            dm.cos(theta)]


def _cap_profile(alpha, t):
    """(theta, phi) of the three-piece loop: down the phi=0 meridian to
    polar angle alpha, once around the latitude, and back up."""
    tv = value(t).real
    if tv <= 1.0 / 3.0:
        return alpha * _w(3.0 * t), 0.0 * t
    if tv <= 2.0 / 3.0:
        return alpha + 0.0 * t, 2.0 * math.pi * _w(3.0 * t - 1.0)
    return alpha * (1.0 - _w(3.0 * t - 2.0)), 0.0 * t


def latitude_loop(theta0, collar=DEFAULT_COLLAR) -> Loop:
    model = make_model("sphere")

    def fn(t):
        th, ph = _cap_profile(theta0, t)
        return _sphere_point(th, ph)

    return Loop(model, fn, collar)


def equator_loop() -> Loop:
    return latitude_loop(math.pi / 2.0)


def great_circle_loop(tilt=0.0) -> Loop:
    """Full great circle through the poles in the plane phi = tilt."""
    model = make_model("sphere")

    def fn(t):
        th = 2.0 * math.pi * _w(t)
        # theta runs through [0, 2pi); fold onto the chart as x/z components
        return [dm.sin(th) * math.cos(tilt), dm.sin(th) * math.sin(tilt),
                dm.cos(th)]

    return Loop(model, fn, DEFAULT_COLLAR)


def cap_sweep_cylinder(alpha_max=math.pi) -> Cylinder:
    """Sweep the latitude loop from the constant loop down to alpha_max."""
    model = make_model("sphere")

    def fn(s, t):
        alpha = alpha_max * _w(s)
        th, ph = _cap_profile(alpha, t)
        return _sphere_point(th, ph)

    return Cylinder(model, fn, DEFAULT_COLLAR)


def spike_retraction_cylinder(alpha_max=math.pi) -> Cylinder:
    """Thin retraction of the depth-alpha_max meridian spike to a point.

    Its start slice agrees pointwise with the end slice of
    cap_sweep_cylinder(alpha_max): the 'around' piece sits at a single
    point once phi is irrelevant (exactly so at alpha_max = pi).
    """
    model = make_model("sphere")

    def profile(t):
        tv = value(t).real
        if tv <= 1.0 / 3.0:
            return _w(3.0 * t)
        if tv <= 2.0 / 3.0:
            return 1.0 + 0.0 * t
        return 1.0 - _w(3.0 * t - 2.0)

    def fn(s, t):
        depth = alpha_max * (1.0 - _w(s))
        th = depth * profile(t)
        return _sphere_point(th, 0.0 * t)

    return Cylinder(model, fn, DEFAULT_COLLAR)


def full_sphere_cylinder() -> Cylinder:
    """Closed cylinder sweeping the whole sphere exactly once."""
    return compose_cylinders_vertical(cap_sweep_cylinder(math.pi),
                                      spike_retraction_cylinder(math.pi))


# --------------------------------------------------------------------------
# Torus
# --------------------------------------------------------------------------

def winding_loop(p, q, collar=DEFAULT_COLLAR) -> Loop:
    """Straight winding loop of class (p, q), traversed with collars."""
    model = make_model("torus")

    def fn(t):
        w = collar_warp(t, collar)
        return [p * w, q * w]

    return Loop(model, fn, collar)


def staircase_loop(p, q) -> Loop:
    """(p,0) then (0,q), same class as winding_loop(p, q)."""
    from .geometry import concat_loops
    return concat_loops(winding_loop(p, 0), winding_loop(0, q))


# --------------------------------------------------------------------------
# Generic deformations
# --------------------------------------------------------------------------

def perturb_loop(loop: Loop, amplitude, direction=None, center=0.5,
                 width=0.5) -> Loop:
    """Smooth non-thin displacement of the loop interior.

    Torus loops are displaced additively; sphere loops are rotated about
    the direction axis by a bump-profiled angle.  Collars are untouched.
    """
    model = loop.model

    def bump(t):
        u = (t - center) / width + 0.5
        uv = value(u).real
        if uv <= 0.0 or uv >= 1.0:
            return 0.0 * t
        return _bump(u)

    if model.kind == "torus":
        direction = np.asarray(direction if direction is not None
                               else [0.0, 1.0], dtype=float)

        def fn(t):
            b = amplitude * bump(t)
            out = loop.fn(t)
            return [c + b * d for c, d in zip(out, direction)]

        return Loop(model, fn, loop.collar_width)

    axis = np.asarray(direction if direction is not None
                      else [0.0, 0.0, 1.0], dtype=float)
    axis = axis / np.linalg.norm(axis)

    def fn(t):
        ang = amplitude * bump(t)
        p = loop.fn(t)
        return _rotate_about(p, axis, ang)

    return Loop(model, fn, loop.collar_width)


def _rotate_about(p, axis, angle):
    """Rodrigues rotation, dual-capable in the point and the angle."""
    c, s = dm.cos(angle), dm.sin(angle)
    k = axis
    dot = p[0] * k[0] + p[1] * k[1] + p[2] * k[2]
    cross = [k[1] * p[2] - k[2] * p[1],
             k[2] * p[0] - k[0] * p[2],
             k[0] * p[1] - k[1] * p[0]]
    return [p[i] * c + cross[i] * s + k[i] * dot * (1.0 - c)
            for i in range(3)]


def perturb_cylinder(cyl: Cylinder, amplitude, direction=None,
                     center=(0.5, 0.5), width=0.5) -> Cylinder:
    """Interior-only smooth deformation of a cylinder (non-thin for
    amplitude != 0); boundary collars and boundary loops are unchanged."""
    model = cyl.model

    def bump2(s, t):
        bs = (s - center[0]) / width + 0.5
        bt = (t - center[1]) / width + 0.5
        out = 1.0
        for u in (bs, bt):
            uv = value(u).real
            if uv <= 0.0 or uv >= 1.0:
                return 0.0 * s
            out = out * _bump(u)
        return out

    if model.kind == "torus":
        d = np.asarray(direction if direction is not None else [0.0, 1.0],
                       dtype=float)

        def fn(s, t):
            b = amplitude * bump2(s, t)
            out = cyl.fn(s, t)
            return [c + b * dk for c, dk in zip(out, d)]

        return Cylinder(model, fn, cyl.collar_width)

    axis = np.asarray(direction if direction is not None else [1.0, 0.0, 0.0],
                      dtype=float)
    axis = axis / np.linalg.norm(axis)

    def fn(s, t):
        ang = amplitude * bump2(s, t)
        return _rotate_about(cyl.fn(s, t), axis, ang)

    return Cylinder(model, fn, cyl.collar_width)


def morph_cylinder(l1: Loop, l2: Loop) -> Cylinder:
    """Homotopy from l1 to l2 by pointwise interpolation.

    Torus: straight-line interpolation of lifts (valid when the loops
    share a winding class).  Sphere: normalized linear interpolation,
    valid while the loops are never antipodal at equal times.
    """
    model = l1.model
    if model.kind == "torus":
        def fn(s, t):
            w = collar_warp(s)
            a, b = l1.fn(t), l2.fn(t)
            return [(1.0 - w) * x + w * y for x, y in zip(a, b)]

        return Cylinder(model, fn, min(l1.collar_width, l2.collar_width))

    def fn(s, t):
        w = collar_warp(s)
        a, b = l1.fn(t), l2.fn(t)
        mix = [(1.0 - w) * x + w * y for x, y in zip(a, b)]
        n2 = mix[0] * mix[0] + mix[1] * mix[1] + mix[2] * mix[2]
        if value(n2).real < 1e-12:
            raise DomainError("interpolated loops pass through antipodes")
        n = dm.sqrt(n2)
        return [m / n for m in mix]

    return Cylinder(model, fn, min(l1.collar_width, l2.collar_width))


def thin_fold_cylinder(loop: Loop, waypoints=(0.0, 0.7, 0.4, 1.0)) -> Cylinder:
    """Homotopy from a loop to its folded reparametrization; every slice
    has the same image, so the whole cylinder is thin."""
    model = loop.model
    rep = fold_reparam(waypoints)

    def fn(s, t):
        w = collar_warp(s)
        warped = rep(t)
        mixed = t + w * (warped - t)
        return loop.fn(mixed)

    return Cylinder(model, fn, loop.collar_width)


# --------------------------------------------------------------------------
# Named registry (used by the CLI and by randomized test batteries)
# --------------------------------------------------------------------------

def make_loop(model_kind, name, params=None) -> Loop:
    params = dict(params or {})
    try:
        if name == "constant":
            return constant_loop(make_model(model_kind))
        if model_kind == "sphere":
            if name == "latitude":
                return latitude_loop(float(params.get("theta", math.pi / 2)))
            if name == "equator":
                return equator_loop()
            if name == "great-circle":
                return great_circle_loop(float(params.get("tilt", 0.0)))
        if model_kind == "torus":
            if name == "winding":
                return winding_loop(int(params.get("p", 1)),
                                    int(params.get("q", 0)))
            if name == "staircase":
                return staircase_loop(int(params.get("p", 1)),
                                      int(params.get("q", 1)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad loop parameters: {exc}") from None
    raise ConfigError(f"unknown loop {name!r} on model {model_kind!r}")


def make_cylinder(model_kind, name, params=None) -> Cylinder:
    params = dict(params or {})
    try:
        if name == "constant":
            return constant_cylinder(make_loop(model_kind,
                                               params.get("loop", "constant"),
                                               params.get("loop_params")))
        if name == "thin-fold":
            base = make_loop(model_kind, params.get("loop", "constant"),
                             params.get("loop_params"))
            return thin_fold_cylinder(base, tuple(params.get(
                "waypoints", (0.0, 0.7, 0.4, 1.0))))
        if name == "perturbed":
            base = make_cylinder(model_kind, params.get("base", "constant"),
                                 params.get("base_params"))
            return perturb_cylinder(base, float(params.get("amplitude", 0.1)),
                                    params.get("direction"))
        if model_kind == "sphere":
            if name == "cap-sweep":
                return cap_sweep_cylinder(float(params.get("alpha",
                                                           math.pi)))
            if name == "spike-retraction":
                return spike_retraction_cylinder(float(params.get(
                    "alpha", math.pi)))
            if name == "full-sphere":
                return full_sphere_cylinder()
        if model_kind == "torus":
            if name == "morph":
                l1 = make_loop("torus", params.get("loop", "winding"),
                               params.get("loop_params", {"p": 1, "q": 0}))
                l2 = perturb_loop(l1, float(params.get("amplitude", 0.1)))
                return morph_cylinder(l1, l2)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad cylinder parameters: {exc}") from None
    raise ConfigError(f"unknown cylinder {name!r} on model {model_kind!r}")


LOOP_NAMES = {
    "sphere": ("constant", "latitude", "equator", "great-circle"),
    "torus": ("constant", "winding", "staircase"),
    "plane": ("constant",),
}

CYLINDER_NAMES = {
    "sphere": ("constant", "thin-fold", "perturbed", "cap-sweep",
               "spike-retraction", "full-sphere"),
    "torus": ("constant", "thin-fold", "perturbed", "morph"),
    "plane": ("constant", "thin-fold"),
}

"""Built-in bundle families with closed-form local data.

The two sphere families are built from quaternion sections of the unit
2-sphere: for each cap axis p the section rotates p to the evaluation
point along a great circle, then a fixed rotation aligns the reference
axis k with p.  All transition phases, connection forms and cocycles
derive from those sections, so every local identity holds exactly.
"""

from __future__ import annotations

import math

import numpy as np

from . import dual as dm
from .bundle import GroupMap, TwistedBundleData, overlap_pairs, overlap_triples
from .dual import Dual, value
from .errors import ConfigError, DomainError
from .formsexpr.forms import LocalForm, native_form, zero_form
from .geometry import SPHERE_CAP_AXES, make_cover
from .liecore import make_extension


# --------------------------------------------------------------------------
# Quaternions as 4-tuples of scalars (floats or Duals)
# --------------------------------------------------------------------------

def qmul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw)


def qconj(a):
    return (a[0], -a[1], -a[2], -a[3])


def rotor_to(p, x):
    """Unit quaternion rotating the unit vector p onto the point x along
    the shorter great circle; undefined at the antipode of p."""
    d = p[0] * x[0] + p[1] * x[1] + p[2] * x[2]
    if value(d).real <= -1.0 + 1e-12:
        raise DomainError("rotor undefined at the antipode of the cap axis")
    c = dm.sqrt((1.0 + d) / 2.0)
    cross = (p[1] * x[2] - p[2] * x[1],
             p[2] * x[0] - p[0] * x[2],
             p[0] * x[1] - p[1] * x[0])
    return (c, cross[0] / (2.0 * c), cross[1] / (2.0 * c),
            cross[2] / (2.0 * c))


K_AXIS = (0.0, 0.0, 1.0)


def section_rotor(axis, x):
    """Section of the unit-quaternion bundle over the cap around `axis`."""
    w = rotor_to(K_AXIS, tuple(float(c) for c in axis))
    return qmul(rotor_to(tuple(float(c) for c in axis), x), w)


def su2_matrix(q):
    """Quaternion (w, v) -> w*I - i (v . sigma) in SU(2)."""
    w, x, y, z = q
    return [[w - 1j * z, -1j * x - y],
            [-1j * x + y, w + 1j * z]]


def stabilizer_phase(q):
    """For q = (w, 0, 0, z) up to noise: the phase w - i z fixing k."""
    return q[0] - 1j * q[3]


# --------------------------------------------------------------------------
# Shared pieces
# --------------------------------------------------------------------------

def _linear_tau(pi, pj, kappa, mu):
    """Antisymmetric smooth overlap phases tau_ij(x) = coeff . x."""
    coeff = kappa * (np.asarray(pi) - np.asarray(pj)) \
        + mu * np.cross(pi, pj)

    def tau(point):
        return coeff[0] * point[0] + coeff[1] * point[1] \
            + coeff[2] * point[2]

    return tau, coeff


def _const_2form(scale_matrix, component, dim, coords, tag="h"):
    """A 2-form with constant coefficient `scale_matrix` on the given
    coordinate wedge; used on the flat torus."""
    a, b = component

    def evalfn(p, v, w):
        factor = v[a] * w[b] - v[b] * w[a]
        return factor * scale_matrix

    f = native_form(2, evalfn, dim, coords, value_tag=tag)
    return f


def sphere_area_form(scale, dim=1, tag="h") -> LocalForm:
    """scale times the round area form x . (v x w) on the unit sphere."""
    def evalfn(p, v, w):
        tr = float(np.dot(p, np.cross(v, w)))
        return scale * tr * np.eye(dim, dtype=complex)

    return native_form(2, evalfn, dim, ("x", "y", "z"), value_tag=tag)


# --------------------------------------------------------------------------
# Trivial bundle
# --------------------------------------------------------------------------

def trivial_bundle(model_kind="sphere", extension="u1-squared",
                   cover_name=None) -> TwistedBundleData:
    ext = make_extension(extension)
    cover = make_cover(cover_name or
                       {"sphere": "sphere-3caps", "torus": "torus-4squares",
                        "plane": "plane-1"}[model_kind])
    n = len(cover)
    coords = cover.model.coord_names
    unit_e = np.eye(ext.E.dim)
    zero1_e = zero_form(1, ext.E.dim, coords, value_tag="e")
    zero1_g = zero_form(1, ext.G.dim, coords, value_tag="g")
    zero1_h = zero_form(1, ext.H.dim, coords, value_tag="h")
    zero2_h = zero_form(2, ext.H.dim, coords, value_tag="h")
    return TwistedBundleData(
        name=f"trivial-{model_kind}-{extension}", cover=cover, extension=ext,
        g={ij: GroupMap.constant(np.eye(ext.G.dim), "G")
           for ij in overlap_pairs(n)},
        e={ij: GroupMap.constant(unit_e, "E") for ij in overlap_pairs(n)},
        h={t: GroupMap.constant(np.eye(ext.H.dim), "H")
           for t in overlap_triples(n)},
        D={i: zero1_g for i in range(n)},
        A={i: zero1_e for i in range(n)},
        Aij={ij: zero1_h for ij in overlap_pairs(n)},
        F={i: zero2_h for i in range(n)},
        params={"model": model_kind, "extension": extension},
    )


# --------------------------------------------------------------------------
# Flat torus family
# --------------------------------------------------------------------------

TORUS_M = {(0, 1): 1, (2, 3): 1, (0, 2): 0, (0, 3): 0, (1, 2): 0, (1, 3): 0}


def torus_flat_bundle(k=1, order=3, flux=0.7,
                      a_coeffs=(0.9, 1.7), d_coeffs=(1.3, 0.55)
                      ) -> TwistedBundleData:
    """Flat twisted bundle over the square torus.

    Transitions are constant, the fiber cocycle takes values in the
    `order`-th roots of unity (raised to the k-th power), the connection
    forms are constant-coefficient, and F carries a non-integer flux so
    that surface holonomy separates winding classes.
    """
    ext = make_extension("u1-squared")
    cover = make_cover("torus-4squares")
    n = len(cover)
    coords = cover.model.coord_names

    def m_of(i, j):
        if (i, j) in TORUS_M:
            return TORUS_M[(i, j)]
        return -TORUS_M[(j, i)]

    lam = {ij: np.exp(2j * math.pi * k * m_of(*ij) / order)
           for ij in overlap_pairs(n)}
    e_maps = {ij: GroupMap.constant(np.diag([lam[ij], 1.0]), "E")
              for ij in overlap_pairs(n)}
    h_maps = {}
    for (i, j, kk) in overlap_triples(n):
        val = lam[(i, j)] * lam[(j, kk)] * lam[(kk, i)]
        h_maps[(i, j, kk)] = GroupMap.constant(np.array([[val]]), "H")

    a1, a2 = a_coeffs
    d1, d2 = d_coeffs

    def a_eval(p, v):
        lam_part = 1j * (a1 * v[0] + a2 * v[1])
        g_part = 1j * (d1 * v[0] + d2 * v[1])
        return np.diag([lam_part, g_part])

    def d_eval(p, v):
        return np.array([[1j * (d1 * v[0] + d2 * v[1])]])

    a_form = native_form(1, a_eval, 2, coords, value_tag="e",
                         dirfn=lambda p, d, v: np.zeros((2, 2), complex))
    a_form.analytic_d = zero_form(2, 2, coords, value_tag="e")
    d_form = native_form(1, d_eval, 1, coords, value_tag="g",
                         dirfn=lambda p, d, v: np.zeros((1, 1), complex))
    f_form = _const_2form(2j * math.pi * flux * np.eye(1, dtype=complex),
                          (0, 1), 1, coords)

    zero1_h = zero_form(1, 1, coords, value_tag="h")
    return TwistedBundleData(
        name="torus-flat", cover=cover, extension=ext,
        g={ij: GroupMap.constant(np.eye(1), "G") for ij in overlap_pairs(n)},
        e=e_maps, h=h_maps,
        D={i: d_form for i in range(n)},
        A={i: a_form for i in range(n)},
        Aij={ij: zero1_h for ij in overlap_pairs(n)},
        F={i: f_form for i in range(n)},
        params={"k": k, "order": order, "flux": flux},
    )


# --------------------------------------------------------------------------
# Sphere monopole family
# --------------------------------------------------------------------------

def _sphere_transition_phase(axis_i, axis_j):
    """x -> unit phase of section_i(x)^-1 section_j(x) (a k-stabilizer)."""
    def phase(point):
        qi = section_rotor(axis_i, tuple(point))
        qj = section_rotor(axis_j, tuple(point))
        return stabilizer_phase(qmul(qconj(qi), qj))

    return phase


def _vertical_component(axis):
    """x, v -> the k-component of q^-1 dq for the cap section (a real
    scalar; the canonical abelian connection of the section)."""
    def form_eval(p, v):
        seeded = [Dual(float(c), float(d)) for c, d in zip(p, v)]
        q = section_rotor(axis, tuple(seeded))
        qval = tuple(value(c) for c in q)
        qdot = tuple((c.dot if isinstance(c, Dual) else 0.0) for c in q)
        u = qmul(qconj(qval), qdot)   # q^-1 dq as a pure quaternion
        return u[3]

    return form_eval


def monopole_bundle(n=1, kappa=0.8, mu=0.5, flux_scale=None
                    ) -> TwistedBundleData:
    """Charge-n sphere monopole inside the U(1)^2 extension.

    g_ij is the n-th power of the quaternion-section transition phase,
    D_i the matching abelian connection, and the fiber layer carries the
    smooth antisymmetric phases tau_ij, making h_ijk nonconstant.
    """
    if n != int(n):
        raise ConfigError("monopole charge must be an integer")
    n = int(n)
    ext = make_extension("u1-squared")
    cover = make_cover("sphere-3caps")
    nc = len(cover)
    coords = cover.model.coord_names
    axes = SPHERE_CAP_AXES

    taus, coeffs = {}, {}
    for (i, j) in overlap_pairs(nc):
        taus[(i, j)], coeffs[(i, j)] = _linear_tau(axes[i], axes[j],
                                                   kappa, mu)

    def e_fn(i, j):
        phase = _sphere_transition_phase(axes[i], axes[j])
        tau = taus[(i, j)]

        def fn(point):
            lam = dm.exp(1j * tau(point))
            g = phase(point) ** n
            return [[lam, 0.0 * lam], [0.0 * lam, g]]

        return fn

    def g_fn(i, j):
        phase = _sphere_transition_phase(axes[i], axes[j])

        def fn(point):
            return [[phase(point) ** n]]

        return fn

    def h_fn(i, j, k):
        ti, tj, tk = taus[(i, j)], taus[(j, k)], taus[(k, i)]

        def fn(point):
            return [[dm.exp(1j * (ti(point) + tj(point) + tk(point)))]]

        return fn

    e_maps = {ij: GroupMap.from_dual_fn(e_fn(*ij), "E")
              for ij in overlap_pairs(nc)}
    g_maps = {ij: GroupMap.from_dual_fn(g_fn(*ij), "G")
              for ij in overlap_pairs(nc)}
    h_maps = {t: GroupMap.from_dual_fn(h_fn(*t), "H")
              for t in overlap_triples(nc)}

    d_forms, a_forms = {}, {}
    for i in range(nc):
        vert = _vertical_component(axes[i])

        def d_eval(p, v, vert=vert):
            return np.array([[-1j * n * vert(p, v)]])

        def a_eval(p, v, vert=vert):
            return np.diag([0.0 + 0.0j, -1j * n * vert(p, v)])

        d_forms[i] = native_form(1, d_eval, 1, coords, value_tag="g")
        a_forms[i] = native_form(1, a_eval, 2, coords, value_tag="e")

    aij_forms = {}
    for (i, j) in overlap_pairs(nc):
        coeff = coeffs[(i, j)]

        def aij_eval(p, v, coeff=coeff):
            return np.array([[-1j * float(np.dot(coeff, v))]])

        form = native_form(1, aij_eval, 1, coords, value_tag="h",
                           dirfn=lambda p, d, v: np.zeros((1, 1), complex))
        form.analytic_d = zero_form(2, 1, coords, value_tag="h")
        aij_forms[(i, j)] = form

    scale = flux_scale if flux_scale is not None else 0.5j * n
    f_form = sphere_area_form(scale)
    return TwistedBundleData(
        name=f"monopole-{n}", cover=cover, extension=ext,
        g=g_maps, e=e_maps, h=h_maps,
        D=d_forms, A=a_forms, Aij=aij_forms,
        F={i: f_form for i in range(nc)},
        params={"n": n, "kappa": kappa, "mu": mu},
    )


# --------------------------------------------------------------------------
# Sphere PU(2) family
# --------------------------------------------------------------------------

def pu2_bundle(kappa=0.8, mu=0.5, spin=0.6, flux=0.7) -> TwistedBundleData:
    """Nonabelian sphere family in 1 -> U(1) -> U(2) -> PU(2) -> 1.

    e_ij(x) = exp(i tau_ij(x)) . U_i(x)^-1 U_j(x) with the quaternion
    sections U_i; A_i conjugates a global su(2)-valued 1-form through
    U_i and adds the section's Maurer-Cartan term, so all gluing
    identities hold exactly.
    """
    ext = make_extension("u2-pu2")
    cover = make_cover("sphere-3caps")
    nc = len(cover)
    coords = cover.model.coord_names
    axes = SPHERE_CAP_AXES

    taus, coeffs = {}, {}
    for (i, j) in overlap_pairs(nc):
        taus[(i, j)], coeffs[(i, j)] = _linear_tau(axes[i], axes[j],
                                                   kappa, mu)

    def e_fn(i, j):
        tau = taus[(i, j)]
        ai, aj = axes[i], axes[j]

        def fn(point):
            lam = dm.exp(1j * tau(point))
            qi = section_rotor(ai, tuple(point))
            qj = section_rotor(aj, tuple(point))
            t = su2_matrix(qmul(qconj(qi), qj))
            return [[lam * t[0][0], lam * t[0][1]],
                    [lam * t[1][0], lam * t[1][1]]]

        return fn

    e_maps = {ij: GroupMap.from_dual_fn(e_fn(*ij), "E")
              for ij in overlap_pairs(nc)}
    g_maps = {ij: e_maps[ij].pushforward(ext.project_mat, "G")
              for ij in overlap_pairs(nc)}

    def h_fn(i, j, k):
        ti, tj, tk = taus[(i, j)], taus[(j, k)], taus[(k, i)]

        def fn(point):
            return [[dm.exp(1j * (ti(point) + tj(point) + tk(point)))]]

        return fn

    h_maps = {t: GroupMap.from_dual_fn(h_fn(*t), "H")
              for t in overlap_triples(nc)}

    def global_su2(p, v):
        """(i spin / 2) sigma . (x cross v): a global su(2) 1-form."""
        c = np.cross(p, v)
        return 0.5j * spin * (c[0] * np.array([[0, 1], [1, 0]], complex)
                              + c[1] * np.array([[0, -1j], [1j, 0]], complex)
                              + c[2] * np.array([[1, 0], [0, -1]], complex))

    a_forms, d_forms = {}, {}
    for i in range(nc):
        axis = axes[i]

        def a_eval(p, v, axis=axis):
            seeded = [Dual(float(c), float(d)) for c, d in zip(p, v)]
            q = section_rotor(axis, tuple(seeded))
            qval = tuple(value(c) for c in q)
            qdot = tuple((c.dot if isinstance(c, Dual) else 0.0) for c in q)
            u = np.array(su2_matrix(qval), dtype=complex)
            du = np.array(su2_matrix(qdot), dtype=complex)
            ui = np.linalg.inv(u)
            return ui @ global_su2(p, v) @ u + ui @ du

        def d_eval(p, v, a_eval=a_eval):
            return ext.alg_project_mat(a_eval(p, v))

        a_forms[i] = native_form(1, a_eval, 2, coords, value_tag="e")
        d_forms[i] = native_form(1, d_eval, 3, coords, value_tag="g")

    aij_forms = {}
    for (i, j) in overlap_pairs(nc):
        coeff = coeffs[(i, j)]

        def aij_eval(p, v, coeff=coeff):
            return np.array([[-1j * float(np.dot(coeff, v))]])

        form = native_form(1, aij_eval, 1, coords, value_tag="h",
                           dirfn=lambda p, d, v: np.zeros((1, 1), complex))
        form.analytic_d = zero_form(2, 1, coords, value_tag="h")
        aij_forms[(i, j)] = form

    f_form = sphere_area_form(0.5j * flux)
    return TwistedBundleData(
        name="sphere-pu2", cover=cover, extension=ext,
        g=g_maps, e=e_maps, h=h_maps,
        D=d_forms, A=a_forms, Aij=aij_forms,
        F={i: f_form for i in range(nc)},
        params={"kappa": kappa, "mu": mu, "spin": spin, "flux": flux},
    )


# --------------------------------------------------------------------------
# Registry
# --------------------------------------------------------------------------

def make_bundle(name, params=None) -> TwistedBundleData:
    params = dict(params or {})
    if name == "trivial":
        return trivial_bundle(params.get("model", "sphere"),
                              params.get("extension", "u1-squared"))
    if name == "torus-flat":
        return torus_flat_bundle(int(params.get("k", 1)),
                                 int(params.get("order", 3)),
                                 float(params.get("flux", 0.7)))
    if name == "monopole":
        return monopole_bundle(int(params.get("n", 1)),
                               float(params.get("kappa", 0.8)),
                               float(params.get("mu", 0.5)))
    if name == "sphere-pu2":
        return pu2_bundle(float(params.get("kappa", 0.8)),
                          float(params.get("mu", 0.5)),
                          float(params.get("spin", 0.6)),
                          float(params.get("flux", 0.7)))
    raise ConfigError(f"unknown bundle family {name!r}")


FAMILY_NAMES = ("trivial", "torus-flat", "monopole", "sphere-pu2")

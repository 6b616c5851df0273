"""Line and surface holonomy of twisted bundles.

hol0/hol1 compute ordered products of path-ordered exponentials and
transition values over a certified interval subdivision.  epsilon
computes the abelian surface factor from the curving, the overlap
1-forms and the fiber 2-cocycle over a certified grid; the holonomy
functor assembles both into a morphism of the categorical group.

Grid conventions (fixed once, documented here):
  * faces are enumerated row-major; the face integral uses the (t, s)
    orientation, i.e. minus the (s, t) iterated integral;
  * an interior horizontal edge (constant s) is traversed in +t and
    carries A_{north,south}; an interior vertical edge (constant t) is
    traversed in +s and carries A_{west,east};
  * an interior vertex contributes h_{abc} . h_{adc}^-1 with a, b, c, d
    the lower-left, lower-right, upper-right, upper-left face charts;
  * the seam t=0 ~ t=1 of a cylinder is interior: its edge integrals
    vanish (the boundary loops are based there) but its vertices
    contribute, with west/east faces wrapping around.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .catgroup import CatGroupMorphism
from .errors import NonFinite, NotSameFiber, PreconditionViolated
from .formsexpr.forms import integrate_1form, integrate_2form
from .geometry import assign_charts_interval, assign_charts_rect
from .liecore import GroupElement, mat_norm, path_ordered_exp

FACE_SIGN = -1.0
EDGE_H_SIGN = 1.0
EDGE_V_SIGN = 1.0
VERTEX_SIGN = 1.0


@dataclass
class HolonomyResult:
    """A holonomy value with the discretization that produced it."""

    value: object                 # GroupElement or CatGroupMorphism
    subdivision: object
    cells: list = field(default_factory=list)   # (label, contribution)
    error_estimate: float = 0.0


def _discrete_kernel(ext):
    return mat_norm(ext.alg_include_mat(
        np.ones((ext.H.dim, ext.H.dim)))) == 0.0


def _transition(store, a, b, point, dim):
    if a == b:
        return np.eye(dim, dtype=complex)
    return store[(a, b)].value(point).entries


def _h_at(bundle, a, b, c, point):
    if a == b or b == c or a == c:
        return np.eye(bundle.extension.H.dim, dtype=complex)
    return bundle.h[(a, b, c)].value(point).entries


# --------------------------------------------------------------------------
# Line holonomy
# --------------------------------------------------------------------------

def _line_product(bundle, loop, sub, forms, trans, tag, dim, steps):
    total = np.eye(dim, dtype=complex)
    cells = []
    charts = sub.charts
    n = len(charts)
    for k, ((a, b), chart) in enumerate(zip(sub.cells, charts)):
        form = forms[chart]

        def fld(t, form=form):
            p, v = loop.eval_with_deriv(t)
            return form(p, v)

        ncell = max(4, int(round(steps * (b - a))))
        u = path_ordered_exp(fld, a, b, steps=ncell, tag=tag.lower()).entries
        total = total @ u
        cells.append((f"cell[{k}] chart {chart}", u))
        nxt = charts[(k + 1) % n]
        point = loop.eval(b)
        tmat = _transition(trans, chart, nxt, point, dim)
        if chart != nxt:
            cells.append((f"transition {chart}->{nxt}", tmat))
        total = total @ tmat
    if not np.all(np.isfinite(total)):
        raise NonFinite("line holonomy diverged")
    return total, cells


def hol0(bundle, loop, subdivision=None, steps=96,
         with_error=True) -> HolonomyResult:
    """Ordinary holonomy of the underlying G-bundle along a based loop."""
    sub = subdivision or assign_charts_interval(loop, bundle.cover)
    dim = bundle.extension.G.dim
    total, cells = _line_product(bundle, loop, sub, bundle.D, bundle.g,
                                 "g", dim, steps)
    err = 0.0
    if with_error:
        half, _ = _line_product(bundle, loop, sub, bundle.D, bundle.g,
                                "g", dim, max(8, steps // 2))
        err = mat_norm(total - half)
    return HolonomyResult(GroupElement(total, "G"), sub, cells, err)


def hol1(bundle, loop, subdivision=None, steps=96,
         with_error=True) -> HolonomyResult:
    """The E-valued 1-holonomy; only well-defined jointly with epsilon."""
    sub = subdivision or assign_charts_interval(loop, bundle.cover)
    dim = bundle.extension.E.dim
    total, cells = _line_product(bundle, loop, sub, bundle.A, bundle.e,
                                 "e", dim, steps)
    err = 0.0
    if with_error:
        half, _ = _line_product(bundle, loop, sub, bundle.A, bundle.e,
                                "e", dim, max(8, steps // 2))
        err = mat_norm(total - half)
    return HolonomyResult(GroupElement(total, "E"), sub, cells, err)


# --------------------------------------------------------------------------
# Surface factor
# --------------------------------------------------------------------------

def _principal_log(m):
    if m.shape == (1, 1):
        z = complex(m[0, 0])
        return np.array([[np.log(z)]], dtype=complex)
    return scipy.linalg.logm(np.asarray(m, dtype=complex))


def _adaptive_face(form, patch, s0, s1, t0, t1, order, tol, depth):
    """Face integral with error control: compare two Gauss orders and
    split the cell in four while they disagree."""
    lo = integrate_2form(form, patch, (s0, s1), (t0, t1), order=order).entries
    hi = integrate_2form(form, patch, (s0, s1), (t0, t1),
                         order=order + 5).entries
    if depth == 0 or mat_norm(hi - lo) <= tol:
        return hi
    sm, tm = 0.5 * (s0 + s1), 0.5 * (t0 + t1)
    q = tol / 4.0
    return (_adaptive_face(form, patch, s0, sm, t0, tm, order, q, depth - 1)
            + _adaptive_face(form, patch, s0, sm, tm, t1, order, q, depth - 1)
            + _adaptive_face(form, patch, sm, s1, t0, tm, order, q, depth - 1)
            + _adaptive_face(form, patch, sm, s1, tm, t1, order, q,
                             depth - 1))


def epsilon(bundle, cylinder, rect=None, order=8, edge_cells=4,
            face_tol=2e-9, max_split=6) -> HolonomyResult:
    """The abelian surface factor over a certified grid.

    Continuous contributions are accumulated in L(H) and exponentiated
    once; when the kernel H is discrete the vertex cocycle values are
    multiplied exactly in the component group instead.
    """
    ext = bundle.extension
    if rect is None:
        bot = assign_charts_interval(cylinder.bottom_loop(), bundle.cover)
        top = assign_charts_interval(cylinder.top_loop(), bundle.cover)
        rect = assign_charts_rect(cylinder, bundle.cover, bottom=bot, top=top)
    dim_h = ext.H.dim
    discrete = _discrete_kernel(ext)
    acc = np.zeros((dim_h, dim_h), dtype=complex)
    vert_prod = np.eye(dim_h, dtype=complex)
    cells = []
    rows, cols = rect.shape
    sb, tb = rect.s_breaks, rect.t_breaks

    # faces
    for r in range(rows):
        for c in range(cols):
            a = rect.charts[r][c]

            def patch(s, t):
                return cylinder.eval_with_partials(s, t)

            val = FACE_SIGN * _adaptive_face(
                bundle.F[a], patch, sb[r], sb[r + 1], tb[c], tb[c + 1],
                order, face_tol, max_split)
            acc = acc + val
            cells.append((f"face[{r},{c}] chart {a}", val))

    # interior horizontal edges (+t, A_{north,south})
    for r in range(1, rows):
        for c in range(cols):
            south, north = rect.charts[r - 1][c], rect.charts[r][c]
            if south == north:
                continue

            def seg(t, s=sb[r]):
                p, _, dt = cylinder.eval_with_partials(s, t)
                return p, dt

            val = EDGE_H_SIGN * integrate_1form(
                bundle.Aij[(north, south)], seg, tb[c], tb[c + 1],
                order=order, cells=edge_cells).entries
            acc = acc + val
            cells.append((f"hedge[{r},{c}] {north},{south}", val))

    # interior vertical edges (+s, A_{west,east})
    for c in range(1, cols):
        for r in range(rows):
            west, east = rect.charts[r][c - 1], rect.charts[r][c]
            if west == east:
                continue

            def seg(s, t=tb[c]):
                p, ds, _ = cylinder.eval_with_partials(s, t)
                return p, ds

            val = EDGE_V_SIGN * integrate_1form(
                bundle.Aij[(west, east)], seg, sb[r], sb[r + 1],
                order=order, cells=edge_cells).entries
            acc = acc + val
            cells.append((f"vedge[{r},{c}] {west},{east}", val))
    # (seam edge integrals vanish: both boundary circles sit at the
    # basepoint for t in the collars, so the pullback of A_{west,east}
    # along the seam is zero)

    # interior vertices, including the seam t=0 ~ t=1
    def vertex(r, c_left, c_right, point):
        nonlocal acc, vert_prod
        a = rect.charts[r - 1][c_left]
        b = rect.charts[r - 1][c_right]
        cc = rect.charts[r][c_right]
        d = rect.charts[r][c_left]
        first = _h_at(bundle, a, b, cc, point)
        second = _h_at(bundle, a, d, cc, point)
        if discrete:
            step = first @ np.linalg.inv(second)
            if VERTEX_SIGN < 0:
                step = np.linalg.inv(step)
            vert_prod[:] = vert_prod @ step
            cells.append((f"vertex[{r},{c_right}]", step))
        else:
            val = VERTEX_SIGN * (_principal_log(first)
                                 - _principal_log(second))
            acc = acc + val
            cells.append((f"vertex[{r},{c_right}]", val))

    for r in range(1, rows):
        for c in range(1, cols):
            vertex(r, c - 1, c, cylinder.eval(sb[r], tb[c]))
        vertex(r, cols - 1, 0, cylinder.eval(sb[r], 0.0))

    total = scipy.linalg.expm(acc) @ vert_prod
    if not np.all(np.isfinite(total)):
        raise NonFinite("surface factor diverged")
    return HolonomyResult(GroupElement(total, "H"), rect, cells, 0.0)


# --------------------------------------------------------------------------
# The holonomy functor
# --------------------------------------------------------------------------

def holonomy_functor(bundle, cylinder, bottom_sub=None, top_sub=None,
                     rect=None, steps=256, order=8, edge_cells=4,
                     face_tol=2e-9, max_split=6,
                     with_error=True) -> HolonomyResult:
    """H(c) = [H1(bottom), iota(epsilon(c)) . H1(top)] as a morphism of
    the categorical group, sharing the boundary subdivisions between the
    line holonomies and the grid."""
    cover = bundle.cover
    bot = bottom_sub or assign_charts_interval(cylinder.bottom_loop(), cover)
    top = top_sub or assign_charts_interval(cylinder.top_loop(), cover)
    if rect is None:
        rect = assign_charts_rect(cylinder, cover, bottom=bot, top=top)
    h1b = hol1(bundle, cylinder.bottom_loop(), bot, steps, with_error)
    h1t = hol1(bundle, cylinder.top_loop(), top, steps, with_error)
    eps = epsilon(bundle, cylinder, rect, order, edge_cells, face_tol,
                  max_split)
    target = bundle.extension.include_mat(eps.value.entries) \
        @ h1t.value.entries
    morphism = CatGroupMorphism(h1b.value,
                                GroupElement(target, "E"),
                                bundle.extension)
    cells = [("H1(bottom)", h1b.value.entries),
             ("epsilon", eps.value.entries),
             ("H1(top)", h1t.value.entries)]
    err = h1b.error_estimate + h1t.error_estimate
    return HolonomyResult(morphism, (bot, top, rect), cells, err)


def conjugate_functor(result, g: GroupElement, lift: GroupElement,
                      ext=None, tol=1e-6):
    """Conjugate a holonomy value or morphism by g through a lift in E;
    well-defined because the extension is central."""
    if isinstance(result, CatGroupMorphism):
        ext = result.extension
    if ext is not None:
        if mat_norm(ext.project_mat(lift.entries) - g.entries) > tol:
            raise NotSameFiber("lift does not project to the group element")
    if isinstance(result, CatGroupMorphism):
        li = np.linalg.inv(lift.entries)
        le = lift.entries
        return CatGroupMorphism(
            GroupElement(li @ result.rep_source.entries @ le, "E"),
            GroupElement(li @ result.rep_target.entries @ le, "E"),
            result.extension)
    gi = np.linalg.inv(g.entries)
    return GroupElement(gi @ result.entries @ g.entries, result.group_tag)


def kapustin_trace(bundle, cylinder, steps=256, order=8) -> complex:
    """tr(iota(epsilon(c)) . H1(top)) for a cylinder whose bottom
    boundary is the constant loop at the basepoint."""
    bot = cylinder.bottom_loop()
    model = bundle.cover.model
    for t in np.linspace(0.0, 1.0, 33):
        if not model.is_basepoint(bot.eval(float(t))):
            raise PreconditionViolated(
                "Kapustin trace needs a constant start boundary")
    res = holonomy_functor(bundle, cylinder, steps=steps, order=order,
                           with_error=False)
    return complex(np.trace(res.value.rep_target.entries))

"""Chart-local matrix-valued differential forms with derivative support.

A LocalForm of degree 0/1/2 evaluates at an ambient point (plus one or
two tangent vectors) to a square matrix living in a tagged Lie algebra.
Forms are either expression-backed (differentiated exactly by forward
AD), native callables (differentiated by central finite differences, or
exactly when the caller supplies the derivative), or sums thereof.
"""

from __future__ import annotations

import numpy as np

from ..dual import Dual
from ..errors import ChartMismatch, DegreeUnsupported
from ..liecore import AlgebraElement
from .evaluate import _eval
from .parser import Expr, parse

FD_STEP = 1e-5


class LocalForm:
    """A degree 0, 1 or 2 form with values in a matrix Lie algebra."""

    def __init__(self, degree, dim, coord_names, evalfn, dirfn=None,
                 chart_label="", value_tag="h", analytic_d=None):
        if degree not in (0, 1, 2):
            raise DegreeUnsupported(f"degree {degree}")
        self.degree = degree
        self.dim = dim
        self.coord_names = tuple(coord_names)
        self.chart_label = chart_label
        self.value_tag = value_tag
        self._evalfn = evalfn
        self._dirfn = dirfn
        self.analytic_d = analytic_d

    def __call__(self, point, *tangents):
        if len(tangents) != self.degree:
            raise TypeError(
                f"degree-{self.degree} form takes {self.degree} tangent(s)")
        return np.asarray(self._evalfn(np.asarray(point, dtype=float), *tangents),
                          dtype=complex)

    def at(self, point, *tangents) -> AlgebraElement:
        return AlgebraElement(self(point, *tangents), self.value_tag)

    def directional(self, point, direction, *tangents):
        """Derivative of the coefficient map in an ambient direction,
        holding the tangent arguments constant."""
        point = np.asarray(point, dtype=float)
        direction = np.asarray(direction, dtype=float)
        if self._dirfn is not None:
            return np.asarray(self._dirfn(point, direction, *tangents),
                              dtype=complex)
        h = FD_STEP
        plus = self(point + h * direction, *tangents)
        minus = self(point - h * direction, *tangents)
        return (plus - minus) / (2.0 * h)

    def __add__(self, other):
        if not isinstance(other, LocalForm):
            return NotImplemented
        if self.degree != other.degree or self.dim != other.dim:
            raise DegreeUnsupported("cannot add forms of different shape")
        evalfn = lambda p, *t: self._evalfn(p, *t) + other._evalfn(p, *t)
        dirfn = None
        if self._dirfn is not None and other._dirfn is not None:
            dirfn = lambda p, d, *t: self._dirfn(p, d, *t) + other._dirfn(p, d, *t)
        analytic_d = None
        if self.analytic_d is not None and other.analytic_d is not None:
            analytic_d = self.analytic_d + other.analytic_d
        return LocalForm(self.degree, self.dim, self.coord_names, evalfn, dirfn,
                         self.chart_label, self.value_tag, analytic_d)

    def __mul__(self, scalar):
        evalfn = lambda p, *t: scalar * np.asarray(self._evalfn(p, *t), dtype=complex)
        dirfn = None
        if self._dirfn is not None:
            dirfn = lambda p, d, *t: scalar * np.asarray(self._dirfn(p, d, *t), dtype=complex)
        analytic_d = self.analytic_d * scalar if self.analytic_d is not None else None
        return LocalForm(self.degree, self.dim, self.coord_names, evalfn, dirfn,
                         self.chart_label, self.value_tag, analytic_d)

    __rmul__ = __mul__


def _as_expr_matrix(mat, coords):
    rows = []
    for row in mat:
        out = []
        for entry in row:
            if isinstance(entry, Expr):
                out.append(entry)
            else:
                out.append(parse(str(entry), coords=set(coords)))
        rows.append(out)
    return rows


def _eval_expr_matrix(mat, env):
    n = len(mat)
    out = np.empty((n, len(mat[0])), dtype=complex)
    for r, row in enumerate(mat):
        for c, entry in enumerate(row):
            v = _eval(entry, env)
            out[r, c] = v.val if isinstance(v, Dual) else v
    return out


def expr_form(degree, components, coord_names, chart_label="", value_tag="h"):
    """Build an expression-backed form.

    components: degree 0 -> a matrix of expression strings/ASTs;
    degree 1 -> {coord: matrix}; degree 2 -> {(c1, c2): matrix} giving
    the coefficient of dc1 ^ dc2 (keys must have c1 before c2 in
    coord_names order).
    """
    coord_names = tuple(coord_names)
    index = {c: k for k, c in enumerate(coord_names)}

    if degree == 0:
        mat = _as_expr_matrix(components, coord_names)
        dim = len(mat)

        def evalfn(p):
            env = {c: p[index[c]] for c in coord_names}
            return _eval_expr_matrix(mat, env)

        def dirfn(p, d):
            env = {c: Dual(p[index[c]], d[index[c]]) for c in coord_names}
            out = np.empty((dim, dim), dtype=complex)
            for r, row in enumerate(mat):
                for c2, entry in enumerate(row):
                    v = _eval(entry, env)
                    out[r, c2] = v.dot if isinstance(v, Dual) else 0.0
            return out

    elif degree == 1:
        comp = {c: _as_expr_matrix(m, coord_names) for c, m in components.items()}
        dim = len(next(iter(comp.values())))

        def evalfn(p, v):
            env = {c: p[index[c]] for c in coord_names}
            total = np.zeros((dim, dim), dtype=complex)
            for c, mat in comp.items():
                vc = v[index[c]]
                if vc != 0:
                    total += vc * _eval_expr_matrix(mat, env)
            return total

        def dirfn(p, d, v):
            env = {c: Dual(p[index[c]], d[index[c]]) for c in coord_names}
            total = np.zeros((dim, dim), dtype=complex)
            for c, mat in comp.items():
                vc = v[index[c]]
                if vc == 0:
                    continue
                for r, row in enumerate(mat):
                    for c2, entry in enumerate(row):
                        val = _eval(entry, env)
                        if isinstance(val, Dual):
                            total[r, c2] += vc * val.dot
            return total

    elif degree == 2:
        comp = {}
        for (a, b), m in components.items():
            if index[a] >= index[b]:
                raise DegreeUnsupported(
                    f"degree-2 key ({a},{b}) must follow coordinate order")
            comp[(a, b)] = _as_expr_matrix(m, coord_names)
        dim = len(next(iter(comp.values())))

        def evalfn(p, v, w):
            env = {c: p[index[c]] for c in coord_names}
            total = np.zeros((dim, dim), dtype=complex)
            for (a, b), mat in comp.items():
                factor = v[index[a]] * w[index[b]] - v[index[b]] * w[index[a]]
                if factor != 0:
                    total += factor * _eval_expr_matrix(mat, env)
            return total

        dirfn = None  # degree-2 coefficients are never differentiated
    else:
        raise DegreeUnsupported(f"degree {degree}")

    return LocalForm(degree, dim, coord_names, evalfn, dirfn,
                     chart_label, value_tag)


def native_form(degree, fn, dim, coord_names, chart_label="", value_tag="h",
                dirfn=None, analytic_d=None):
    """Wrap a native callable (point, *tangents) -> matrix as a LocalForm."""
    return LocalForm(degree, dim, coord_names, fn, dirfn,
                     chart_label, value_tag, analytic_d)


def zero_form(degree, dim, coord_names, chart_label="", value_tag="h"):
    z = np.zeros((dim, dim), dtype=complex)
    f = LocalForm(degree, dim, coord_names, lambda p, *t: z,
                  lambda p, d, *t: z, chart_label, value_tag)
    if degree < 2:
        f.analytic_d = zero_form(degree + 1, dim, coord_names, chart_label,
                                 value_tag)
    return f


def exterior_derivative(form: LocalForm) -> LocalForm:
    """d of a degree 0 or 1 form, via the stored derivative machinery."""
    if form.analytic_d is not None:
        return form.analytic_d
    if form.degree == 0:
        evalfn = lambda p, v: form.directional(p, v)
        return LocalForm(1, form.dim, form.coord_names, evalfn, None,
                         form.chart_label, form.value_tag)
    if form.degree == 1:
        def evalfn(p, v, w):
            return form.directional(p, v, w) - form.directional(p, w, v)
        return LocalForm(2, form.dim, form.coord_names, evalfn, None,
                         form.chart_label, form.value_tag)
    raise DegreeUnsupported("d is only defined for degrees 0 and 1 here")


def _gauss_nodes(a, b, order):
    x, w = np.polynomial.legendre.leggauss(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def _check_chart(chart, point):
    if chart is not None and not chart.contains(point):
        raise ChartMismatch(
            f"integration point {np.asarray(point)} left chart {chart.label!r}")


def integrate_1form(form: LocalForm, segment, a=0.0, b=1.0, order=8,
                    cells=1, chart=None) -> AlgebraElement:
    """Gauss-Legendre integral of the pullback of a 1-form.

    segment(t) must return (point, tangent) with tangent the curve
    velocity in ambient coordinates.
    """
    if form.degree != 1:
        raise DegreeUnsupported("integrate_1form needs a degree-1 form")
    total = np.zeros((form.dim, form.dim), dtype=complex)
    edges = np.linspace(a, b, cells + 1)
    for k in range(cells):
        ts, ws = _gauss_nodes(edges[k], edges[k + 1], order)
        for t, w in zip(ts, ws):
            point, tangent = segment(t)
            _check_chart(chart, point)
            total += w * form(point, np.asarray(tangent, dtype=float))
    return AlgebraElement(total, form.value_tag)


def integrate_2form(form: LocalForm, patch, s_range=(0.0, 1.0),
                    t_range=(0.0, 1.0), order=8, cells=(1, 1),
                    chart=None) -> AlgebraElement:
    """Tensor-product Gauss integral of F(d_s patch, d_t patch) ds dt.

    patch(s, t) must return (point, dpds, dpdt).
    """
    if form.degree != 2:
        raise DegreeUnsupported("integrate_2form needs a degree-2 form")
    total = np.zeros((form.dim, form.dim), dtype=complex)
    s_edges = np.linspace(s_range[0], s_range[1], cells[0] + 1)
    t_edges = np.linspace(t_range[0], t_range[1], cells[1] + 1)
    for i in range(cells[0]):
        ss, sw = _gauss_nodes(s_edges[i], s_edges[i + 1], order)
        for j in range(cells[1]):
            ts, tw = _gauss_nodes(t_edges[j], t_edges[j + 1], order)
            for s, wsv in zip(ss, sw):
                for t, wtv in zip(ts, tw):
                    point, dps, dpt = patch(s, t)
                    _check_chart(chart, point)
                    total += wsv * wtv * form(point,
                                              np.asarray(dps, dtype=float),
                                              np.asarray(dpt, dtype=float))
    return AlgebraElement(total, form.value_tag)

"""Brute-force classical oracles that never touch the contraction engine.

Every probability is a plain sum over all values of every wire, reading the
box matrices entry by entry.
"""

import itertools

import numpy as np


def _box(model, box):
    """Box matrix as an array with one axis per output, then one per input."""
    f = model.interpretation[box]
    return f.data.reshape([t.dim for t in f.outputs] + [t.dim for t in f.inputs])


def _dims(model, names):
    return [model.diagram.signature.systems[n].dim for n in names]


def front_door_joint(m):
    """P[x, z, y] with every locus left alone."""
    d1, d2, dx, dz, dy = _dims(m, ["U1", "U2", "X", "Z", "Y"])
    u, x_, z_, y_ = (_box(m, b) for b in "uxzy")
    p = np.zeros((dx, dz, dy))
    for u1, u2, x, z, y in itertools.product(range(d1), range(d2), range(dx), range(dz), range(dy)):
        p[x, z, y] += u[u1, u2] * x_[x, u1] * z_[z, x] * y_[y, z, u2]
    return p


def front_door_comb(m):
    """Comb of the channel X -> Y: entry [(x arriving, y), x leaving]."""
    d1, d2, dx, dz, dy = _dims(m, ["U1", "U2", "X", "Z", "Y"])
    u, x_, z_, y_ = (_box(m, b) for b in "uxzy")
    w = np.zeros((dx, dy, dx))
    for u1, u2, xa, xl, z, y in itertools.product(range(d1), range(d2), range(dx), range(dx), range(dz), range(dy)):
        w[xa, y, xl] += u[u1, u2] * x_[xa, u1] * z_[z, xl] * y_[y, z, u2]
    return w.reshape(dx * dy, dx)


def front_door_formula(joint):
    """sum_z P(z|x) sum_x' P(y|x',z) P(x'), as a matrix [y, x]."""
    px = joint.sum(axis=(1, 2))
    pxz = joint.sum(axis=2)
    pz_x = pxz / px[:, None]
    py_xz = joint / pxz[:, :, None]
    return np.einsum("xz,azy,a->yx", pz_x, py_xz, px)


def single_intervention_comb(m):
    """Comb of the channel X -> C: entry [(x arriving, c), x leaving]."""
    names = ["U1", "U2", "U3", "V", "X", "A", "B", "C"]
    d1, d2, d3, dv, dx, da, db, dc = _dims(m, names)
    u, x_, a_, g_, c_ = (_box(m, b) for b in "uxagc")
    w = np.zeros((dx, dc, dx))
    ranges = [range(n) for n in (d1, d2, d3, dv, dx, dx, da, db, dc)]
    for u1, u2, u3, v, xa, xl, a, b, c in itertools.product(*ranges):
        w[xa, c, xl] += u[u1, u2, u3] * x_[xa, v, u1] * a_[a, v, u3] * g_[b, xl, a] * c_[c, b, u2]
    return w.reshape(dx * dc, dx)


def do_from_comb(comb, dx):
    """Interventional distribution [target, x] from a comb by marginalising the arriving X."""
    return comb.reshape(dx, -1, dx).sum(axis=0)

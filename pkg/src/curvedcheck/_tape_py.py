"""Pure-Python tape interpreter; same signatures as the compiled ``_tape`` module."""

import math

_nan = float("nan")


def _log(v):
    if v > 0.0:
        return math.log(v)
    return -math.inf if v == 0.0 else _nan


def _sqrt(v):
    return math.sqrt(v) if v >= 0.0 else _nan


def _powi(v, k):
    if v == 0.0 and k < 0:
        return math.inf
    return v ** k


_UNARY = (None, None, None, None, None, math.sin, math.cos, math.exp, _log, _sqrt)


def eval_tape(op, a, b, c, x, out, roots, res):
    op = op.tolist()
    a = a.tolist()
    b = b.tolist()
    c = c.tolist()
    xs = x.tolist()
    vals = [0.0] * len(op)
    exp = math.exp
    for i, o in enumerate(op):
        if o == 0:
            vals[i] = c[i]
        elif o == 1:
            vals[i] = xs[a[i]]
        elif o == 2:
            vals[i] = vals[a[i]] + vals[b[i]]
        elif o == 3:
            vals[i] = vals[a[i]] * vals[b[i]]
        elif o == 4:
            vals[i] = _powi(vals[a[i]], b[i])
        elif o == 7:
            try:
                vals[i] = exp(vals[a[i]])
            except OverflowError:
                vals[i] = math.inf
        else:
            vals[i] = _UNARY[o](vals[a[i]])
    out[:] = vals
    for j, r in enumerate(roots.tolist()):
        res[j] = vals[r]


def eval_tape_batch(op, a, b, c, X, roots, res):
    import numpy as np

    out = np.empty(len(op), dtype=np.float64)
    row = np.empty(len(roots), dtype=np.float64)
    for p in range(X.shape[0]):
        eval_tape(op, a, b, c, X[p], out, roots, row)
        res[p, :] = row

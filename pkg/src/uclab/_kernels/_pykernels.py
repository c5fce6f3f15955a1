"""Pure-numpy implementations of the hot kernels.

Mirrors the compiled extension in ``_core.pyx``; the package selects one of
the two at import time (see ``__init__``).  All probabilities are base-2
entropy arguments in [0, 1]; the log of the complement is taken via
``log1p(-p)`` so values near 0 and 1 do not lose precision to cancellation.
"""

import numpy as np

_LN2 = 0.6931471805599453


def binary_entropy_many(p):
    """Elementwise -p log2 p - (1-p) log2(1-p), with 0 log 0 = 0."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    out = np.zeros(p.shape, dtype=np.float64)
    inner = (p > 0.0) & (p < 1.0)
    pm = p[inner]
    big = pm > 0.5
    lp = np.empty_like(pm)
    lp[big] = np.log1p(pm[big] - 1.0)
    lp[~big] = np.log(pm[~big])
    lq = np.log1p(-pm)
    out[inner] = -(pm * lp + (1.0 - pm) * lq) / _LN2
    return out


def entropy_sum(masses):
    """-sum m log2 m over positive entries, in bits."""
    m = np.ascontiguousarray(masses, dtype=np.float64)
    m = m[m > 0.0]
    return float(-(m * np.log(m)).sum() / _LN2)


def instance_stats(q, p, threshold):
    """One pass over a weighted bit-law {(q_c, p_c)}.

    Splits histories at ``p_c <= threshold`` (low side "0", rest "1") and
    returns::

        (mean_p, pr0, pr1, h_mass0, h_mass1, term_00, term_01, term_11, total)

    where ``h_mass*`` are sum q_c H(p_c) over each side, ``term_xy`` are the
    three blocks of the pairwise union entropy
    sum_{c,c'} q_c q_{c'} H(p_c + p_{c'} - p_c p_{c'}) over ordered pairs,
    and ``total`` is the same pairwise sum accumulated without partitioning
    (so the block decomposition can be checked against it).
    """
    q = np.ascontiguousarray(q, dtype=np.float64)
    p = np.ascontiguousarray(p, dtype=np.float64)
    a = np.maximum.outer(p, p)
    b = np.minimum.outer(p, p)
    hu = binary_entropy_many((a + b * (1.0 - a)).ravel()).reshape(a.shape)
    wh = np.outer(q, q) * hu
    low = p <= threshold
    hi = ~low
    hq = q * binary_entropy_many(p)
    return (
        float(q @ p),
        float(q[low].sum()),
        float(q[hi].sum()),
        float(hq[low].sum()),
        float(hq[hi].sum()),
        float(wh[np.ix_(low, low)].sum()),
        float(wh[np.ix_(low, hi)].sum() + wh[np.ix_(hi, low)].sum()),
        float(wh[np.ix_(hi, hi)].sum()),
        float(wh.sum()),
    )


def subset_union_square(table, n):
    """Law of the union of two iid subset draws, via the lattice transform.

    Input is the dense probability table indexed by bitmask (element i of
    the ground set occupies bit i-1).  Computes the subset-cumulative
    transform z[S] = Pr[A <= S], squares it pointwise (Pr[A union B <= S] =
    Pr[A <= S]^2), and inverts the transform.  O(2^n * n).
    """
    t = np.array(table, dtype=np.float64, copy=True)
    if t.shape[0] != (1 << n):
        raise ValueError("table length must be 2**n")
    for i in range(n):
        v = t.reshape(-1, 2, 1 << i)
        v[:, 1, :] += v[:, 0, :]
    t *= t
    for i in range(n):
        v = t.reshape(-1, 2, 1 << i)
        v[:, 1, :] -= v[:, 0, :]
    return t

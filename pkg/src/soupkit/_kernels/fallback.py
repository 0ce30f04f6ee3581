"""Pure NumPy kernels.

Every routine mirrors the compiled implementation in _fast.pyx
operation-for-operation: the same elementary float operations (+, -, *, /,
sqrt) are applied to each element in the same order, so the two backends
produce bit-identical results. The test suite asserts this parity; keep
the pairing intact when editing either side.

Sequential reductions rely on np.cumsum / np.add.accumulate evaluating
left to right, which matches the accumulator loops in the C code.
"""

import math

import numpy as np


def saxpy(acc: np.ndarray, part: np.ndarray, w: float) -> None:
    """acc += w * part over flat float64 views; one round per multiply/add."""
    acc += w * part


def mean_update(mean: np.ndarray, x: np.ndarray, k: float) -> None:
    """mean += (x - mean) / k; an exact no-op wherever x == mean."""
    mean += (x - mean) / k


def affine(x: np.ndarray, weight: np.ndarray, bias: np.ndarray, out: np.ndarray) -> None:
    """out[n, h] = bias[h] + sum_f x[n, f] * weight[h, f], f ascending."""
    out[:] = bias
    for f in range(x.shape[1]):
        out += x[:, f : f + 1] * weight[:, f]


def pair_symxent_sum(
    p: np.ndarray, logq: np.ndarray, q: np.ndarray, logp: np.ndarray
) -> float:
    """Sum of p*logq + q*logp over an (N, C) pair of probability grids.

    The two products of each cell are added together before joining the
    running sum, so swapping the argument pairs is a bitwise no-op; cells
    accumulate sample-major, class-minor, matching the compiled loop.
    """
    terms = p * logq + q * logp
    return float(np.cumsum(terms.reshape(-1))[-1])


def jacobi_eigh(b: np.ndarray, max_sweeps: int, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigendecomposition of a symmetric float64 matrix.

    Returns (eigenvalues, eigenvectors-as-columns), unsorted. Sweeps stop
    once the off-diagonal Frobenius norm drops below tol, or after
    max_sweeps full passes.
    """
    a = np.array(b, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return np.diagonal(a).copy(), v
    iu = np.triu_indices(n, 1)
    thresh = tol * tol
    for _ in range(max_sweeps):
        offs = a[iu]
        off2 = 2.0 * float(np.cumsum(offs * offs)[-1])
        if off2 < thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1.0e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diagonal(a).copy(), v

"""Pure numpy CRF dynamic-programming kernels.

Fallback backend for the compiled Cython kernels; both expose the same
four functions over float64 arrays. Emission matrix e is L x K, transition
matrix is K x K (from-label x to-label). All scores are log-domain and may
contain -inf (forbidden transitions), never nan.
"""

import numpy as np


def _lse(a, axis=None):
    # log-sum-exp tolerating -inf rows
    m = np.max(a, axis=axis, keepdims=True)
    safe = np.where(np.isfinite(m), m, 0.0)
    out = safe.squeeze(axis) if axis is not None else safe.item()
    with np.errstate(divide="ignore"):
        s = np.log(np.sum(np.exp(a - safe), axis=axis))
    return out + s


def forward_logz(e, trans, start, stop):
    """Log-partition by the forward recursion (left to right)."""
    alpha = start + e[0]
    for t in range(1, e.shape[0]):
        alpha = e[t] + _lse(alpha[:, None] + trans, axis=0)
    return float(_lse(alpha + stop))


def backward_logz(e, trans, start, stop):
    """Log-partition by the backward recursion (right to left)."""
    beta = stop.copy()
    for t in range(e.shape[0] - 2, -1, -1):
        beta = _lse(trans + (e[t + 1] + beta)[None, :], axis=1)
    return float(_lse(start + e[0] + beta))


def forward_backward(e, trans, start, stop):
    """Posterior marginals, expected pairwise transition counts and logZ.

    Returns (marginals L x K, pairwise K x K summed over positions, logz).
    """
    L, K = e.shape
    alpha = np.empty((L, K))
    alpha[0] = start + e[0]
    for t in range(1, L):
        alpha[t] = e[t] + _lse(alpha[t - 1][:, None] + trans, axis=0)
    beta = np.empty((L, K))
    beta[L - 1] = stop
    for t in range(L - 2, -1, -1):
        beta[t] = _lse(trans + (e[t + 1] + beta[t + 1])[None, :], axis=1)
    logz = float(_lse(alpha[L - 1] + stop))
    marginals = np.exp(alpha + beta - logz)
    pairwise = np.zeros((K, K))
    for t in range(L - 1):
        pairwise += np.exp(alpha[t][:, None] + trans + (e[t + 1] + beta[t + 1])[None, :] - logz)
    return marginals, pairwise, logz


def viterbi(e, trans, start, stop):
    """Best path and its score; ties resolved to the lexicographically
    smallest label-index sequence (suffix-max table + greedy selection)."""
    L, K = e.shape
    best = np.empty((L, K))
    best[L - 1] = e[L - 1] + stop
    for t in range(L - 2, -1, -1):
        best[t] = e[t] + np.max(trans + best[t + 1][None, :], axis=1)
    path = np.empty(L, dtype=np.int64)
    head = start + best[0]
    path[0] = int(np.argmax(head))
    score = float(np.max(head))
    for t in range(1, L):
        path[t] = int(np.argmax(trans[path[t - 1]] + best[t]))
    return path, score

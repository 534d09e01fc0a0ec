"""Brute-force reference implementations used to check the fast code paths.

Everything here enumerates the full path space, so it is only usable for
tiny instances (N^T paths).  Symbols and states are 1-based, matching the
library API.
"""

from itertools import product

import numpy as np


def path_probability(pi, a, b, obs, path):
    """Joint probability P(X=path, O=obs) for one explicit state path."""
    p = pi[path[0] - 1] * b[path[0] - 1, obs[0] - 1]
    for t in range(1, len(obs)):
        p *= a[path[t - 1] - 1, path[t] - 1] * b[path[t] - 1, obs[t] - 1]
    return p


def enumerate_likelihood(pi, a, b, obs):
    """P(O) as the sum over all N^T state paths."""
    n = len(pi)
    total = 0.0
    for path in product(range(1, n + 1), repeat=len(obs)):
        total += path_probability(pi, a, b, obs, path)
    return total


def enumerate_best_path(pi, a, b, obs):
    """(best probability, first argmax path in lexicographic order)."""
    n = len(pi)
    best_p, best_path = -1.0, None
    for path in product(range(1, n + 1), repeat=len(obs)):
        p = path_probability(pi, a, b, obs, path)
        if p > best_p:
            best_p, best_path = p, path
    return best_p, list(best_path)


def enumerate_posteriors(pi, a, b, obs):
    """(gamma, xi) accumulated over all paths, normalized by P(O)."""
    n, t_len = len(pi), len(obs)
    gamma = np.zeros((t_len, n))
    xi = np.zeros((t_len - 1, n, n))
    total = 0.0
    for path in product(range(1, n + 1), repeat=t_len):
        p = path_probability(pi, a, b, obs, path)
        total += p
        for k, s in enumerate(path):
            gamma[k, s - 1] += p
        for k in range(t_len - 1):
            xi[k, path[k] - 1, path[k + 1] - 1] += p
    return gamma / total, xi / total


def random_model(rng, n, m):
    """Random dense stochastic parameter triple (pi, a, b)."""
    pi = rng.random(n) + 0.05
    pi /= pi.sum()
    a = rng.random((n, n)) + 0.05
    a /= a.sum(axis=1, keepdims=True)
    b = rng.random((n, m)) + 0.05
    b /= b.sum(axis=1, keepdims=True)
    return pi, a, b

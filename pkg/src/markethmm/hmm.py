"""Discrete-observation hidden Markov models.

Scaled forward/backward recursions, Viterbi decoding, multi-sequence
Baum-Welch re-estimation, and ancestral sampling.  States and observation
symbols are 1-based throughout the public API; all functions are pure and
the parameter containers are immutable after construction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

ROW_SUM_TOL = 1e-9


class TrainingError(RuntimeError):
    """Numerical failure during parameter estimation."""


def _check_stochastic(name, mat, tol=ROW_SUM_TOL):
    if np.isnan(mat).any():
        raise ValueError(f"{name} contains NaN")
    if (mat < 0.0).any() or (mat > 1.0).any():
        raise ValueError(f"{name} has entries outside [0, 1]")
    sums = mat.sum(axis=-1)
    if not np.allclose(sums, 1.0, rtol=0.0, atol=tol):
        raise ValueError(f"rows of {name} must sum to 1 (got {sums})")


def _frozen(arr):
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class HmmParameters:
    """Parameter triple (initial, transition, emission) of a discrete HMM.

    initial: length-N probability vector over starting states.
    transition: N x N row-stochastic matrix.
    emission: N x M row-stochastic matrix over observation symbols.
    """

    initial: np.ndarray
    transition: np.ndarray
    emission: np.ndarray

    def __post_init__(self):
        pi = _frozen(self.initial)
        a = _frozen(self.transition)
        b = _frozen(self.emission)
        if pi.ndim != 1 or a.ndim != 2 or b.ndim != 2:
            raise ValueError("initial must be a vector, transition/emission matrices")
        n = pi.shape[0]
        if a.shape != (n, n):
            raise ValueError(f"transition must be {n}x{n}, got {a.shape}")
        if b.shape[0] != n or b.shape[1] < 1:
            raise ValueError(f"emission must have {n} rows, got {b.shape}")
        _check_stochastic("initial", pi)
        _check_stochastic("transition", a)
        _check_stochastic("emission", b)
        object.__setattr__(self, "initial", pi)
        object.__setattr__(self, "transition", a)
        object.__setattr__(self, "emission", b)

    @property
    def num_states(self) -> int:
        return self.initial.shape[0]

    @property
    def num_symbols(self) -> int:
        return self.emission.shape[1]


@dataclass(frozen=True)
class ForwardResult:
    """Scaled forward pass: per-step normalized alphas and their normalizers.

    scale_factors[t] is the unnormalized row sum at step t, so the sequence
    log-likelihood is the sum of their logs.  degenerate is set only when a
    row sum is exactly zero, i.e. the sequence has true probability 0.
    """

    scaled_alpha: np.ndarray
    scale_factors: np.ndarray
    log_likelihood: float
    degenerate: bool = False


@dataclass(frozen=True)
class PosteriorSet:
    """State posteriors gamma (T x N) and pair posteriors xi ((T-1) x N x N)."""

    gamma: np.ndarray
    xi: np.ndarray


@dataclass(frozen=True)
class BaumWelchConfig:
    max_iters: int = 500
    log_likelihood_rel_tol: float = 1e-6
    estimate_initial: bool = False


def _check_obs(model, obs):
    o = np.asarray(obs, dtype=np.int64)
    if o.ndim != 1 or o.shape[0] < 1:
        raise ValueError("observation sequence must be non-empty and 1-D")
    if (o < 1).any() or (o > model.num_symbols).any():
        raise ValueError(
            f"symbol indices must lie in [1, {model.num_symbols}]"
        )
    return o - 1  # 0-based for internal indexing


def chain_evolve(x, a, steps):
    """Evolve a state distribution `steps` times under transition matrix `a`."""
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if x.ndim != 1 or a.shape != (x.shape[0], x.shape[0]):
        raise ValueError(f"shape mismatch: x {x.shape} vs a {a.shape}")
    _check_stochastic("x", x)
    _check_stochastic("a", a)
    return x @ np.linalg.matrix_power(a, int(steps))


def forward(model: HmmParameters, obs) -> ForwardResult:
    """Scaled forward recursion; exp(log_likelihood) equals P(O | model)."""
    o = _check_obs(model, obs)
    t_len, n = o.shape[0], model.num_states
    alpha = np.zeros((t_len, n))
    scale = np.zeros(t_len)
    cur = model.initial * model.emission[:, o[0]]
    for t in range(t_len):
        if t > 0:
            cur = (alpha[t - 1] @ model.transition) * model.emission[:, o[t]]
        s = cur.sum()
        if s == 0.0:
            # exact zero: the sequence is impossible, not merely unlikely
            return ForwardResult(alpha, scale, -np.inf, degenerate=True)
        alpha[t] = cur / s
        scale[t] = s
    return ForwardResult(alpha, scale, float(np.log(scale).sum()))


def backward(model: HmmParameters, obs, scale_factors) -> np.ndarray:
    """Scaled backward recursion compatible with `forward`'s scaling.

    Returns beta[t] divided by the product of scale factors t+1..T, so that
    gamma = scaled_alpha * scaled_beta row-normalizes directly.
    """
    o = _check_obs(model, obs)
    scale = np.asarray(scale_factors, dtype=float)
    if scale.shape != o.shape:
        raise ValueError("scale_factors must match the observation length")
    if (scale <= 0.0).any():
        raise ValueError("degenerate forward pass: cannot run backward")
    t_len, n = o.shape[0], model.num_states
    beta = np.empty((t_len, n))
    beta[-1] = 1.0
    for t in range(t_len - 2, -1, -1):
        emitted = model.emission[:, o[t + 1]] * beta[t + 1]
        beta[t] = (model.transition @ emitted) / scale[t + 1]
    return beta


def posteriors(model: HmmParameters, obs, fwd: ForwardResult, bwd) -> PosteriorSet:
    """State and transition posteriors from matched forward/backward passes."""
    if fwd.degenerate:
        raise ValueError("cannot compute posteriors for a degenerate sequence")
    o = _check_obs(model, obs)
    alpha, scale = fwd.scaled_alpha, fwd.scale_factors
    beta = np.asarray(bwd, dtype=float)
    gamma = alpha * beta
    gamma /= gamma.sum(axis=1, keepdims=True)
    t_len, n = o.shape[0], model.num_states
    xi = np.empty((t_len - 1, n, n))
    for t in range(t_len - 1):
        emitted = model.emission[:, o[t + 1]] * beta[t + 1]
        xi[t] = alpha[t][:, None] * model.transition * emitted[None, :]
        xi[t] /= xi[t].sum()
    return PosteriorSet(gamma=gamma, xi=xi)


def viterbi(model: HmmParameters, obs):
    """Most probable state path and its joint log-probability.

    Ties are broken toward the lower state index at every backtrack step.
    If every path has probability zero, returns an empty path and -inf.
    """
    o = _check_obs(model, obs)
    t_len, n = o.shape[0], model.num_states
    with np.errstate(divide="ignore"):
        log_pi = np.log(model.initial)
        log_a = np.log(model.transition)
        log_b = np.log(model.emission)
    delta = np.empty((t_len, n))
    psi = np.zeros((t_len, n), dtype=np.int64)
    delta[0] = log_pi + log_b[:, o[0]]
    for t in range(1, t_len):
        cand = delta[t - 1][:, None] + log_a  # cand[i, j]: best into j via i
        psi[t] = np.argmax(cand, axis=0)
        delta[t] = log_b[:, o[t]] + cand[psi[t], np.arange(n)]
    last = int(np.argmax(delta[-1]))
    best = float(delta[-1, last])
    if best == -np.inf:
        return np.empty(0, dtype=np.int64), -np.inf
    path = np.empty(t_len, dtype=np.int64)
    path[-1] = last
    for t in range(t_len - 2, -1, -1):
        path[t] = psi[t + 1, path[t + 1]]
    return path + 1, best


def sample(model: HmmParameters, length, seed):
    """Ancestral sampling: (state sequence, symbol sequence), both 1-based."""
    if length < 1:
        raise ValueError("length must be >= 1")
    rng = np.random.default_rng(seed)
    n, m = model.num_states, model.num_symbols
    cum_pi = np.cumsum(model.initial)
    cum_a = np.cumsum(model.transition, axis=1)
    cum_b = np.cumsum(model.emission, axis=1)
    u_state = rng.random(length)
    u_sym = rng.random(length)
    states = np.empty(length, dtype=np.int64)
    states[0] = min(np.searchsorted(cum_pi, u_state[0], side="right"), n - 1)
    for t in range(1, length):
        row = cum_a[states[t - 1]]
        states[t] = min(np.searchsorted(row, u_state[t], side="right"), n - 1)
    symbols = np.empty(length, dtype=np.int64)
    for s in range(n):
        mask = states == s
        symbols[mask] = np.minimum(
            np.searchsorted(cum_b[s], u_sym[mask], side="right"), m - 1
        )
    return states + 1, symbols + 1


class _SuffStats:
    """Sufficient statistics pooled across sequences for one EM update."""

    def __init__(self, n, m):
        self.a_num = np.zeros((n, n))
        self.a_den = np.zeros(n)
        self.b_num_by_symbol = np.zeros((m, n))  # transposed for scatter-add
        self.b_den = np.zeros(n)
        self.pi_sum = np.zeros(n)
        self.n_seqs = 0
        self.log_likelihood = 0.0


def _accumulate_estep(batch, pi, a, b, stats):
    """Forward-backward over a batch of equal-length sequences (0-based)."""
    s_cnt, t_len = batch.shape
    n = pi.shape[0]
    emit = np.moveaxis(b[:, batch], 0, 2)  # (S, T, N)
    alpha = np.empty((t_len, s_cnt, n))
    scale = np.empty((t_len, s_cnt))
    cur = pi * emit[:, 0, :]
    for t in range(t_len):
        if t > 0:
            cur = (alpha[t - 1] @ a) * emit[:, t, :]
        s = cur.sum(axis=1)
        if (s == 0.0).any():
            raise TrainingError(
                "a training sequence became degenerate (probability exactly 0)"
            )
        alpha[t] = cur / s[:, None]
        scale[t] = s
    stats.log_likelihood += float(np.log(scale).sum())

    beta = np.empty((t_len, s_cnt, n))
    beta[-1] = 1.0
    for t in range(t_len - 2, -1, -1):
        beta[t] = ((emit[:, t + 1, :] * beta[t + 1]) @ a.T) / scale[t + 1][:, None]

    gamma = alpha * beta
    gamma /= gamma.sum(axis=2, keepdims=True)

    for t in range(t_len - 1):
        weighted = emit[:, t + 1, :] * beta[t + 1] / scale[t + 1][:, None]
        stats.a_num += np.einsum("si,ij,sj->ij", alpha[t], a, weighted)
    stats.a_den += gamma[:-1].sum(axis=(0, 1))
    np.add.at(stats.b_num_by_symbol, batch.T.ravel(), gamma.reshape(-1, n))
    stats.b_den += gamma.sum(axis=(0, 1))
    stats.pi_sum += gamma[0].sum(axis=0)
    stats.n_seqs += s_cnt


def _rows_from_counts(num, den, what):
    """num/den row-wise with unvisited-state rows reset to uniform."""
    n, m = num.shape
    out = np.empty_like(num)
    for i in range(n):
        if den[i] <= 0.0:
            warnings.warn(
                f"state {i + 1} never visited; resetting its {what} row to uniform"
            )
            out[i] = 1.0 / m
        else:
            row = num[i] / den[i]
            out[i] = row / row.sum()  # exact zeros stay exact zeros
    return out


def baum_welch(init: HmmParameters, sequences, config: BaumWelchConfig | None = None):
    """Multi-sequence Baum-Welch re-estimation.

    Numerators and denominators of the transition/emission updates are summed
    across sequences before dividing.  Returns the re-estimated parameters and
    the total log-likelihood trace, one entry per parameter set visited
    (trace[0] is the likelihood under `init`).
    """
    config = config or BaumWelchConfig()
    seqs = [_check_obs(init, s) for s in sequences]
    if not seqs:
        raise ValueError("at least one observation sequence is required")
    by_length = {}
    for s in seqs:
        by_length.setdefault(s.shape[0], []).append(s)
    batches = [np.stack(group) for group in by_length.values()]

    pi = init.initial.copy()
    a = init.transition.copy()
    b = init.emission.copy()
    n, m = init.num_states, init.num_symbols

    trace = []
    for iteration in range(config.max_iters):
        stats = _SuffStats(n, m)
        for batch in batches:
            _accumulate_estep(batch, pi, a, b, stats)
        trace.append(stats.log_likelihood)
        if iteration > 0:
            prev = trace[-2]
            improvement = stats.log_likelihood - prev
            if improvement < config.log_likelihood_rel_tol * max(abs(prev), 1e-12):
                break
        a = _rows_from_counts(stats.a_num, stats.a_den, "transition")
        b = _rows_from_counts(stats.b_num_by_symbol.T, stats.b_den, "emission")
        if config.estimate_initial:
            pi = stats.pi_sum / stats.n_seqs
            pi /= pi.sum()
    else:
        # loop exhausted: record the likelihood of the final parameter set
        final_ll = 0.0
        for batch in batches:
            tail = _SuffStats(n, m)
            _accumulate_estep(batch, pi, a, b, tail)
            final_ll += tail.log_likelihood
        trace.append(final_ll)

    model = HmmParameters(initial=pi, transition=a, emission=b)
    return model, np.asarray(trace)

"""Explicit series representation of finite predictor coefficients.

The finite predictor weights phi^m_{n,j} are assembled as a series
``sum_k g^m_k(n, j)`` whose terms come from iterating a Hankel kernel
``H[u, w] = beta_{offset+u+w}`` built on the cross-correlation
``beta_i = sum_v c_v a_{v+i}`` of the MA and AR expansions:

    delta_0(u, v) = [u == v]
    delta_k(., v) = H delta_{k-1}(., v)          (offset n+1)
    b_k^m(n, j)   = sum_{v<=m} c_{m-v} sum_u a_{j+u} delta_{k-1}(u, v)
    g_k^m(n, j)   = b_k^m(n, j)      for odd k
                    b_k^m(n, n+1-j)  for even k

Partial sums in k are the alternating-projection iterates (project onto the
span of the infinite past, then onto the past window, alternating), so the
per-term record doubles as a convergence diagnostic.

Two infinite sums are truncated: the inner index (cutoff V, the Hankel apply)
and the series depth (cutoff K, geometric decay under long memory).  The
inner truncation error of the summed series under long memory follows a
ladder of powers C_1 V^{-p} + C_2 V^{-2p} + ... with p = 1 - 2d (measured
against exact closed-form predictors over five V-doublings; the exponent
matches the autocovariance tail and is stable in n and d).  The default
tail strategy therefore evaluates the whole pipeline at a geometric ladder
of cutoffs V, 2V, ..., 2^{L-1} V and eliminates the leading L-1 powers by
solving the small Vandermonde system in V^{-p}; the reported residual is
the difference between the last two elimination orders.  The alternative
strategy runs one scale and reports a comparison bound built from the same
power law, without correcting the value.

Everything the FFT touches here is noise-free in the structurally-zero case:
a finitely supported beta stays exactly zero under rfft/irfft of zero blocks,
so short-memory models with exact support produce exact zeros for all k >= 2
and the ladder collapses to a single exact evaluation.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import signal
from scipy.fft import next_fast_len
from scipy.linalg import hankel as _hankel_matrix

from .coeffs import CoeffKind, CoeffSeq, expand_ar, expand_ma
from .errors import TruncationError
from .levinson import PredictorSource, PredictorTable
from .models import (Ar1, ExplicitModel, Farima, ProcessModel, Regime,
                     memory_exponent, regime)

__all__ = [
    "TailStrategy",
    "TruncationPolicy",
    "BetaSeq",
    "SeriesTerms",
    "DVectors",
    "DeltaBlock",
    "ExplicitPredictor",
    "beta_seq",
    "beta_for_model",
    "hankel_apply",
    "d_vectors",
    "delta_block",
    "finite_predictor_explicit",
    "finite_predictor_multistep",
    "projection_iterates",
]

#: default inner-sum truncation for the beta correlation under long memory
DEFAULT_BETA_INNER = 1 << 20

#: exact-support path is used when the AR expansion support is at most this
_EXACT_SUPPORT_MAX = 4096

#: hard ceiling on the resolved series depth
_K_CAP = 20000

#: floor for the effective per-term stopping tolerance inside the ladder
_STOP_FLOOR = 1e-14


class TailStrategy(str, enum.Enum):
    RICHARDSON_DOUBLE = "richardson-double"
    INTEGRAL_BOUND = "integral-bound"


@dataclass(frozen=True)
class TruncationPolicy:
    """Controls for the two truncation axes of the explicit series.

    V: base inner-index cutoff (None -> max(8192, 32 n)).  Under the default
    RichardsonDouble strategy the pipeline runs at the doubling ladder
    V, 2V, ..., 2^{levels-1} V and eliminates the leading truncation powers.
    K: maximum series depth (None -> from the geometric decay rate).
    tol_term: absolute stopping tolerance for the k-series.
    tail_strategy: RichardsonDouble (ladder elimination, default) or
    IntegralBound (single scale, bound reported, value uncorrected).
    tol_tail: cap on the estimated inner-truncation residual of the final
    coefficients; exceeded -> TruncationError.
    levels: ladder length (None -> by memory regime: 2 for short memory,
    3 to 5 for long memory depending on d).
    """

    V: int | None = None
    K: int | None = None
    tol_term: float = 1e-10
    tail_strategy: TailStrategy = TailStrategy.RICHARDSON_DOUBLE
    tol_tail: float = 1e-6
    levels: int | None = None

    def __post_init__(self):
        if self.V is not None and self.V < 1:
            raise ValueError(f"V must be >= 1, got {self.V}")
        if self.K is not None and self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if not self.tol_term > 0.0:
            raise ValueError(f"tol_term must be > 0, got {self.tol_term}")
        if self.levels is not None and self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        if not isinstance(self.tail_strategy, TailStrategy):
            object.__setattr__(self, "tail_strategy", TailStrategy(self.tail_strategy))

    def resolve_v(self, n: int, model: ProcessModel | None = None) -> int:
        if self.V is not None:
            return self.V
        # the truncation-error constant grows sharply as d -> 1/2
        if model is not None and regime(model) is Regime.LONG \
                and memory_exponent(model) >= 1.0 / 3.0:
            return max(16384, 64 * n)
        return max(8192, 32 * n)

    def resolve_levels(self, model: ProcessModel | None) -> int:
        if self.levels is not None:
            return self.levels
        if model is None or regime(model) is Regime.SHORT:
            return 2
        d = memory_exponent(model)
        if d < 0.1:
            return 3
        if d < 0.2:
            return 4
        if d < 1.0 / 3.0:
            return 5
        return 6

    def resolve_scales(self, model: ProcessModel | None, n: int) -> list[int]:
        """The doubling ladder of inner cutoffs the default strategy runs at."""
        base = self.resolve_v(n, model)
        if self.tail_strategy is TailStrategy.INTEGRAL_BOUND:
            return [base]
        return [base << i for i in range(self.resolve_levels(model))]

    def resolve_k(self, model: ProcessModel, tol: float | None = None) -> int:
        if self.K is not None:
            return self.K
        t = tol if tol is not None else self.tol_term
        d = memory_exponent(model)
        if d > 0.0:
            s = np.sin(np.pi * d)
            # geometric tail s^K s/(1-s) below t
            k = int(np.ceil(np.log(t * (1.0 - s) / s) / np.log(s))) + 8
        else:
            # short memory: geometric products decay at least as fast as the
            # expansions themselves; the stop rule does the real work
            k = 64
        return max(4, min(k, _K_CAP))


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True, eq=False)
class BetaSeq:
    """Correlation sequence beta_0..beta_L with its truncation residual bound.

    ``model`` tags the generating process (None when built from raw
    sequences without regime information); ``inner_len`` is the truncation
    of the defining inner sum; ``tail_estimate`` bounds the absolute error
    per entry after tail treatment; ``exact`` marks a finite-support
    correlation computed without truncation error.
    """

    values: np.ndarray
    model: ProcessModel | None = None
    inner_len: int | None = None
    tail_estimate: float = 0.0
    exact: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, idx):
        return self.values[idx]


@dataclass(frozen=True, eq=False)
class SeriesTerms:
    """Per-term diagnostics of the explicit series for one coefficient.

    ``terms[k-1]`` is g^m_k(n, j) evaluated at the finest inner cutoff;
    ``partial_sums`` are the cumulative sums, i.e. the alternating-projection
    iterates; ``tail_estimate`` bounds what inner truncation may still move
    the total after ladder elimination.
    """

    n: int
    j: int
    m: int
    terms: np.ndarray
    partial_sums: np.ndarray
    converged: bool
    tail_estimate: float

    @property
    def k_used(self) -> int:
        return len(self.terms)


@dataclass(frozen=True, eq=False)
class DVectors:
    """Iterated kernel vectors d_k(n, u) for k = 1..K_used, u = 0..V-1."""

    n: int
    vectors: np.ndarray  # shape (K_used, V)
    converged: bool
    tail_estimate: float

    @property
    def k_used(self) -> int:
        return len(self.vectors)

    def __len__(self) -> int:
        return len(self.vectors)

    def __getitem__(self, k_minus_1):
        return self.vectors[k_minus_1]


@dataclass(frozen=True, eq=False)
class DeltaBlock:
    """delta_k(n, u, v) for k = 1..K_used, u = 0..V-1, v = 0..v_max.

    ``values[k-1, u, v]``; the kernel symmetry makes the block symmetric in
    (u, v) wherever both index orders are stored.
    """

    n: int
    values: np.ndarray  # shape (K_used, V, v_max + 1)
    converged: bool
    tail_estimate: float

    @property
    def k_used(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class ExplicitPredictor:
    """Finite predictor table from the explicit series plus per-j diagnostics."""

    table: PredictorTable
    series: tuple[SeriesTerms, ...]


# ---------------------------------------------------------------------------
# beta

def _beta_tail_correction(d: float, idx: np.ndarray, k0: float) -> np.ndarray:
    """Integral comparison for the neglected tail sum_{v > M} c_v a_{v+i}.

    The summand is asymptotically (d sin(pi d)/pi) v^{d-1} (v+i)^{-1-d}
    (the normalization constants of c and a cancel), whose tail integral has
    the closed form (sin(pi d)/pi) (1 - (1 + i/k0)^{-d}) / i, with limit
    (d sin(pi d)/pi)/k0 at i = 0.  k0 sits at the midpoint M + 1/2.
    """
    s_over_pi = np.sin(np.pi * d) / np.pi
    out = np.empty(len(idx))
    pos = idx > 0
    ip = idx[pos]
    out[pos] = s_over_pi * (-np.expm1(-d * np.log1p(ip / k0))) / ip
    out[~pos] = s_over_pi * d / k0
    return out


def _exact_support(a_vals: np.ndarray) -> int | None:
    """Length of the exact support of a finitely supported sequence, or None."""
    nz = np.nonzero(a_vals)[0]
    if len(nz) == 0:
        return 1
    support = int(nz[-1]) + 1
    if support <= _EXACT_SUPPORT_MAX and support < len(a_vals):
        return support
    return None


def _beta_values(model: ProcessModel, L: int,
                 inner_len: int | None) -> tuple[np.ndarray, float, int, bool]:
    """(beta values 0..L, tail bound, inner length used, exact flag)."""
    long_memory = regime(model) is Regime.LONG
    if not long_memory:
        # probe for exact support of the AR expansion (probe longer than any
        # support the exact path accepts, so a hit cannot be a false positive)
        probe = expand_ar(model, _EXACT_SUPPORT_MAX + 1).values
        support = _exact_support(probe)
        if support is not None:
            c = expand_ma(model, support - 1).values
            a = probe
            out = np.zeros(L + 1)
            for i in range(min(L + 1, support)):
                out[i] = np.dot(c[:support - i], a[i:support])
            return out, 0.0, support - 1, True
        # summable but not exactly supported: truncate at the decay floor
        M = inner_len or (1 << 17)
        c = expand_ma(model, M).values
        a = expand_ar(model, M + L).values
        out = signal.fftconvolve(a, c[::-1], mode="valid")
        bound = float(np.sum(np.abs(c[-(M // 8):])) * np.max(np.abs(a)) * 4.0)
        return out, bound, M, False

    M = inner_len or DEFAULT_BETA_INNER
    d = model.d
    c = expand_ma(model, M).values
    a = expand_ar(model, M + L).values
    raw = signal.fftconvolve(a, c[::-1], mode="valid")
    k0 = M + 0.5
    idx = np.arange(L + 1, dtype=float)
    corr = _beta_tail_correction(d, idx, k0)
    # relative drift of the expansion from its pure power law at the cutoff,
    # measured by comparing the normalization at M and M/2
    lm = c[M] * M ** (1.0 - d)
    lh = c[M // 2] * (M // 2) ** (1.0 - d)
    drift = abs(lm - lh) / abs(lm)
    bound = float(np.max(corr) * (2.0 * drift + 8.0 / k0))
    return raw + corr, bound, M, False


@lru_cache(maxsize=6)
def _beta_cached(model: ProcessModel, L: int,
                 inner_len: int | None) -> tuple[np.ndarray, float, int, bool]:
    vals, bound, used, exact = _beta_values(model, L, inner_len)
    vals.setflags(write=False)
    return vals, bound, used, exact


def beta_for_model(model: ProcessModel, L: int, inner_len: int | None = None) -> BetaSeq:
    """Correlation sequence beta_0..beta_L for a model (cached per model).

    The cache is keyed on a power-of-two covering length so that experiment
    sweeps over many n share one computation.
    """
    bucket = 1 << max(8, int(L).bit_length())
    vals, bound, used, exact = _beta_cached(model, bucket, inner_len)
    return BetaSeq(vals[:L + 1], model=model, inner_len=used,
                   tail_estimate=bound, exact=exact)


def beta_seq(c: CoeffSeq, a: CoeffSeq, L: int,
             model: ProcessModel | None = None) -> BetaSeq:
    """Correlation beta_i = sum_v c_v a_{v+i} for i = 0..L from given expansions.

    Parameters
    ----------
    c, a : CoeffSeq
        Paired MA/AR expansions of one model, truncated long enough that the
        inner-sum tail at their length is below the caller's tolerance.
    L : int
        Largest index.
    model : ProcessModel, optional
        Regime tag.  For a long-memory model the analytic tail correction is
        applied (and the residual reported); otherwise the finite correlation
        of the given data is returned as-is with a decay-based bound.

    Raises
    ------
    TruncationError
        If the AR data is shorter than L (no way to form the sum).
    """
    cv = np.asarray(c.values if isinstance(c, CoeffSeq) else c, dtype=float)
    av = np.asarray(a.values if isinstance(a, CoeffSeq) else a, dtype=float)
    if len(av) < L + 1:
        raise TruncationError(
            f"AR expansion of length {len(av)} cannot reach beta index {L}")
    if model is not None and regime(model) is Regime.LONG:
        return beta_for_model(model, L)
    M = min(len(cv) - 1, len(av) - 1 - L)
    out = signal.fftconvolve(av[:M + L + 1], cv[:M + 1][::-1], mode="valid")
    bound = float(abs(cv[M]) * np.max(np.abs(av)) * 8.0) if M + 1 < len(cv) else 0.0
    return BetaSeq(out, model=model, tail_estimate=bound)


# ---------------------------------------------------------------------------
# Hankel kernel machinery

class _HankelFFT:
    """Fast application of x -> y, y_j = sum_{v<V} beta_{offset+j+v} x_v.

    The kernel matrix is constant along anti-diagonals, so the product is a
    correlation: precompute the rfft of the kernel band once and reuse it for
    every apply (the series iteration applies the same kernel K times).
    """

    def __init__(self, beta_vals: np.ndarray, offset: int, V: int,
                 a_vals: np.ndarray | None = None, n_out: int = 0):
        if len(beta_vals) < offset + 2 * V - 1:
            raise ValueError(
                f"beta too short: need index {offset + 2 * V - 2}, "
                f"have {len(beta_vals) - 1}")
        self.V = V
        self.n_out = n_out
        need = 3 * V - 2
        if a_vals is not None:
            need = max(need, n_out + 2 * V - 1)
        self.npts = next_fast_len(need, real=True)
        self.rb = np.fft.rfft(beta_vals[offset:offset + 2 * V - 1], self.npts)
        self.ra = None
        if a_vals is not None:
            # correlation against the AR sequence shares the forward transform
            self.ra = np.fft.rfft(a_vals[:n_out + V], self.npts)

    def forward(self, x: np.ndarray) -> np.ndarray:
        """rfft of the reversed input block(s); axis -1 is the V axis."""
        return np.fft.rfft(x[..., ::-1], self.npts, axis=-1)

    def apply_from(self, fx: np.ndarray) -> np.ndarray:
        """Kernel apply given a forward() transform."""
        out = np.fft.irfft(fx * self.rb, self.npts, axis=-1)
        return out[..., self.V - 1:2 * self.V - 1]

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.apply_from(self.forward(x))

    def a_correlate_from(self, fx: np.ndarray) -> np.ndarray:
        """t_j = sum_{u<V} a_{j+u} x_u for j = 1..n_out, given forward(x)."""
        out = np.fft.irfft(fx * self.ra, self.npts, axis=-1)
        return out[..., self.V:self.V + self.n_out]


def hankel_apply(beta: BetaSeq, n: int, x: np.ndarray, method: str = "fft") -> np.ndarray:
    """Apply the Hankel kernel: y_j = sum_{v=0}^{V-1} beta_{n+j+v} x_v, j = 0..V-1.

    Parameters
    ----------
    beta : BetaSeq
        Needs values up to index n + 2V - 2.
    n : int
        Kernel offset.
    x : array of length V
    method : {"fft", "direct"}
        O(V log V) correlation or the O(V^2) reference product; the two agree
        to 1e-12 relative.
    """
    vals = beta.values if isinstance(beta, BetaSeq) else np.asarray(beta, dtype=float)
    x = np.asarray(x, dtype=float)
    V = len(x)
    if len(vals) < n + 2 * V - 1:
        raise ValueError(f"beta too short: need index {n + 2 * V - 2}, have {len(vals) - 1}")
    if method == "direct":
        band = vals[n:n + 2 * V - 1]
        return _hankel_matrix(band[:V], band[V - 1:]) @ x
    if method != "fft":
        raise ValueError(f"unknown method {method!r}")
    return _HankelFFT(vals, n, V).apply(x)


# ---------------------------------------------------------------------------
# inner-truncation ladder

def _elimination_exponent(model: ProcessModel | None) -> float:
    """Leading power of the inner-truncation error, 1/V^p.

    Long memory: p = 1 - 2d (measured across models and scales; matches the
    autocovariance tail exponent).  Short memory and untagged data: the
    error decays at least as fast as 1/V.
    """
    if model is not None and regime(model) is Regime.LONG:
        return 1.0 - 2.0 * memory_exponent(model)
    return 1.0


def _ladder_weights(p: float, scales: list[int]) -> np.ndarray:
    """Elimination weights w with sum w_l S(V_l) free of V^{-p}, ..., V^{-(L-1)p}.

    Rows of the Vandermonde system are the powers x_l^t, x_l = V_l^{-p}; the
    weights are the first row of the inverse, so they reproduce constants
    exactly (sum w = 1) and annihilate each modeled power.
    """
    L = len(scales)
    if L == 1:
        return np.ones(1)
    A = np.empty((L, L))
    for i, V in enumerate(scales):
        x = float(V) ** (-p)
        A[i] = [x ** t for t in range(L)]
    e0 = np.zeros(L)
    e0[0] = 1.0
    return np.linalg.solve(A.T, e0)


def _stop_tol(policy: TruncationPolicy, weights: np.ndarray) -> float:
    """Per-term stopping tolerance tight enough that ladder weights cannot
    amplify the k-series stopping noise into the tail budget."""
    amp = float(np.sum(np.abs(weights)))
    return min(policy.tol_term, max(policy.tol_tail / (16.0 * amp), _STOP_FLOOR))


# ---------------------------------------------------------------------------
# d_k vectors and delta blocks

def _d_run(beta_vals: np.ndarray, n: int, V: int, K: int, tol_term: float,
           k_exact: int | None = None) -> tuple[np.ndarray, bool]:
    """Iterate d_1 = beta slice, d_{k+1} = H d_k at offset n.  Returns
    (stack of K_used vectors, stopped-by-tolerance flag)."""
    eng = _HankelFFT(beta_vals, n, V)
    d = beta_vals[n:n + V].copy()
    out = [d]
    target = k_exact if k_exact is not None else K
    stopped = k_exact is None and np.max(np.abs(d)) < tol_term
    k = 1
    while k < target and not stopped:
        d = eng.apply(d)
        out.append(d)
        k += 1
        if k_exact is None and np.max(np.abs(d)) < tol_term:
            stopped = True
    return np.array(out), stopped


def d_vectors(beta: BetaSeq, n: int, policy: TruncationPolicy = DEFAULT_POLICY,
              strict: bool = True) -> DVectors:
    """Iterated kernel vectors d_k(n, u), u = 0..V-1, k = 1..K_used.

    d_1 is the beta slice at offset n; each further vector is one Hankel
    apply.  Iteration stops when the sup-norm falls below tol_term or the
    depth budget K is reached.  Under the RichardsonDouble strategy the
    vectors are extrapolated from runs at V and 2V with the model's
    inner-truncation exponent.

    Raises
    ------
    TruncationError
        When strict and the budget K is exhausted above tol_term (suggests
        a larger K).
    """
    vals = beta.values if isinstance(beta, BetaSeq) else np.asarray(beta, dtype=float)
    model = beta.model if isinstance(beta, BetaSeq) else None
    V = policy.resolve_v(n, model)
    K = policy.resolve_k(model) if model is not None else (policy.K or 64)

    if policy.tail_strategy is TailStrategy.RICHARDSON_DOUBLE:
        scales = policy.resolve_scales(model, n)
        p = _elimination_exponent(model)
        weights = _ladder_weights(p, scales)
        fine, stopped = _d_run(vals, n, scales[-1], K, policy.tol_term)
        runs = []
        for W in scales[:-1]:
            r, _ = _d_run(vals, n, W, K, policy.tol_term, k_exact=len(fine))
            runs.append(r[:, :V])
        runs.append(fine[:, :V])
        stack = np.stack(runs)
        vecs = np.tensordot(weights, stack, axes=1)
        if len(scales) > 1:
            sub = np.tensordot(_ladder_weights(p, scales[1:]), stack[1:], axes=1)
            tail = float(np.max(np.abs(vecs - sub)))
        else:
            tail = 0.0
    else:
        vecs, stopped = _d_run(vals, n, V, K, policy.tol_term)
        # analytic single-scale bound: the neglected inner tail pairs the
        # ~1/(n+V) kernel decay against the computed partner magnitude
        tail = float(np.max(np.abs(vals[n + V:n + 2 * V - 1])) * np.max(np.abs(vecs)) * V
                     ) if len(vals) > n + V else 0.0
    if strict and not stopped and np.max(np.abs(vecs[-1])) >= policy.tol_term:
        raise TruncationError(
            f"d_k iteration did not reach tol_term = {policy.tol_term:g} within "
            f"K = {K} stages at n = {n}; increase K",
            achieved=float(np.max(np.abs(vecs[-1]))), required=policy.tol_term)
    return DVectors(n=n, vectors=vecs, converged=bool(stopped), tail_estimate=tail)


def _delta_run(beta_vals: np.ndarray, n: int, v_max: int, V: int, K: int,
               tol_term: float, k_exact: int | None = None) -> tuple[np.ndarray, bool]:
    """delta_k columns at offset n; cols[v] = delta_k(n, ., v)."""
    eng = _HankelFFT(beta_vals, n, V)
    cols = np.stack([beta_vals[n + v:n + v + V] for v in range(v_max + 1)])
    out = [cols]
    target = k_exact if k_exact is not None else K
    stopped = k_exact is None and np.max(np.abs(cols)) < tol_term
    k = 1
    while k < target and not stopped:
        cols = eng.apply(cols)
        out.append(cols)
        k += 1
        if k_exact is None and np.max(np.abs(cols)) < tol_term:
            stopped = True
    return np.array(out), stopped


def delta_block(beta: BetaSeq, n: int, v_max: int,
                policy: TruncationPolicy = DEFAULT_POLICY,
                strict: bool = False) -> DeltaBlock:
    """Iterated kernel block delta_k(n, u, v) for v = 0..v_max.

    delta_1(n, u, v) = beta_{n+u+v}; each stage applies the offset-n Hankel
    kernel to every column.  values[k-1, u, v]; v = 0 reproduces d_vectors.
    """
    if v_max < 0:
        raise ValueError(f"v_max must be >= 0, got {v_max}")
    vals = beta.values if isinstance(beta, BetaSeq) else np.asarray(beta, dtype=float)
    model = beta.model if isinstance(beta, BetaSeq) else None
    V = policy.resolve_v(n, model)
    K = policy.resolve_k(model) if model is not None else (policy.K or 64)

    if policy.tail_strategy is TailStrategy.RICHARDSON_DOUBLE:
        scales = policy.resolve_scales(model, n)
        p = _elimination_exponent(model)
        weights = _ladder_weights(p, scales)
        fine, stopped = _delta_run(vals, n, v_max, scales[-1], K, policy.tol_term)
        runs = []
        for W in scales[:-1]:
            r, _ = _delta_run(vals, n, v_max, W, K, policy.tol_term, k_exact=len(fine))
            runs.append(r[:, :, :V])
        runs.append(fine[:, :, :V])
        stack = np.stack(runs)
        block = np.tensordot(weights, stack, axes=1)
        if len(scales) > 1:
            sub = np.tensordot(_ladder_weights(p, scales[1:]), stack[1:], axes=1)
            tail = float(np.max(np.abs(block - sub)))
        else:
            tail = 0.0
    else:
        block, stopped = _delta_run(vals, n, v_max, V, K, policy.tol_term)
        tail = float(np.max(np.abs(vals[n + V:n + 2 * V - 1])) * np.max(np.abs(block)) * V
                     ) if len(vals) > n + V else 0.0
    if strict and not stopped:
        raise TruncationError(
            f"delta iteration did not converge within K = {K} at n = {n}; increase K")
    # (k, v, u) -> (k, u, v)
    return DeltaBlock(n=n, values=np.transpose(block, (0, 2, 1)),
                      converged=bool(stopped), tail_estimate=tail)


# ---------------------------------------------------------------------------
# predictor series engine

def _g_terms_run(beta_vals: np.ndarray, a_vals: np.ndarray, c_head: np.ndarray,
                 n: int, m: int, V: int, K: int, tol_term: float,
                 k_exact: int | None = None) -> tuple[np.ndarray, bool]:
    """One full series evaluation at inner cutoff V.

    Returns (terms matrix, rows k = 1..K_used, columns j = 1..n; stopped
    flag).  Stopping requires the geometric tail bound of the remaining
    series, |g_k| r/(1-r) with r the recent decay ratio, under tol_term on
    two consecutive stages, so a slowly contracting series is not cut while
    its remaining mass is still large.
    """
    if m >= V:
        raise ValueError(f"horizon m = {m} must be < V = {V}")
    c_rev = c_head[::-1]  # c_rev[v] = c_{m-v}

    # stage k = 1: the Wiener weights b_j^m = sum_v c_{m-v} a_{j+v}, exact
    win = np.stack([a_vals[1 + v:1 + v + n] for v in range(m + 1)])
    g1 = c_rev @ win if m > 0 else c_head[0] * a_vals[1:1 + n]
    terms = [g1]
    target = k_exact if k_exact is not None else K
    prev_max = float(np.max(np.abs(g1))) if n else 0.0
    ratios: list[float] = []
    consec = 1 if prev_max < tol_term else 0
    stopped = k_exact is None and consec >= 2
    if target >= 2 and not stopped:
        eng = _HankelFFT(beta_vals, n + 1, V, a_vals=a_vals, n_out=n)
        # delta_1(n+1, u, v) = beta_{n+1+u+v}: direct slices
        cols = np.stack([beta_vals[n + 1 + v:n + 1 + v + V] for v in range(m + 1)])
        for k in range(2, target + 1):
            fx = eng.forward(cols)
            bvec = c_rev @ eng.a_correlate_from(fx)
            gk = bvec if k % 2 == 1 else bvec[::-1]
            terms.append(gk)
            if k_exact is None:
                cur = float(np.max(np.abs(gk)))
                if prev_max > 0.0 and cur > 0.0:
                    ratios.append(min(cur / prev_max, 0.999))
                r = max(ratios[-3:], default=0.999)
                bound = cur * r / (1.0 - r)
                if cur < tol_term and bound < tol_term:
                    consec += 1
                    if consec >= 2:
                        stopped = True
                        prev_max = cur
                        break
                else:
                    consec = 0
                prev_max = cur
            if k < target:
                cols = eng.apply_from(fx)
    return np.array(terms), stopped


def _phi_from_terms(terms: np.ndarray) -> np.ndarray:
    """Sum the series with odd-k and even-k terms accumulated separately.

    The two subsequences live on different index geometries (j vs n+1-j);
    summing them apart avoids cancellation noise between the interleaves.
    """
    odd = terms[0::2].sum(axis=0)
    even = terms[1::2].sum(axis=0) if len(terms) > 1 else 0.0
    return odd + even


def _required_beta_len(n: int, V: int, m: int) -> int:
    return n + 1 + 2 * V + m + 2


def _prop35_warning(model: ProcessModel, n: int) -> None:
    """Short-memory contraction check: warn when (sum |c|)(sum_{k>n} |a|) >= 1."""
    c = expand_ma(model, 1 << 12).values
    a = expand_ar(model, (1 << 12) + n).values
    rho = float(np.sum(np.abs(c)) * np.sum(np.abs(a[n + 1:])))
    if rho >= 1.0:
        warnings.warn(
            f"short-memory contraction factor {rho:.3g} >= 1 at n = {n}; "
            f"series convergence not guaranteed", stacklevel=3)


def finite_predictor_multistep(model: ProcessModel, n: int, m: int,
                               policy: TruncationPolicy = DEFAULT_POLICY,
                               beta: BetaSeq | None = None) -> ExplicitPredictor:
    """Finite predictor coefficients phi^m_{n,j} from the explicit series.

    Parameters
    ----------
    model : ProcessModel
    n : int
        Number of past observations, n >= 1.
    m : int
        Prediction horizon (m = 0: one-step).
    policy : TruncationPolicy
    beta : BetaSeq, optional
        Precomputed correlation sequence (experiment sweeps share one); must
        cover the required index range or it is recomputed.

    Returns
    -------
    ExplicitPredictor
        ``table.coefficients[j-1]`` = phi^m_{n,j}; ``series[j-1]`` the
        per-term diagnostics for that j (terms from the finest inner cutoff;
        the table carries the ladder-eliminated coefficients).

    Raises
    ------
    TruncationError
        Inner-truncation residual above policy.tol_tail, or a diverging
        k-series.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    scales = policy.resolve_scales(model, n)
    c_head = expand_ma(model, m).values
    if regime(model) is Regime.SHORT:
        _prop35_warning(model, n)

    if beta is None or len(beta) < _required_beta_len(n, scales[-1], m):
        beta = beta_for_model(model, _required_beta_len(n, scales[-1], m))
    if beta.exact:
        # finite-support kernel: every stage is exact at any cutoff wide
        # enough; one scale, no elimination, nothing to estimate
        scales = scales[:1]
    p = _elimination_exponent(model)
    weights = _ladder_weights(p, scales)
    tol_stop = _stop_tol(policy, weights)
    K = policy.resolve_k(model, tol_stop)
    a_vals = expand_ar(model, n + scales[-1]).values

    runs = []
    for V in scales:
        t, s = _g_terms_run(beta.values, a_vals, c_head, n, m, V, K, tol_stop)
        runs.append((t, s, _phi_from_terms(t)))
    terms, stopped, _ = runs[-1]

    if len(scales) == 1:
        phi = runs[0][2]
        if beta.exact:
            tail_j = np.zeros(n)
        else:
            # single-scale comparison bound from the power law: the ladder of
            # remaining doublings sums to diff / (2^p - 1); measured with one
            # half-cutoff run, reported but not applied
            th, _ = _g_terms_run(beta.values, a_vals, c_head, n, m,
                                 max(scales[0] // 2, m + 1), K, tol_stop)
            phi_half = _phi_from_terms(th)
            tail_j = 1.5 * np.abs(phi - phi_half) / (2.0 ** p - 1.0)
    else:
        stack = np.stack([r[2] for r in runs])
        phi = weights @ stack
        sub = _ladder_weights(p, scales[1:]) @ stack[1:]
        tail_j = np.abs(phi - sub)
    tail_resid = float(np.max(tail_j)) + beta.tail_estimate * 4.0 if n else 0.0

    if tail_resid > policy.tol_tail:
        raise TruncationError(
            f"inner-truncation residual {tail_resid:.3e} exceeds tol_tail "
            f"{policy.tol_tail:g} at n = {n}; increase V or levels",
            achieved=tail_resid, required=policy.tol_tail)

    if not stopped:
        # empirically decaying series gets flagged, a non-decaying one raises
        tail_mag = np.max(np.abs(terms[-1])) + np.max(np.abs(terms[-2])) if len(terms) > 1 else 0.0
        head_mag = np.max(np.abs(terms[:2]))
        if len(terms) >= 6 and tail_mag > head_mag:
            raise TruncationError(
                f"k-series not decaying after K = {len(terms)} stages at n = {n}")

    table = PredictorTable(n=n, horizon=m, coefficients=phi,
                           source=PredictorSource.EXPLICIT_SERIES)
    cums = np.cumsum(terms, axis=0)
    series = []
    for j in range(1, n + 1):
        col = terms[:, j - 1]
        if len(col) >= 2:
            conv_j = bool(stopped and abs(col[-1]) < policy.tol_term
                          and abs(col[-2]) < policy.tol_term)
        else:
            conv_j = bool(stopped and abs(col[-1]) < policy.tol_term)
        series.append(SeriesTerms(n=n, j=j, m=m, terms=col,
                                  partial_sums=cums[:, j - 1],
                                  converged=conv_j,
                                  tail_estimate=float(tail_j[j - 1])))
    return ExplicitPredictor(table=table, series=tuple(series))


def finite_predictor_explicit(model: ProcessModel, n: int,
                              policy: TruncationPolicy = DEFAULT_POLICY,
                              beta: BetaSeq | None = None) -> ExplicitPredictor:
    """One-step finite predictor coefficients phi_{n,j}; the m = 0 case of
    finite_predictor_multistep (same code path)."""
    return finite_predictor_multistep(model, n, 0, policy, beta=beta)


def projection_iterates(model: ProcessModel, n: int, j: int, m: int = 0,
                        K: int = 32,
                        policy: TruncationPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Partial sums sum_{l<=k} g^m_l(n, j) for k = 1..K.

    The k-th entry is the coefficient of X_{-j} after k alternating
    projections (infinite past, then the window back to -n, alternating);
    the sequence converges to phi^m_{n,j}.
    """
    if not 1 <= j <= n:
        raise ValueError(f"need 1 <= j <= n, got j = {j}, n = {n}")
    forced = replace(policy, K=K, tol_term=1e-300)
    result = finite_predictor_multistep(model, n, m, forced)
    return result.series[j - 1].partial_sums

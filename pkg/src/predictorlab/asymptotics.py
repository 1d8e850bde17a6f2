"""Long-memory asymptotics experiments.

Three quantitative limits are reproduced at desk scale:

* the convergence rate ``n (phi_{n,j} - phi_j) -> d^2 sum_{u>=j} phi_u``,
* the Baxter-type ratio ``sum_j |phi_{n,j} - phi_j| / sum_{k>n} |phi_k|``
  staying bounded while both sides decay like ``n^{-d}``,
* the kernel scaling ``n d_k(n, u) -> f_k(0) sin^k(pi d)`` with the f_k(0)
  read off the Taylor series of ``arcsin(x)/pi`` and its square.

Every experiment computes the predictor both ways (explicit series and
Durbin-Levinson on the series autocovariance) and aborts if they disagree,
so an asymptotic "pass" can never be an artifact of one broken route.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .coeffs import autocov, expand_ar, expand_ma, infinite_predictor, tail_sum_phi
from .errors import OracleDisagreementError, RegimeError
from .explicit import (DEFAULT_POLICY, TruncationPolicy, _required_beta_len,
                       beta_for_model, d_vectors, finite_predictor_explicit)
from .levinson import durbin_levinson
from .models import Farima, ProcessModel, Regime, memory_exponent, regime

__all__ = [
    "RateReport",
    "BaxterReport",
    "DkScalingReport",
    "fk0",
    "f_u",
    "semigroup_integral",
    "richardson",
    "rate_experiment",
    "baxter_experiment",
    "dk_scaling_experiment",
]

#: max abs disagreement allowed between the two predictor routes (long memory)
CROSS_CHECK_TOL = 1e-6

#: length of the phi expansion used for tail sums inside experiments
_PHI_TAIL_LEN = 1 << 17


def fk0(K: int) -> np.ndarray:
    """Constants f_1(0)..f_K(0) of the iterated kernel integrals.

    Odd entries are the Taylor coefficients of ``arcsin(x)/pi`` and even
    entries those of its square (Cauchy square of the odd series):
    f_1(0) = 1/pi, f_2(0) = 1/pi^2, f_3(0) = 1/(6 pi), ...
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    n_odd = (K + 2) // 2
    # arcsin x = sum_m A_m x^{2m+1}, A_m = binom(2m, m) / (4^m (2m+1))
    central = np.empty(n_odd)
    central[0] = 1.0
    if n_odd > 1:
        mseq = np.arange(1, n_odd, dtype=float)
        np.cumprod((2.0 * mseq - 1.0) / (2.0 * mseq), out=central[1:])
    arc = central / (2.0 * np.arange(n_odd) + 1.0)
    even = np.convolve(arc, arc)  # coefficient of x^{2(m1+m2+1)}
    out = np.empty(K)
    for k in range(1, K + 1):
        if k % 2 == 1:
            out[k - 1] = arc[(k - 1) // 2] / np.pi
        else:
            out[k - 1] = even[k // 2 - 1] / np.pi ** 2
    return out


def f_u(k: int, u: float) -> float:
    """f_k evaluated away from the origin, for k <= 4.

    The limit functions iterate the symmetric kernel f_1(x + y):
    f_{k+1}(u) = int_0^inf f_1(u + s) f_k(s) ds.  f_1 and f_2 have closed
    forms; f_3 and f_4 apply the kernel by quadrature.
    """
    if k == 1:
        return 1.0 / (np.pi * (1.0 + u))
    if k == 2:
        if u == 0.0:
            return 1.0 / np.pi ** 2
        return np.log1p(u) / (np.pi ** 2 * u)
    if k == 3:
        val, _ = integrate.quad(lambda s: f_u(1, u + s) * f_u(2, s), 0.0, np.inf,
                                epsabs=1e-12, epsrel=1e-11, limit=200)
        return val
    if k == 4:
        val, _ = integrate.quad(lambda s: f_u(1, u + s) * f_u(3, s), 0.0, np.inf,
                                epsabs=1e-10, epsrel=1e-9, limit=200)
        return val
    raise ValueError(f"f_u implemented for k <= 4, got {k}")


def semigroup_integral(i: int, j: int) -> float:
    """Numerical ``int_0^inf f_i(u) f_j(u) du`` (should equal f_{i+j}(0))."""
    val, _ = integrate.quad(lambda u: f_u(i, u) * f_u(j, u), 0.0, np.inf,
                            epsabs=1e-9, epsrel=1e-8, limit=200)
    return val


def richardson(values, exponent: float, ratio: float = 2.0) -> float:
    """One Richardson step on the last pair of a sequence sampled at
    geometrically spaced resolutions: eliminates an error term ~ r^{-exponent}."""
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return float(values[-1])
    return float(values[-1] + (values[-1] - values[-2]) / (ratio ** exponent - 1.0))


@dataclass(frozen=True, eq=False)
class RateReport:
    """Convergence-rate experiment: entries (n, phi_nj, n(phi_nj - phi_j))."""

    j: int
    entries: tuple[tuple[int, float, float], ...]
    theoretical_limit: float
    extrapolated: float


@dataclass(frozen=True, eq=False)
class BaxterReport:
    """Baxter-ratio experiment: entries (n, lhs, rhs, ratio); sup over n."""

    entries: tuple[tuple[int, float, float, float], ...]
    sup_ratio: float


@dataclass(frozen=True, eq=False)
class DkScalingReport:
    """Kernel scaling experiment: entries (k, n, n*d_k(n,u), f_k(0) sin^k(pi d))."""

    u: int
    entries: tuple[tuple[int, int, float, float], ...]


def _max_workers(n_tasks: int) -> int:
    env = os.environ.get("PREDICTORLAB_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(n_tasks, cap, 8))


def _require_long_memory(model: ProcessModel, what: str) -> float:
    if regime(model) is not Regime.LONG:
        raise RegimeError(f"{what} requires a long-memory model, got {model!r}")
    return memory_exponent(model)


def _explicit_phi_checked(model: ProcessModel, n: int,
                          policy: TruncationPolicy, beta=None) -> np.ndarray:
    """Explicit-series phi_{n,.} cross-checked against Durbin-Levinson.

    The tolerance widens with the series' own residual estimate so a run
    under a deliberately relaxed policy is compared at the accuracy it was
    asked for, not at the default.
    """
    res = finite_predictor_explicit(model, n, policy, beta=beta)
    phi = res.table.coefficients
    resid = max(s.tail_estimate for s in res.series)
    tol = max(CROSS_CHECK_TOL, 8.0 * resid)
    gamma = autocov(model, n)
    phi_lev = durbin_levinson(gamma, n)[-1].coefficients
    diff = float(np.max(np.abs(phi - phi_lev)))
    if diff > tol:
        raise OracleDisagreementError(
            f"explicit series and Levinson disagree at n = {n}: "
            f"max diff {diff:.3e} > {tol:g}",
            max_diff=diff, tol=tol)
    return phi


def _run_ordered(fn, args_list, n_tasks_hint=None):
    """Map fn over args concurrently, returning results in input order."""
    workers = _max_workers(n_tasks_hint or len(args_list))
    if workers <= 1 or len(args_list) <= 1:
        return [fn(a) for a in args_list]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args_list))


def rate_experiment(model: ProcessModel, j: int, n_list,
                    policy: TruncationPolicy = DEFAULT_POLICY) -> RateReport:
    """Measure n (phi_{n,j} - phi_j) along n_list and compare with the limit
    d^2 sum_{u>=j} phi_u.

    The limit is approached with a finite-n correction ~ n^{-d}, so the
    report also carries a Richardson extrapolation (exponent 1) of the last
    doubling pair.

    Raises RegimeError for short-memory models (the limit statement needs
    long memory) and OracleDisagreementError if the two predictor routes
    disagree.
    """
    d = _require_long_memory(model, "rate experiment")
    if j < 1:
        raise ValueError(f"j must be >= 1, got {j}")
    n_list = sorted(int(n) for n in n_list)
    if j > n_list[0]:
        raise ValueError(f"j = {j} exceeds smallest n = {n_list[0]}")
    c = expand_ma(model, 0)
    a = expand_ar(model, _PHI_TAIL_LEN)
    phi_inf = infinite_predictor(c, a, _PHI_TAIL_LEN)
    phi_j = float(phi_inf[j - 1])

    # one beta computation shared by the whole sweep
    vtop = max(policy.resolve_scales(model, n)[-1] for n in n_list)
    beta = beta_for_model(model, _required_beta_len(max(n_list), vtop, 0))

    phis = _run_ordered(lambda n: _explicit_phi_checked(model, n, policy, beta), n_list)
    entries = []
    for n, phi in zip(n_list, phis):
        phi_nj = float(phi[j - 1])
        entries.append((n, phi_nj, n * (phi_nj - phi_j)))
    limit = d * d * tail_sum_phi(phi_inf, j - 1, d)
    # the gap n (phi_{n,j} - phi_j) - limit closes like 1/n (successive
    # differences halve per doubling of n, measured), so extrapolate at
    # exponent 1
    extrap = richardson([e[2] for e in entries], exponent=1.0)
    return RateReport(j=j, entries=tuple(entries), theoretical_limit=float(limit),
                      extrapolated=extrap)


def baxter_experiment(model: ProcessModel, n_list,
                      policy: TruncationPolicy = DEFAULT_POLICY) -> BaxterReport:
    """Measure the Baxter ratio sum_j |phi_{n,j} - phi_j| / sum_{k>n} |phi_k|.

    Both sides decay like n^{-d}; the ratio stays bounded (the empirical
    sup over n_list stands in for the inequality's constant).
    """
    d = _require_long_memory(model, "Baxter experiment")
    n_list = sorted(int(n) for n in n_list)
    c = expand_ma(model, 0)
    a = expand_ar(model, _PHI_TAIL_LEN)
    phi_inf = infinite_predictor(c, a, _PHI_TAIL_LEN)

    vtop = max(policy.resolve_scales(model, n)[-1] for n in n_list)
    beta = beta_for_model(model, _required_beta_len(max(n_list), vtop, 0))

    phis = _run_ordered(lambda n: _explicit_phi_checked(model, n, policy, beta), n_list)
    entries = []
    for n, phi in zip(n_list, phis):
        lhs = float(np.sum(np.abs(phi - phi_inf[:n])))
        rhs = tail_sum_phi(phi_inf, n, d)
        entries.append((n, lhs, rhs, lhs / rhs))
    sup_ratio = max(e[3] for e in entries)
    return BaxterReport(entries=tuple(entries), sup_ratio=float(sup_ratio))


def dk_scaling_experiment(model: ProcessModel, k_list, u: int, n_list,
                          policy: TruncationPolicy = DEFAULT_POLICY) -> DkScalingReport:
    """Tabulate n d_k(n, u) against the limit f_k(0) sin^k(pi d)."""
    d = _require_long_memory(model, "d_k scaling experiment")
    if u < 0:
        raise ValueError(f"u must be >= 0, got {u}")
    k_list = sorted(int(k) for k in k_list)
    if k_list[0] < 1:
        raise ValueError(f"k must be >= 1, got {k_list[0]}")
    n_list = sorted(int(n) for n in n_list)
    kmax = k_list[-1]
    s = np.sin(np.pi * d)
    targets = {k: float(f * s ** k) for k, f in zip(range(1, kmax + 1), fk0(kmax))}

    depth_policy = TruncationPolicy(V=policy.V, K=kmax, tol_term=policy.tol_term,
                                    tail_strategy=policy.tail_strategy,
                                    tol_tail=policy.tol_tail, levels=policy.levels)
    lmax = max(n + 2 * policy.resolve_scales(model, n)[-1] for n in n_list)
    beta = beta_for_model(model, lmax)

    def one(n: int):
        if u >= policy.resolve_v(n, model):
            raise ValueError(
                f"u = {u} outside inner cutoff V = {policy.resolve_v(n, model)}")
        dv = d_vectors(beta, n, depth_policy, strict=False)
        return [(k, n, float(n * dv.vectors[k - 1][u]), targets[k])
                for k in k_list if k <= dv.k_used]

    rows_per_n = _run_ordered(one, n_list)
    entries = []
    for k in k_list:
        for rows in rows_per_n:
            entries.extend(r for r in rows if r[0] == k)
    return DkScalingReport(u=u, entries=tuple(entries))

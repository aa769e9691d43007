"""Tree-structured Parzen estimator proposals for a single parameter."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .space import ParamSpec, _freeze

BANDWIDTH_FLOOR = 1e-3  # fraction of the parameter range


@dataclass(frozen=True)
class SamplerConfig:
    n_startup: int = 10
    gamma_fraction: float = 0.25
    n_ei_candidates: int = 24

    def __post_init__(self):
        if self.n_startup < 0 or self.n_ei_candidates < 1:
            raise ValueError("n_startup >= 0 and n_ei_candidates >= 1 required")
        if not 0.0 < self.gamma_fraction <= 1.0:
            raise ValueError("gamma_fraction must lie in (0, 1]")


def split_observations(good_pool, bad_pool, gamma: float, maximize: bool):
    """Partition observations into (good, bad) parameter values.

    ``good_pool`` holds ``(value, objective, trial_id)`` for complete trials;
    ``bad_pool`` holds values from pruned trials, which are always bad. The
    best ``ceil(gamma * n)`` complete observations are good, with ``n``
    counting both pools.
    """
    n_total = len(good_pool) + len(bad_pool)
    n_good = min(math.ceil(gamma * n_total), len(good_pool))
    sign = -1.0 if maximize else 1.0
    ranked = sorted(good_pool, key=lambda o: (sign * o[1], o[2]))
    good = [o[0] for o in ranked[:n_good]]
    bad = [o[0] for o in ranked[n_good:]] + list(bad_pool)
    return good, bad


def scott_bandwidth(centers: np.ndarray, lo: float, hi: float) -> float:
    floor = max(BANDWIDTH_FLOOR, 1.0 / min(100, 1 + centers.size)) * (hi - lo)
    if centers.size < 2:
        return floor
    return max(float(np.std(centers)) * centers.size ** (-1.0 / 5.0), floor)


def parzen_logpdf(x: np.ndarray, centers: np.ndarray, h: float, prior=None) -> np.ndarray:
    """Log density of an equal-weight Gaussian mixture at ``x``.

    ``prior=(mu, sigma)`` adds one wide component with the same weight as a
    data kernel.
    """
    mus = centers
    sigmas = np.full(centers.size, h)
    if prior is not None:
        mus = np.append(mus, prior[0])
        sigmas = np.append(sigmas, prior[1])
    z = (x[:, None] - mus[None, :]) / sigmas[None, :]
    comp = -0.5 * z * z - np.log(sigmas * math.sqrt(2 * math.pi))[None, :]
    return logsumexp(comp, axis=1) - math.log(mus.size)


def _propose_numeric(spec: ParamSpec, good, bad, n_cand: int, rng):
    lo, hi = spec.internal_bounds()
    prior = (0.5 * (lo + hi), hi - lo)
    if not good:
        return spec.sample_uniform(rng)
    g_c = np.array([spec.to_internal(v) for v in good])
    h_l = scott_bandwidth(g_c, lo, hi)
    # draw from the good mixture, prior component included
    pick = rng.integers(0, g_c.size + 1, size=n_cand)
    mus = np.append(g_c, prior[0])[pick]
    sig = np.where(pick == g_c.size, prior[1], h_l)
    cand = np.clip(mus + sig * rng.standard_normal(n_cand), lo, hi)
    log_l = parzen_logpdf(cand, g_c, h_l, prior)
    if bad:
        b_c = np.array([spec.to_internal(v) for v in bad])
        log_g = parzen_logpdf(cand, b_c, scott_bandwidth(b_c, lo, hi), prior)
    else:
        log_g = np.full(n_cand, -math.log(hi - lo))
    # best ratio, then highest l(x) among exact ties
    best = np.lexsort((-log_l, -(log_l - log_g)))[0]
    return spec.from_internal(float(cand[best]))


def _propose_categorical(spec: ParamSpec, good, bad, n_cand: int, rng):
    if not good:
        return spec.sample_uniform(rng)
    index = {c: i for i, c in enumerate(spec.choices)}

    def weights(values):
        w = np.ones(len(spec.choices))
        for v in values:
            w[index[_freeze(v)]] += 1.0
        return w / w.sum()

    w_l, w_g = weights(good), weights(bad)
    cand = rng.choice(len(spec.choices), size=n_cand, p=w_l)
    score = np.log(w_l[cand]) - np.log(w_g[cand])
    return spec.choices[int(cand[int(np.argmax(score))])]


def tpe_propose(spec: ParamSpec, good, bad, n_ei_candidates: int, rng):
    """Propose a value maximising l(x)/g(x) for one parameter.

    ``good`` and ``bad`` are lists of previously observed parameter values.
    """
    if spec.kind == "categorical":
        return _propose_categorical(spec, good, bad, n_ei_candidates, rng)
    return _propose_numeric(spec, good, bad, n_ei_candidates, rng)

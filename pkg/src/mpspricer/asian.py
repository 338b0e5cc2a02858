"""Arithmetic-average (Asian) option pricing on the full binomial path space.

A path is a bit string x in {0,1}^N; the option pays on the arithmetic
mean of the N post-step prices. The discounted expectation runs over all
2^N paths, which brute force enumerates directly and the tensor methods
compress.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .binomial import (
    RIGHTS,
    SCHEMES,
    SchemeParams,
    make_scheme_params,
    path_prices,
    path_probability,
)
from .reports import PriceReport
from .ttcross import CrossConfig, GridFunction, ttcross_approximate

BRUTEFORCE_MAX_STEPS = 25
_ENUM_CHUNK = 1 << 16
_MC_CHUNK = 1 << 17


@dataclass(frozen=True)
class AsianSpec:
    """Arithmetic Asian option on a binomial path space."""

    spot: float
    strike: float
    rate: float
    vol: float
    expiry: float
    steps: int
    scheme: str = "crr"
    right: str = "call"

    def __post_init__(self):
        if self.spot <= 0:
            raise ValueError(f"spot must be positive, got {self.spot}")
        if self.strike <= 0:
            raise ValueError(f"strike must be positive, got {self.strike}")
        if self.expiry <= 0:
            raise ValueError(f"expiry must be positive, got {self.expiry}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.right not in RIGHTS:
            raise ValueError(f"right must be one of {RIGHTS}, got {self.right!r}")

    @property
    def dt(self) -> float:
        return self.expiry / self.steps

    def params(self) -> SchemeParams:
        return make_scheme_params(self.scheme, self.rate, self.vol, self.dt)


def asian_path_payoff(spec: AsianSpec, bits: np.ndarray) -> np.ndarray:
    """Undiscounted payoff of each path: the mean-price payoff at expiry."""
    means = path_prices(spec.spot, spec.params(), bits).mean(axis=-1)
    if spec.right == "call":
        return np.maximum(means - spec.strike, 0.0)
    return np.maximum(spec.strike - means, 0.0)


def asian_linear_payoff(spec: AsianSpec, bits: np.ndarray) -> np.ndarray:
    """Payoff with the floor at zero dropped (mean - K, sign-flipped for puts)."""
    means = path_prices(spec.spot, spec.params(), bits).mean(axis=-1)
    signed = means - spec.strike
    return signed if spec.right == "call" else -signed


def asian_integrand(spec: AsianSpec) -> GridFunction:
    """Probability-weighted payoff p(x) * v(x) as a grid function on {0,1}^N."""
    params = spec.params()

    def evaluate(bits: np.ndarray) -> np.ndarray:
        return path_probability(params, bits) * asian_path_payoff(spec, bits)

    return GridFunction(dims=(2,) * spec.steps, evaluate=evaluate)


def asian_linear_integrand(spec: AsianSpec) -> GridFunction:
    """p(x) times the unfloored payoff; exactly bond dimension 2 as an MPS."""
    params = spec.params()

    def evaluate(bits: np.ndarray) -> np.ndarray:
        return path_probability(params, bits) * asian_linear_payoff(spec, bits)

    return GridFunction(dims=(2,) * spec.steps, evaluate=evaluate)


def _enumerate_bits(n: int, start: int, stop: int) -> np.ndarray:
    """Bit rows for path ids start..stop-1; bit i is the step-i move."""
    ids = np.arange(start, stop, dtype=np.uint64)
    shifts = np.arange(n, dtype=np.uint64)
    return ((ids[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)


def price_asian_bruteforce(
    spec: AsianSpec, max_steps: int = BRUTEFORCE_MAX_STEPS
) -> PriceReport:
    """Exact price by summing all 2^N paths; refuses above ``max_steps``."""
    n = spec.steps
    if n > max_steps:
        raise ValueError(
            f"brute force over 2^{n} = {1 << n} paths exceeds the "
            f"2^{max_steps} cap; use a tensor method or Monte Carlo"
        )
    params = spec.params()
    start_time = time.perf_counter()
    total = 1 << n
    acc = 0.0
    for start in range(0, total, _ENUM_CHUNK):
        bits = _enumerate_bits(n, start, min(start + _ENUM_CHUNK, total))
        acc += float(
            np.dot(path_probability(params, bits), asian_path_payoff(spec, bits))
        )
    price = math.exp(-spec.rate * spec.expiry) * acc
    return PriceReport(
        price=price,
        method="bruteforce",
        wall_time_s=time.perf_counter() - start_time,
        diagnostics={"n_paths": total},
    )


def price_asian_ttcross(
    spec: AsianSpec,
    bond_dim: int,
    seed: int = 0,
    n_sweeps: int = 8,
    tol: float = 1e-10,
) -> PriceReport:
    """Cross-approximate p(x)*v(x), then sum the MPS over all paths."""
    cfg = CrossConfig(max_bond=bond_dim, n_sweeps=n_sweeps, tol=tol, seed=seed)
    start_time = time.perf_counter()
    result = ttcross_approximate(asian_integrand(spec), cfg)
    price = math.exp(-spec.rate * spec.expiry) * result.mps.sum_all()
    return PriceReport(
        price=price,
        method="ttcross",
        seed=seed,
        bond_dim=bond_dim,
        n_sweeps=result.n_sweeps_run,
        wall_time_s=time.perf_counter() - start_time,
        warnings=list(result.warnings),
        diagnostics={
            "n_evals": result.n_evals,
            "converged": result.converged,
            "max_bond_used": result.mps.max_bond,
        },
        mps=result.mps,
    )


def price_asian_montecarlo(
    spec: AsianSpec, n_samples: int, seed: int = 0
) -> PriceReport:
    """Plain Monte Carlo over i.i.d. Bernoulli(p_up) step indicators."""
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    params = spec.params()
    rng = np.random.default_rng(seed)
    disc = math.exp(-spec.rate * spec.expiry)
    start_time = time.perf_counter()
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_samples:
        count = min(_MC_CHUNK, n_samples - done)
        bits = rng.random((count, spec.steps)) < params.p_up
        vals = disc * asian_path_payoff(spec, bits)
        total += float(vals.sum())
        total_sq += float(np.dot(vals, vals))
        done += count
    mean = total / n_samples
    var = max(total_sq - n_samples * mean * mean, 0.0) / (n_samples - 1)
    return PriceReport(
        price=mean,
        method="montecarlo",
        seed=seed,
        n_samples=n_samples,
        wall_time_s=time.perf_counter() - start_time,
        std_error=math.sqrt(var / n_samples),
    )

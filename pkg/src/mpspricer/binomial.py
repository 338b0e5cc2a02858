"""Binomial lattice parameterizations and the reference tree pricer.

Two single-asset schemes are supported. Cox-Ross-Rubinstein matches the
volatility through the up/down factors and carries the drift in the up
probability; Rendleman-Bartter fixes the up probability at one half and
carries the drift in the factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SCHEMES = ("crr", "rb")
RIGHTS = ("call", "put")
STYLES = ("european", "american")


@dataclass(frozen=True)
class SchemeParams:
    """One-step move factors and up probability of a binomial scheme."""

    up: float
    down: float
    p_up: float
    dt: float
    scheme: str


def crr_params(rate: float, vol: float, dt: float) -> SchemeParams:
    """Cox-Ross-Rubinstein factors: u = exp(vol*sqrt(dt)), d = 1/u.

    Requires vol > 0 (u = d degenerates the tree) and an up probability
    inside [0, 1], i.e. |rate| small enough for the step size.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if vol <= 0:
        raise ValueError("CRR scheme is degenerate at vol <= 0")
    up = math.exp(vol * math.sqrt(dt))
    down = 1.0 / up
    p_up = (math.exp(rate * dt) - down) / (up - down)
    if not 0.0 <= p_up <= 1.0:
        raise ValueError(
            f"CRR up probability {p_up:.6f} outside [0, 1]; "
            "reduce the step size or the rate/vol imbalance"
        )
    return SchemeParams(up=up, down=down, p_up=p_up, dt=dt, scheme="crr")


def rb_params(rate: float, vol: float, dt: float) -> SchemeParams:
    """Rendleman-Bartter factors at p_up = 1/2.

    u = exp((rate - vol^2/2) dt + vol sqrt(dt)), d with the minus sign.
    vol = 0 is allowed and collapses both factors to exp(rate*dt).
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if vol < 0:
        raise ValueError(f"vol must be non-negative, got {vol}")
    drift = (rate - 0.5 * vol * vol) * dt
    spread = vol * math.sqrt(dt)
    return SchemeParams(
        up=math.exp(drift + spread),
        down=math.exp(drift - spread),
        p_up=0.5,
        dt=dt,
        scheme="rb",
    )


def make_scheme_params(scheme: str, rate: float, vol: float, dt: float) -> SchemeParams:
    if scheme == "crr":
        return crr_params(rate, vol, dt)
    if scheme == "rb":
        return rb_params(rate, vol, dt)
    raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")


@dataclass(frozen=True)
class SingleAssetSpec:
    """Contract and model inputs for one underlying on a binomial lattice."""

    spot: float
    strike: float
    rate: float
    vol: float
    expiry: float
    steps: int
    right: str = "call"
    style: str = "european"
    scheme: str = "crr"

    def __post_init__(self):
        if self.spot <= 0:
            raise ValueError(f"spot must be positive, got {self.spot}")
        if self.strike <= 0:
            raise ValueError(f"strike must be positive, got {self.strike}")
        if self.expiry <= 0:
            raise ValueError(f"expiry must be positive, got {self.expiry}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.right not in RIGHTS:
            raise ValueError(f"right must be one of {RIGHTS}, got {self.right!r}")
        if self.style not in STYLES:
            raise ValueError(f"style must be one of {STYLES}, got {self.style!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")

    @property
    def dt(self) -> float:
        return self.expiry / self.steps

    def params(self) -> SchemeParams:
        return make_scheme_params(self.scheme, self.rate, self.vol, self.dt)


def exercise_value(prices: np.ndarray, strike: float, right: str) -> np.ndarray:
    if right == "call":
        return np.maximum(prices - strike, 0.0)
    if right == "put":
        return np.maximum(strike - prices, 0.0)
    raise ValueError(f"right must be one of {RIGHTS}, got {right!r}")


def path_prices(spot: float, params: SchemeParams, bits: np.ndarray) -> np.ndarray:
    """Running asset prices along explicit up/down paths.

    ``bits`` is a (B, N) array of 0/1 step indicators; entry (b, i) of the
    result is the price after step i+1 of path b.
    """
    b = np.asarray(bits)
    factors = np.where(b != 0, params.up, params.down)
    return spot * np.cumprod(factors, axis=-1)


def path_probability(params: SchemeParams, bits: np.ndarray) -> np.ndarray:
    """Probability of each explicit path: p_up^(#ups) * (1-p_up)^(#downs)."""
    b = np.asarray(bits)
    ups = (b != 0).sum(axis=-1)
    n = b.shape[-1]
    return params.p_up**ups * (1.0 - params.p_up) ** (n - ups)


def tree_price(spec: SingleAssetSpec) -> float:
    """Backward induction on the recombining tree.

    Terminal payoffs roll back one step at a time under the risk-neutral
    probability; American style takes the max against immediate exercise
    at every node, including the root.
    """
    params = spec.params()
    n = spec.steps
    disc = math.exp(-spec.rate * params.dt)
    j = np.arange(n + 1)
    prices = spec.spot * params.up**j * params.down ** (n - j)
    values = exercise_value(prices, spec.strike, spec.right)
    for i in range(n - 1, -1, -1):
        values = disc * (
            params.p_up * values[1:] + (1.0 - params.p_up) * values[:-1]
        )
        if spec.style == "american":
            j = np.arange(i + 1)
            prices = spec.spot * params.up**j * params.down ** (i - j)
            values = np.maximum(values, exercise_value(prices, spec.strike, spec.right))
    return float(values[0])

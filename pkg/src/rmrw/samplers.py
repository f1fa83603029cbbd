"""Reflected Metropolis random walk (RMRW) and the plain-MRW baseline.

One RMRW step from theta:
    1. perturb:  Y = theta + sqrt(eta) * N(0, I)
    2. reflect:  Z = Y or -Y with probability 1/2 each
    3. accept Z with probability min(1, exp(U(theta) - U(Z))), else stay.

No Hastings correction is needed: the effective proposal density
q(y | x) = 0.5 phi(y; x, eta I) + 0.5 phi(y; -x, eta I) satisfies
q(y | x) = q(x | y) (the first term is symmetric under swapping x and y on
sight, and the second equals 0.5 phi(x; -y, eta I) because phi depends only
on |y + x|), so the plain density ratio is the exact Metropolis ratio.  The
MRW baseline skips step 2 and uses the ordinary symmetric Gaussian proposal.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .potential import PowerPosterior
from .quadrature import logcosh
from .rng import stream

__all__ = [
    "SamplerConfig",
    "ChainTrace",
    "MultiChainResult",
    "default_step_size",
    "rmrw_step",
    "mrw_step",
    "run_chain",
    "run_multichain",
    "proposal_log_density",
    "save_trace",
    "load_trace",
]


def default_step_size(d: int, theta0_norm: float, beta: float, s: float) -> float:
    """Theory-shaped step size eta_s = 1 / (400 (A + M + sqrt(d))^2).

    A = M = 1 + |theta0| + sqrt(d + log(1/s)) / beta, with the unknown
    universal constant set to 1.  Decreasing in d and in |theta0|; very
    conservative at experiment scale, so the CLI exposes an override.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if not np.isfinite(theta0_norm) or not np.isfinite(beta) or beta <= 0:
        raise ValueError("theta0_norm and beta must be finite, beta positive")
    A = 1.0 + theta0_norm + np.sqrt(d + np.log(1.0 / s)) / beta
    return float(1.0 / (400.0 * (2.0 * A + np.sqrt(d)) ** 2))


@dataclass(frozen=True)
class SamplerConfig:
    """Step size, horizon, seed, algorithm, and initialisation of one chain."""

    eta: float
    steps: int
    seed: int
    algorithm: str = "rmrw"
    init: np.ndarray | None = None  # None = standard Gaussian draw

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.algorithm not in ("rmrw", "mrw"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.init is not None:
            init = np.asarray(self.init, dtype=float)
            object.__setattr__(self, "init", init)

    def with_seed(self, seed: int) -> "SamplerConfig":
        return SamplerConfig(eta=self.eta, steps=self.steps, seed=seed, algorithm=self.algorithm, init=self.init)


@dataclass
class ChainTrace:
    """States (T+1, d) plus per-step acceptance / reflection flags."""

    states: np.ndarray
    accepted: np.ndarray
    reflected: np.ndarray
    config: SamplerConfig | None = None

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.accepted))

    @property
    def steps(self) -> int:
        return len(self.accepted)

    def validate(self) -> None:
        """Check the trace invariants; raises AssertionError on violation."""
        stays = ~self.accepted
        if stays.any():
            prev = self.states[:-1][stays]
            cur = self.states[1:][stays]
            assert np.array_equal(prev, cur), "rejected step changed the state"
        moved = np.any(self.states[1:] != self.states[:-1], axis=1)
        assert not np.any(moved & ~self.accepted), "state moved without acceptance"
        assert np.all(np.isfinite(self.states)), "non-finite state in trace"


@dataclass
class MultiChainResult:
    traces: list
    acceptance_rates: np.ndarray = field(init=False)

    def __post_init__(self):
        self.acceptance_rates = np.array([t.acceptance_rate for t in self.traces])

    @property
    def mean_acceptance_rate(self) -> float:
        return float(np.mean(self.acceptance_rates))

    def __iter__(self):
        return iter(self.traces)

    def __len__(self):
        return len(self.traces)

    def __getitem__(self, i):
        return self.traces[i]


def rmrw_step(pp: PowerPosterior, theta, eta: float, rng: np.random.Generator):
    """One reflected step; returns (next_state, accepted, reflected)."""
    theta = np.asarray(theta, dtype=float)
    y = theta + np.sqrt(eta) * rng.standard_normal(pp.d)
    reflect = rng.random() < 0.5
    z = -y if reflect else y
    u_cur = pp.potential(theta)
    u_prop = pp.potential(z)
    if not np.isfinite(u_cur):
        raise FloatingPointError("potential is non-finite at the current state")
    accept = np.log(rng.random()) < u_cur - u_prop
    return (z, True, reflect) if accept else (theta, False, reflect)


def mrw_step(pp: PowerPosterior, theta, eta: float, rng: np.random.Generator):
    """One plain Metropolis random-walk step; returns (next_state, accepted)."""
    theta = np.asarray(theta, dtype=float)
    y = theta + np.sqrt(eta) * rng.standard_normal(pp.d)
    u_cur = pp.potential(theta)
    if not np.isfinite(u_cur):
        raise FloatingPointError("potential is non-finite at the current state")
    accept = np.log(rng.random()) < u_cur - pp.potential(y)
    return (y, True) if accept else (theta, False)


def _empirical_u(pp: PowerPosterior, theta: np.ndarray) -> float:
    # hot path: same value as pp.potential, without the shape checks
    proj = pp.data @ theta
    sq = float(theta @ theta)
    return pp.beta * (0.5 * sq - float(np.mean(logcosh(proj)))) + float(pp.prior.neg_log(sq))


def run_chain(pp: PowerPosterior, config: SamplerConfig) -> ChainTrace:
    """Run one chain; bit-reproducible from (pp, config).

    All randomness comes from the per-chain stream in a fixed draw order:
    initial state, then blocks of Gaussian increments, reflection coins, and
    acceptance uniforms.
    """
    rng = stream(config.seed, "chain")
    T, d = config.steps, pp.d
    if config.init is None:
        theta = rng.standard_normal(d)
    else:
        if config.init.shape != (d,):
            raise ValueError(f"init has shape {config.init.shape}, expected ({d},)")
        theta = config.init.copy()

    increments = np.sqrt(config.eta) * rng.standard_normal((T, d))
    if config.algorithm == "rmrw":
        coins = rng.random(T) < 0.5
    else:
        coins = np.zeros(T, dtype=bool)
    log_us = np.log(rng.random(T))

    states = np.empty((T + 1, d))
    accepted = np.empty(T, dtype=bool)
    states[0] = theta
    u_cur = _empirical_u(pp, theta)
    if not np.isfinite(u_cur):
        raise FloatingPointError("potential is non-finite at the initial state")

    data = pp.data
    beta = pp.beta
    n = pp.n
    prior = pp.prior
    for t in range(T):
        z = theta + increments[t]
        if coins[t]:
            z = -z
        proj = data @ z
        sq = float(z @ z)
        a = np.abs(proj)
        u_prop = beta * (0.5 * sq - (float(np.sum(a + np.log1p(np.exp(-2.0 * a)))) / n - np.log(2.0))) + float(
            prior.neg_log(sq)
        )
        if log_us[t] < u_cur - u_prop:
            theta = z
            u_cur = u_prop
            accepted[t] = True
        else:
            accepted[t] = False
        states[t + 1] = theta

    return ChainTrace(states=states, accepted=accepted, reflected=coins.copy(), config=config)


def run_multichain(pp: PowerPosterior, config: SamplerConfig, chains: int, jobs: int = 1) -> MultiChainResult:
    """Independent chains with seeds config.seed, config.seed + 1, ...

    Equivalent to sequential run_chain calls; `jobs` > 1 fans the chains out
    over worker threads (they share only the immutable posterior).  Result
    order always matches chain index.
    """
    if chains < 1:
        raise ValueError(f"chains must be >= 1, got {chains}")
    configs = [config.with_seed(config.seed + i) for i in range(chains)]
    if jobs > 1 and chains > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            traces = list(pool.map(lambda c: run_chain(pp, c), configs))
    else:
        traces = [run_chain(pp, c) for c in configs]
    return MultiChainResult(traces=traces)


def proposal_log_density(x, y, eta: float) -> float:
    """log q(y | x) of the reflected proposal 0.5 N(x, eta I) + 0.5 N(-x, eta I).

    Symmetric in (x, y); evaluated through the same logcosh reduction as the
    mixture density.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x.size
    quad = (float(y @ y) + float(x @ x)) / (2.0 * eta)
    return float(-0.5 * d * np.log(2.0 * np.pi * eta) - quad + logcosh(float(x @ y) / eta))


def save_trace(path, trace: ChainTrace, manifest_hash: str | None = None) -> None:
    """Trace as CSV: step index, d state columns, accepted, reflected."""
    path = Path(path)
    d = trace.states.shape[1]
    with open(path, "w") as fh:
        if manifest_hash is not None:
            fh.write(f"# manifest {manifest_hash}\n")
        fh.write("step," + ",".join(f"x{i}" for i in range(d)) + ",accepted,reflected\n")
        fh.write("0," + ",".join(f"{v:.17g}" for v in trace.states[0]) + ",,\n")
        for t in range(trace.steps):
            row = ",".join(f"{v:.17g}" for v in trace.states[t + 1])
            fh.write(f"{t + 1},{row},{int(trace.accepted[t])},{int(trace.reflected[t])}\n")


def load_trace(path) -> ChainTrace:
    path = Path(path)
    states, accepted, reflected = [], [], []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("step"):
                continue
            parts = line.rstrip("\n").split(",")
            states.append([float(v) for v in parts[1:-2]])
            if parts[-2] != "":
                accepted.append(bool(int(parts[-2])))
                reflected.append(bool(int(parts[-1])))
    return ChainTrace(
        states=np.asarray(states),
        accepted=np.asarray(accepted, dtype=bool),
        reflected=np.asarray(reflected, dtype=bool),
    )

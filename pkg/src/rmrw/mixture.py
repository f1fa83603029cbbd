"""Symmetric two-component Gaussian location mixture and data generation.

The generative model is 0.5 N(theta0, I) + 0.5 N(-theta0, I) in d dimensions,
optionally contaminated: with probability gamma a point is replaced by a draw
from a sub-Gaussian noise distribution (Gaussian or point mass).
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .quadrature import logcosh
from .rng import stream

__all__ = [
    "MixtureSpec",
    "ContaminationSpec",
    "density",
    "log_density",
    "sample_data",
    "save_dataset",
    "load_dataset",
]

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class MixtureSpec:
    """Component mean and dimension of the symmetric mixture."""

    theta0: np.ndarray
    d: int

    def __post_init__(self):
        theta0 = np.asarray(self.theta0, dtype=float)
        object.__setattr__(self, "theta0", theta0)
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if theta0.shape != (self.d,):
            raise ValueError(f"theta0 must have exactly {self.d} entries, got shape {theta0.shape}")
        if not np.all(np.isfinite(theta0)):
            raise ValueError("theta0 must be finite")

    @classmethod
    def along_e1(cls, a: float, d: int) -> "MixtureSpec":
        """Mean a * e1 in d dimensions, the standard experimental family."""
        theta0 = np.zeros(d)
        theta0[0] = a
        return cls(theta0=theta0, d=d)

    @property
    def separation(self) -> float:
        return float(np.linalg.norm(self.theta0))


@dataclass(frozen=True)
class ContaminationSpec:
    """Contamination weight gamma and the noise distribution it draws from.

    noise is "gaussian" (N(loc, K^2 I)) or "point_mass" (constant loc);
    K is the sub-Gaussian scale parameter used by the robustness formulas.
    """

    gamma: float
    noise: str = "gaussian"
    loc: np.ndarray = field(default_factory=lambda: np.zeros(1))
    K: float = 1.0

    def __post_init__(self):
        loc = np.atleast_1d(np.asarray(self.loc, dtype=float))
        object.__setattr__(self, "loc", loc)
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.noise not in ("gaussian", "point_mass"):
            raise ValueError(f"unknown noise kind {self.noise!r}")
        if self.K <= 0:
            raise ValueError(f"K must be positive, got {self.K}")
        if not np.all(np.isfinite(loc)):
            raise ValueError("noise location must be finite")


def _check_point(spec: MixtureSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.d,):
        raise ValueError(f"point has shape {x.shape}, expected ({spec.d},)")
    return x


def log_density(spec: MixtureSpec, x) -> float:
    """Log of the mixture density at x.

    Uses the identity
        log(0.5 phi(x - t) + 0.5 phi(x + t))
            = -d/2 log(2 pi) - (|x|^2 + |t|^2)/2 + logcosh(t . x),
    which stays finite for |t . x| far beyond where the two-term sum
    underflows.
    """
    x = _check_point(spec, x)
    quad = 0.5 * (float(x @ x) + float(spec.theta0 @ spec.theta0))
    return float(-0.5 * spec.d * _LOG_2PI - quad + logcosh(float(spec.theta0 @ x)))


def density(spec: MixtureSpec, x) -> float:
    """Mixture density 0.5 phi(x; theta0, I) + 0.5 phi(x; -theta0, I)."""
    return float(np.exp(log_density(spec, x)))


def log_density_batch(spec: MixtureSpec, X: np.ndarray) -> np.ndarray:
    """Vectorised log_density over rows of X (n, d)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != spec.d:
        raise ValueError(f"batch has shape {X.shape}, expected (n, {spec.d})")
    quad = 0.5 * (np.einsum("ij,ij->i", X, X) + float(spec.theta0 @ spec.theta0))
    return -0.5 * spec.d * _LOG_2PI - quad + logcosh(X @ spec.theta0)


def sample_data(
    spec: MixtureSpec,
    contamination: ContaminationSpec | None,
    n: int,
    seed: int,
) -> np.ndarray:
    """Draw n i.i.d. points, reproducibly, as an (n, d) array.

    Clean points are tau * theta0 + xi with a fair sign tau and xi ~ N(0, I).
    With a contamination spec of weight gamma > 0, each point is replaced by
    a noise draw with probability gamma.  gamma = 0 is bit-identical to
    passing no contamination at all, and the clean points are shared across
    gamma values under the same seed (the noise replaces rows in place).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = stream(seed, "data")
    signs = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    X = signs[:, None] * spec.theta0[None, :] + rng.standard_normal((n, spec.d))

    if contamination is not None and contamination.gamma > 0.0:
        loc = contamination.loc
        if loc.shape != (spec.d,):
            raise ValueError(f"noise location has shape {loc.shape}, expected ({spec.d},)")
        mask = rng.random(n) < contamination.gamma
        if contamination.noise == "gaussian":
            noise = loc[None, :] + contamination.K * rng.standard_normal((n, spec.d))
        else:
            noise = np.broadcast_to(loc, (n, spec.d)).copy()
        X[mask] = noise[mask]
    return X


def save_dataset(
    path,
    X: np.ndarray,
    spec: MixtureSpec,
    contamination: ContaminationSpec | None,
    seed: int,
) -> None:
    """Persist a dataset as CSV plus a JSON sidecar describing how it was made.

    The CSV holds one row per sample at full decimal precision; the sidecar
    (same stem, .json) records theta0, d, the contamination parameters, and
    the seed.
    """
    path = Path(path)
    X = np.asarray(X, dtype=float)
    header = ",".join(f"x{i}" for i in range(spec.d))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in X:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    sidecar = {
        "theta0": [float(v) for v in spec.theta0],
        "d": spec.d,
        "n": int(X.shape[0]),
        "seed": int(seed),
        "contamination": None
        if contamination is None
        else {
            "gamma": contamination.gamma,
            "noise": contamination.noise,
            "loc": [float(v) for v in contamination.loc],
            "K": contamination.K,
        },
    }
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dataset(path):
    """Load a dataset written by save_dataset; returns (X, spec, contamination, seed)."""
    path = Path(path)
    X = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    with open(path.with_suffix(".json")) as fh:
        meta = json.load(fh)
    spec = MixtureSpec(theta0=np.asarray(meta["theta0"], dtype=float), d=meta["d"])
    cont = None
    if meta["contamination"] is not None:
        c = meta["contamination"]
        cont = ContaminationSpec(gamma=c["gamma"], noise=c["noise"], loc=np.asarray(c["loc"]), K=c["K"])
    return X, spec, cont, meta["seed"]

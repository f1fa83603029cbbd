"""Potentials of the power posterior, empirical and population level.

Sign convention: the sampling target is pi(theta) proportional to
exp(-U(theta)), where U is the *negative* power log-posterior

    U(theta) = beta * ( |theta|^2 / 2 - (1/n) sum_i logcosh(theta . X_i) )
               - log lambda(theta)          (theta-independent terms dropped).

With this convention the Metropolis acceptance is min(1, exp(U(cur) - U(prop)))
and the population gradient is beta * (theta - E[tanh(theta . X) X]), i.e.
stationary at theta = 0 and theta = +/- theta0.  (The alternative sign makes
the gradient formula, the acceptance rule, and the target mutually
inconsistent, so it is not used anywhere in this package.)

The population potential U0 replaces the empirical average by an expectation
over the mixture.  Because logcosh(theta . X) depends on X only through the
scalar theta . X, whose law under the mixture is (after symmetrisation)
N(theta . theta0, |theta|^2), every population quantity reduces to
one-dimensional Gaussian expectations; see quadrature.py.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .mixture import MixtureSpec
from .quadrature import e_logcosh, hermgauss_standard, logcosh, logcosh_moments

__all__ = [
    "PriorSpec",
    "PowerPosterior",
    "empirical_potential",
    "empirical_gradient",
    "population_potential",
    "population_gradient",
    "population_hessian",
    "dissipativity_margin",
]

_BATCH_CHUNK = 8192


@dataclass(frozen=True)
class PriorSpec:
    """Prior on theta: flat (improper) or centred Gaussian N(0, sigma^2 I)."""

    kind: str = "uniform_improper"
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("uniform_improper", "gaussian"):
            raise ValueError(f"unknown prior kind {self.kind!r}")
        if self.kind == "gaussian" and self.sigma <= 0:
            raise ValueError(f"gaussian prior needs sigma > 0, got {self.sigma}")

    def neg_log(self, sq_norm):
        """-log lambda(theta) as a function of |theta|^2, constants dropped."""
        if self.kind == "gaussian":
            return sq_norm / (2.0 * self.sigma**2)
        return np.zeros_like(np.asarray(sq_norm, dtype=float))

    def neg_log_grad_coeff(self) -> float:
        """Coefficient c such that grad(-log lambda) = c * theta."""
        return 1.0 / self.sigma**2 if self.kind == "gaussian" else 0.0


class PowerPosterior:
    """Dataset, inverse-temperature beta, prior, and generative spec.

    Immutable after construction; all evaluation methods are pure functions
    of (self, theta) and safe to call concurrently from many chains.
    """

    def __init__(self, data, beta: float, prior: PriorSpec | None = None, spec: MixtureSpec | None = None):
        data = np.atleast_2d(np.asarray(data, dtype=float))
        if data.size == 0:
            raise ValueError("dataset is empty")
        if beta <= 0:
            raise ValueError(f"beta must be positive, got {beta}")
        if beta > data.shape[0]:
            warnings.warn(
                f"beta={beta} exceeds the sample size n={data.shape[0]}; the sampler is "
                "still well defined but the statistical guarantees assume beta <= n",
                stacklevel=2,
            )
        self.data = data
        self.data.setflags(write=False)
        self.n, self.d = data.shape
        self.beta = float(beta)
        self.prior = prior if prior is not None else PriorSpec()
        self.spec = spec if spec is not None else MixtureSpec(theta0=np.zeros(self.d), d=self.d)
        if self.spec.d != self.d:
            raise ValueError(f"spec dimension {self.spec.d} does not match data dimension {self.d}")
        self._data_T = np.ascontiguousarray(data.T)

    def _check_theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.d,):
            raise ValueError(f"theta has shape {theta.shape}, expected ({self.d},)")
        return theta

    # -- empirical level ---------------------------------------------------

    def potential(self, theta) -> float:
        theta = self._check_theta(theta)
        proj = self.data @ theta
        val = self.beta * (0.5 * float(theta @ theta) - float(np.mean(logcosh(proj))))
        return val + float(self.prior.neg_log(float(theta @ theta)))

    def potential_batch(self, thetas: np.ndarray) -> np.ndarray:
        """Potential at each row of thetas (K, d), chunked to bound memory."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        if thetas.shape[1] != self.d:
            raise ValueError(f"theta batch has shape {thetas.shape}, expected (K, {self.d})")
        out = np.empty(thetas.shape[0])
        step = max(1, _BATCH_CHUNK * 1000 // max(self.n, 1))
        for k in range(0, thetas.shape[0], step):
            block = thetas[k : k + step]
            proj = block @ self._data_T
            sq = np.einsum("ij,ij->i", block, block)
            out[k : k + step] = self.beta * (0.5 * sq - np.mean(logcosh(proj), axis=1)) + self.prior.neg_log(sq)
        return out

    def gradient(self, theta) -> np.ndarray:
        theta = self._check_theta(theta)
        proj = self.data @ theta
        grad = self.beta * (theta - (np.tanh(proj) @ self.data) / self.n)
        return grad + self.prior.neg_log_grad_coeff() * theta

    def radial_gradient_batch(self, thetas: np.ndarray) -> np.ndarray:
        """<grad U(theta), theta> for each row of thetas; used by tail checks."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        proj = thetas @ self._data_T
        sq = np.einsum("ij,ij->i", thetas, thetas)
        inner = self.beta * (sq - np.mean(np.tanh(proj) * proj, axis=1))
        return inner + self.prior.neg_log_grad_coeff() * sq

    # -- population level --------------------------------------------------

    def _mr(self, theta):
        m = float(theta @ self.spec.theta0)
        r = float(np.linalg.norm(theta))
        return m, r

    def population_potential(self, theta, nodes: int | None = None) -> float:
        theta = self._check_theta(theta)
        m, r = self._mr(theta)
        if nodes is None:
            glc = float(e_logcosh([m], [r])[0])
        else:
            if nodes < 8:
                raise ValueError(f"need at least 8 quadrature nodes, got {nodes}")
            z, w = hermgauss_standard(nodes)
            glc = float(np.sum(w * logcosh(m + r * z)))
        val = self.beta * (0.5 * r * r - glc)
        return val + float(self.prior.neg_log(r * r))

    def population_potential_batch(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        if thetas.shape[1] != self.d:
            raise ValueError(f"theta batch has shape {thetas.shape}, expected (K, {self.d})")
        out = np.empty(thetas.shape[0])
        for k in range(0, thetas.shape[0], _BATCH_CHUNK):
            block = thetas[k : k + _BATCH_CHUNK]
            m = block @ self.spec.theta0
            sq = np.einsum("ij,ij->i", block, block)
            r = np.sqrt(sq)
            out[k : k + _BATCH_CHUNK] = self.beta * (0.5 * sq - e_logcosh(m, r)) + self.prior.neg_log(sq)
        return out

    def population_gradient(self, theta) -> np.ndarray:
        theta = self._check_theta(theta)
        m, r = self._mr(theta)
        if r == 0.0:
            return np.zeros(self.d)
        T0, T1, _, _, _ = logcosh_moments([m], [r])
        grad = self.beta * (theta - float(T0[0]) * self.spec.theta0 - (float(T1[0]) / r) * theta)
        return grad + self.prior.neg_log_grad_coeff() * theta

    def population_hessian(self, theta) -> np.ndarray:
        theta = self._check_theta(theta)
        if self.d > 20:
            raise ValueError(f"dense population Hessian is limited to d <= 20, got d={self.d}")
        theta0 = self.spec.theta0
        m, r = self._mr(theta)
        if r < 1e-12:
            H = -self.beta * np.outer(theta0, theta0)
        else:
            T0, T1, S0, S1, S2 = (float(v[0]) for v in logcosh_moments([m], [r]))
            u = theta / r
            H = self.beta * (1.0 - S0) * np.eye(self.d) - self.beta * (
                S0 * np.outer(theta0, theta0)
                + S1 * (np.outer(theta0, u) + np.outer(u, theta0))
                + (S2 - S0) * np.outer(u, u)
            )
        H = H + self.prior.neg_log_grad_coeff() * np.eye(self.d)
        return 0.5 * (H + H.T)

    def population_radial_gradient_batch(self, thetas: np.ndarray) -> np.ndarray:
        """<grad U0(theta), theta> for each row of thetas."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        m = thetas @ self.spec.theta0
        sq = np.einsum("ij,ij->i", thetas, thetas)
        r = np.sqrt(sq)
        T0, T1, _, _, _ = logcosh_moments(m, r)
        return self.beta * (sq - T0 * m - T1 * r) + self.prior.neg_log_grad_coeff() * sq


# -- module-level functional API ------------------------------------------


def empirical_potential(pp: PowerPosterior, theta) -> float:
    """U(theta); zero at theta = 0 under the flat prior."""
    return pp.potential(theta)


def empirical_gradient(pp: PowerPosterior, theta) -> np.ndarray:
    return pp.gradient(theta)


def population_potential(pp: PowerPosterior, theta, nodes: int | None = None) -> float:
    """U0(theta), deterministic; `nodes` selects plain Gauss-Hermite of that
    order, the default is the kink-aware panel rule (accurate to ~1e-14)."""
    return pp.population_potential(theta, nodes=nodes)


def population_gradient(pp: PowerPosterior, theta) -> np.ndarray:
    """grad U0(theta); vanishes at theta = 0 and theta = +/- theta0."""
    return pp.population_gradient(theta)


def population_hessian(pp: PowerPosterior, theta) -> np.ndarray:
    """Symmetric d x d Hessian of U0; smallest eigenvalue >= -beta |theta0|^2."""
    return pp.population_hessian(theta)


def dissipativity_margin(pp: PowerPosterior, theta, empirical: bool = False) -> float:
    """Slack in the radial drift condition at theta.

    Population form:  <grad U0, theta> - [beta/2 |theta|^2 - beta (|theta0|^2 + 1)]
    Empirical form:   <grad U,  theta> - [beta/2 |theta|^2 - 2 beta (|theta0|^2 + 1)]

    Nonnegative values certify dissipativity at theta.
    """
    theta = pp._check_theta(theta)
    sq = float(theta @ theta)
    sep2 = float(pp.spec.theta0 @ pp.spec.theta0)
    if empirical:
        inner = float(pp.radial_gradient_batch(theta[None, :])[0])
        bound = 0.5 * pp.beta * sq - 2.0 * pp.beta * (sep2 + 1.0)
    else:
        inner = float(pp.population_radial_gradient_batch(theta[None, :])[0])
        bound = 0.5 * pp.beta * sq - pp.beta * (sep2 + 1.0)
    return inner - bound

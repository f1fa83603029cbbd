"""Empirical-process deviation scaling and dissipativity field sweeps.

Both checks quantify how far finite-sample objects sit from their population
counterparts.  The deviation sweep measures sup over a theta grid of
|P_n g_theta - P g_theta| for g_theta(x) = log f_theta(x) and fits its decay
against n (theory predicts n^{-1/2} up to logs).  The dissipativity sweep
evaluates the radial drift margin over random states in a ball, either for
the population potential (must hold everywhere) or per dataset replication
(holds with high probability, with a doubled constant, and with an extra
gamma d K^2 log(n/delta) allowance under contamination).
"""

import numpy as np

from .grids import LemmaReport
from .mixture import ContaminationSpec, MixtureSpec, sample_data
from .potential import PowerPosterior
from .quadrature import e_logcosh, logcosh
from .rng import stream

__all__ = ["empirical_process_sweep", "check_dissipativity_field", "deviation_sup"]

_LOG_2PI = float(np.log(2.0 * np.pi))
_MAX_GRID_WORK = 400_000_000  # theta-grid points times max sample size


def _theta_grid(d: int, A: float, M: float, points_per_axis: int) -> np.ndarray:
    """Grid over [-A, A] x B(0, M): full box in d = 1, ball-filtered beyond."""
    if d == 1:
        return np.linspace(-A, A, points_per_axis)[:, None]
    first = np.linspace(-A, A, points_per_axis)
    rest = [np.linspace(-M, M, points_per_axis)] * (d - 1)
    grids = np.meshgrid(first, *rest, indexing="ij")
    pts = np.column_stack([g.ravel() for g in grids])
    tail = pts[:, 1:]
    keep = np.einsum("ij,ij->i", tail, tail) <= M * M + 1e-12
    return pts[keep]


def deviation_sup(spec: MixtureSpec, X: np.ndarray, thetas: np.ndarray, pop_logcosh: np.ndarray) -> float:
    """sup over the theta grid of |P_n g_theta - P g_theta|.

    pop_logcosh holds E logcosh(theta . X) per grid point under the clean
    mixture; the quadratic parts of g contribute the (theta-independent)
    sample second-moment deviation.
    """
    n = X.shape[0]
    second_moment_gap = 0.5 * (float(np.einsum("ij,ij->", X, X)) / n - (spec.d + spec.separation**2))
    emp = np.mean(logcosh(thetas @ X.T), axis=1)
    return float(np.max(np.abs(emp - pop_logcosh - second_moment_gap)))


def empirical_process_sweep(
    spec: MixtureSpec,
    beta: float,
    A: float,
    M: float,
    n_list,
    reps: int,
    seed: int,
    points_per_axis: int = 51,
    contamination: ContaminationSpec | None = None,
    slope_range: tuple = (-0.65, -0.35),
) -> LemmaReport:
    """Fit the log-log slope of the sup deviation against the sample size.

    PASS iff the fitted slope lies in slope_range (default [-0.65, -0.35],
    bracketing the theoretical -1/2 up to log factors).  The population term
    is always the clean-model expectation, so under contamination the extra
    deviation it induces is part of what is measured.
    """
    if spec.d > 3:
        raise ValueError("deviation sweep is limited to d <= 3")
    n_list = sorted(int(n) for n in n_list)
    if len(n_list) < 2:
        raise ValueError("need at least two sample sizes to fit a slope")
    thetas = _theta_grid(spec.d, A, M, points_per_axis)
    if thetas.shape[0] * max(n_list) > _MAX_GRID_WORK:
        raise ValueError("theta grid times sample size exceeds the memory budget")

    m = thetas @ spec.theta0
    r = np.linalg.norm(thetas, axis=1)
    pop = e_logcosh(m, r)

    mean_dev = []
    per_rep = {}
    for j, n in enumerate(n_list):
        devs = np.empty(reps)
        for k in range(reps):
            X = sample_data(spec, contamination, n, seed=seed + 1000 * j + k)
            devs[k] = deviation_sup(spec, X, thetas, pop)
        mean_dev.append(float(devs.mean()))
        per_rep[n] = devs
    slope = float(np.polyfit(np.log(n_list), np.log(mean_dev), 1)[0])

    ratios = {}
    for n in n_list:
        if 4 * n in per_rep:
            ratios[f"{4 * n}/{n}"] = float(per_rep[4 * n].mean() / per_rep[n].mean())

    lo, hi = slope_range
    margin = min(slope - lo, hi - slope)
    return LemmaReport(
        lemma="empirical-process-scaling",
        instances=len(n_list) * reps,
        worst_margin=float(margin),
        witness={"slope": slope, "n_list": n_list, "mean_deviation": mean_dev},
        passed=bool(lo <= slope <= hi),
        seed=seed,
        details={"ratios": ratios, "beta": beta, "A": A, "M": M, "reps": reps,
                 "gamma": 0.0 if contamination is None else contamination.gamma},
    )


def _uniform_ball(rng: np.random.Generator, n: int, d: int, radius: float) -> np.ndarray:
    v = rng.standard_normal((n, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * radius * rng.random(n)[:, None] ** (1.0 / d)


def check_dissipativity_field(
    pp: PowerPosterior,
    empirical: bool,
    radius: float,
    samples: int,
    seed: int,
    gamma: float = 0.0,
    K: float = 1.0,
    delta: float = 0.05,
    tol: float = 1e-8,
) -> LemmaReport:
    """Minimum radial drift margin over random states in B(0, radius).

    Population margin:  <grad U0, theta> - [beta/2 |theta|^2 - beta (|theta0|^2 + 1)]
    Empirical margin:   <grad U,  theta> - [beta/2 |theta|^2 - 2 beta (|theta0|^2 + 1 + slack)]
    with slack = gamma d K^2 log(n / delta) for contaminated data (0 when
    gamma = 0).  The population margin must be nonnegative everywhere; the
    empirical one holds with high probability per dataset.
    """
    rng = stream(seed, "dissipativity")
    thetas = _uniform_ball(rng, samples, pp.d, radius)
    sq = np.einsum("ij,ij->i", thetas, thetas)
    sep2 = pp.spec.separation**2
    if empirical:
        inner = pp.radial_gradient_batch(thetas)
        slack = gamma * pp.d * K * K * np.log(pp.n / delta) if gamma > 0 else 0.0
        bound = 0.5 * pp.beta * sq - 2.0 * pp.beta * (sep2 + 1.0 + slack)
    else:
        inner = pp.population_radial_gradient_batch(thetas)
        bound = 0.5 * pp.beta * sq - pp.beta * (sep2 + 1.0)
    margins = inner - bound
    k = int(np.argmin(margins))
    return LemmaReport(
        lemma="dissipative-drift" + ("-empirical" if empirical else "-population"),
        instances=samples,
        worst_margin=float(margins[k]),
        witness={"theta": [float(v) for v in thetas[k]], "radius": radius},
        passed=bool(margins[k] >= -tol),
        seed=seed,
        details={"gamma": gamma, "K": K, "delta": delta, "beta": pp.beta},
    )

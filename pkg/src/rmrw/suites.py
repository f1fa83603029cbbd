"""Runnable bundles of the numeric lemma checks, used by the CLI and tests.

Each suite returns a list of LemmaReports with recorded seeds, so a rerun
with the same seed reproduces every margin and witness bit for bit.  Suites
tagged observational (gate=False) record margins without gating the exit
status: they correspond to claims whose unknown universal constants make a
hard pass/fail meaningless, so only the observed scaling is reported.
"""

import numpy as np

from .deviations import check_dissipativity_field, deviation_sup, empirical_process_sweep
from .diagnostics import tail_radius
from .grids import (
    GridAxis,
    GridDensity,
    LemmaReport,
    cheeger_constant,
    check_poincare_combination,
    check_quasiconcave_isoperimetry,
    check_structure,
    poincare_constant,
)
from .gridkernel import (
    KernelOverlapChecker,
    build_mrw_grid_kernel,
    build_rmrw_grid_kernel,
    check_kernel_overlap,
    s_conductance,
)
from .mixture import ContaminationSpec, MixtureSpec, sample_data
from .potential import PowerPosterior, PriorSpec
from .quadrature import e_logcosh
from .rng import stream

__all__ = ["run_suite", "SUITES", "random_density_1d", "population_posterior"]


def population_posterior(a: float, d: int, beta: float) -> PowerPosterior:
    """Posterior object used for population-level checks only (dummy dataset)."""
    spec = MixtureSpec.along_e1(a, d)
    return PowerPosterior(np.zeros((max(1, int(np.ceil(beta))), d)), beta=beta, spec=spec)


def random_density_1d(rng: np.random.Generator, axis: GridAxis) -> GridDensity:
    """Random smooth 1-D density: a 1-3 component Gaussian mixture.

    Deliberately includes bimodal shapes so the Cheeger-inequality and
    Buser-direction checks see genuine bottlenecks.
    """
    k = int(rng.integers(1, 4))
    means = rng.uniform(-2.0, 2.0, size=k)
    scales = rng.uniform(0.4, 1.4, size=k)
    weights = rng.dirichlet(np.ones(k))
    x = axis.centers
    dens = np.zeros_like(x)
    for mu, s, w in zip(means, scales, weights):
        dens += w * np.exp(-0.5 * ((x - mu) / s) ** 2) / s
    return GridDensity(axes=(axis,), logmass=np.log(dens))


def _analytic_poincare_reports() -> list:
    reports = []
    gauss = GridDensity.from_log_density(
        lambda pts: -0.5 * pts[:, 0] ** 2, (GridAxis(-6.0, 6.0, 2000),)
    )
    c = poincare_constant(gauss)
    reports.append(
        LemmaReport(
            lemma="poincare-gaussian-unit",
            instances=1,
            worst_margin=float(0.02 - abs(c - 1.0)),
            witness={"constant": c, "expected": 1.0},
            passed=bool(abs(c - 1.0) <= 0.02),
        )
    )
    uni1 = GridDensity(axes=(GridAxis(0.0, 1.0, 2000),), logmass=np.zeros(2000))
    c1 = poincare_constant(uni1)
    target = 1.0 / np.pi**2
    reports.append(
        LemmaReport(
            lemma="poincare-uniform-interval",
            instances=1,
            worst_margin=float(0.02 * target - abs(c1 - target)),
            witness={"constant": c1, "expected": target},
            passed=bool(abs(c1 - target) <= 0.02 * target),
        )
    )
    uni2 = GridDensity(axes=(GridAxis(0.0, 2.0, 2000),), logmass=np.zeros(2000))
    c2 = poincare_constant(uni2)
    reports.append(
        LemmaReport(
            lemma="poincare-length-scaling",
            instances=1,
            worst_margin=float(0.02 - abs(c2 / c1 - 4.0) / 4.0),
            witness={"ratio": c2 / c1, "expected": 4.0},
            passed=bool(abs(c2 / c1 - 4.0) <= 0.02 * 4.0),
        )
    )
    return reports


def _random_combination_instance(rng: np.random.Generator, m: int = 88) -> GridDensity:
    # smooth non-product perturbation of a standard Gaussian, clipped domain
    c = rng.uniform(-0.12, 0.12, size=4)

    def logdens(pts):
        x, y = pts[:, 0], pts[:, 1]
        pert = c[0] * x * y + c[1] * x * y * y + c[2] * x * x * y + c[3] * np.sin(x) * y
        return -0.5 * (x * x + y * y) + pert

    axes = (GridAxis(-4.0, 4.0, m), GridAxis(-4.0, 4.0, m))
    return GridDensity.from_log_density(logdens, axes)


def suite_poincare(seed: int) -> list:
    reports = _analytic_poincare_reports()

    rng = stream(seed, "poincare-random")
    axis = GridAxis(-6.0, 6.0, 1000)
    worst = np.inf
    witness = {}
    for k in range(50):
        gd = random_density_1d(rng, axis)
        c = poincare_constant(gd)
        z = cheeger_constant(gd)
        margin = 4.0 / z**2 - c
        if margin < worst:
            worst, witness = margin, {"instance": k, "poincare": c, "cheeger": z}
    reports.append(
        LemmaReport(
            lemma="cheeger-inequality",
            instances=50,
            worst_margin=float(worst),
            witness=witness,
            passed=bool(worst >= -1e-8),
            seed=seed,
        )
    )

    rng2 = stream(seed, "poincare-combination")
    worst = np.inf
    wit = {}
    # product sanity instance first: L = 0, bound 2(C1+C2) must dominate
    prod = GridDensity.from_log_density(
        lambda pts: -0.5 * (pts[:, 0] ** 2 + pts[:, 1] ** 2), (GridAxis(-4.0, 4.0, 88), GridAxis(-4.0, 4.0, 88))
    )
    rep = check_poincare_combination(prod)
    worst, wit = rep.worst_margin, dict(rep.witness, instance="product-gaussian")
    for k in range(20):
        rep = check_poincare_combination(_random_combination_instance(rng2))
        if rep.worst_margin < worst:
            worst, wit = rep.worst_margin, dict(rep.witness, instance=k)
    reports.append(
        LemmaReport(
            lemma="poincare-combination",
            instances=21,
            worst_margin=float(worst),
            witness=wit,
            passed=bool(worst >= -1e-8),
            seed=seed,
        )
    )
    return reports


def _unimodal_menu(m: int = 800) -> list:
    """Ten unimodal densities on [0, 1]-type intervals, several far from log-concave."""
    x = (np.arange(m) + 0.5) / m
    menu = []
    menu.append(("triangle", np.minimum(x, 1 - x) + 1e-9))
    menu.append(("uniform", np.ones(m)))
    menu.append(("half-gaussian", np.exp(-4 * x * x)))
    menu.append(("ramp", x + 0.02))
    menu.append(("cauchy-bump", 1.0 / (1.0 + 25 * (x - 0.4) ** 2)))
    menu.append(("plateau", np.clip(np.minimum(x, 1 - x) * 8, 0, 1) + 1e-9))
    menu.append(("quartic-peak", np.exp(-80 * (x - 0.6) ** 4)))
    menu.append(("left-spike", np.exp(-14 * x)))
    menu.append(("sqrt-cusp", np.sqrt(np.minimum(x, 1 - x)) + 1e-9))
    menu.append(("asymmetric", np.exp(-0.5 * ((x - 0.3) / 0.12) ** 2) + 0.2 * np.exp(-x)))
    out = []
    for name, dens in menu:
        out.append((name, GridDensity(axes=(GridAxis(0.0, 1.0, m),), logmass=np.log(dens))))
    return out


def suite_quasiconcave(seed: int, partitions: int = 10_000) -> list:
    reports = []
    worst = np.inf
    wit = {}
    total = 0
    for k, (name, gd) in enumerate(_unimodal_menu()):
        rep = check_quasiconcave_isoperimetry(gd, partitions=partitions, seed=seed + k)
        total += rep.instances
        if rep.worst_margin < worst:
            worst, wit = rep.worst_margin, dict(rep.witness, density=name)
    reports.append(
        LemmaReport(
            lemma="quasi-concave-partition",
            instances=total,
            worst_margin=float(worst),
            witness=wit,
            passed=bool(worst >= -1e-8),
            seed=seed,
        )
    )
    return reports


def suite_structure(seed: int, grid_points: int = 400) -> list:
    del seed  # deterministic sweep, kept for the uniform suite signature
    axes = (GridAxis(0.0, 6.0, grid_points), GridAxis(-6.0, 6.0, grid_points))
    reports = []
    for a0 in (0.0, 1.0, 2.0):
        for beta in (2.0, 8.0):
            pp = population_posterior(a0, 2, beta)
            rep = check_structure(pp, axes)
            rep.lemma = f"population-structure-a{a0:g}-b{beta:g}"
            reports.append(rep)
    return reports


def suite_kernel(seed: int, m: int = 321) -> list:
    a, n, beta = 3.0, 50, 50.0
    spec = MixtureSpec.along_e1(a, 1)
    X = sample_data(spec, None, n, seed=seed)
    pp = PowerPosterior(X, beta=beta, spec=spec)
    axis = GridAxis(-4.5, 4.5, m)
    eta = 0.05
    gk = build_rmrw_grid_kernel(pp, eta, axis)
    gm = build_mrw_grid_kernel(pp, eta, axis)

    reports = []
    rowdev = float(np.abs(gk.matrix.sum(axis=1) - 1.0).max())
    reports.append(
        LemmaReport(
            lemma="kernel-rows-stochastic",
            instances=m,
            worst_margin=float(1e-12 - rowdev),
            witness={"max_row_deviation": rowdev},
            passed=bool(rowdev <= 1e-12),
            seed=seed,
        )
    )
    db = gk.detailed_balance_residual
    reports.append(
        LemmaReport(
            lemma="kernel-detailed-balance",
            instances=m * m,
            worst_margin=float(1e-10 - db),
            witness={"residual": db},
            passed=bool(db <= 1e-10),
            seed=seed,
        )
    )
    slem = gk.second_eigenvalue_modulus()
    reports.append(
        LemmaReport(
            lemma="kernel-spectral-gap",
            instances=1,
            worst_margin=float(1.0 - slem),
            witness={"second_eigenvalue_modulus": slem},
            passed=bool(slem < 1.0),
            seed=seed,
        )
    )
    s = 0.01
    phi_r = s_conductance(gk, s)
    phi_m = s_conductance(gm, s)
    ratio = phi_r / phi_m
    reports.append(
        LemmaReport(
            lemma="reflection-conductance-gain",
            instances=1,
            worst_margin=float(ratio - 10.0),
            witness={"rmrw": phi_r, "mrw": phi_m, "ratio": ratio, "s": s, "eta": eta},
            passed=bool(ratio > 10.0),
            seed=seed,
        )
    )
    return reports


def suite_overlap(seed: int, pairs: int = 100) -> list:
    a, beta = 2.0, 4.0
    pp = population_posterior(a, 1, beta)
    A = M = 3.0
    eta = 0.999 / (400.0 * (A + M + 1.0) ** 2)
    rng = stream(seed, "overlap-pairs")
    checker = KernelOverlapChecker(pp, eta, halfwidth=A + 1.0)
    span = np.sqrt(eta) / 10.0

    worst = np.inf
    wit = {}
    skipped = 0
    details = {"eta": eta, "A": A, "max_tv_to_proposal": 0.0, "max_tv_pair": 0.0}
    for k in range(pairs):
        x = float(rng.uniform(-(A - 0.5), A - 0.5))
        y = x + float(rng.uniform(-span, span))
        if rng.random() < 0.5:
            y = -y
        rep = check_kernel_overlap(pp, eta, x, y, A=A, M=M, checker=checker)
        skipped += rep.skipped
        if rep.skipped:
            continue
        details["max_tv_to_proposal"] = max(details["max_tv_to_proposal"], rep.details["tv_transition_vs_proposal"])
        details["max_tv_pair"] = max(details["max_tv_pair"], rep.details["tv_transition_pair"])
        if rep.worst_margin < worst:
            worst, wit = rep.worst_margin, dict(rep.witness, instance=k)
    return [
        LemmaReport(
            lemma="kernel-overlap",
            instances=pairs - skipped,
            worst_margin=float(worst),
            witness=wit,
            passed=bool(worst >= -1e-8),
            seed=seed,
            skipped=skipped,
            details=details,
        )
    ]


def _theorem1_sample_size(d: int, a: float, beta: float, delta: float = 0.05) -> int:
    return int(np.ceil(d * (beta**2 * (1 + a * a) + d) * np.log(d * (a + 1) / delta)))


def suite_dissipativity(seed: int, reps: int = 100) -> list:
    reports = []
    pp = population_posterior(2.0, 2, 4.0)
    reports.append(check_dissipativity_field(pp, empirical=False, radius=20.0, samples=10_000, seed=seed))
    reports[-1].lemma += "-a2-b4"
    pp0 = population_posterior(0.0, 2, 4.0)
    reports.append(check_dissipativity_field(pp0, empirical=False, radius=10.0, samples=2_000, seed=seed + 1))
    reports[-1].lemma += "-a0"
    pp3 = population_posterior(3.0, 3, 2.0)
    reports.append(check_dissipativity_field(pp3, empirical=False, radius=15.0, samples=10_000, seed=seed + 2))
    reports[-1].lemma += "-a3-b2-d3"

    # replication sweeps: pass fraction over datasets, margin vs the 95% bar
    d, a, beta = 3, 2.0, 4.0
    n = _theorem1_sample_size(d, a, beta)
    spec = MixtureSpec.along_e1(a, d)
    for gamma, K, tag in ((0.0, 1.0, "empirical"), (0.01, 2.0, "contaminated")):
        cont = None if gamma == 0 else ContaminationSpec(gamma=gamma, noise="gaussian", loc=np.zeros(d), K=K)
        passes = 0
        worst_rep = (np.inf, -1)
        for k in range(reps):
            X = sample_data(spec, cont, n, seed=seed + 37 * k)
            ppk = PowerPosterior(X, beta=beta, spec=spec)
            rep = check_dissipativity_field(
                ppk, empirical=True, radius=20.0, samples=2_000, seed=seed + k, gamma=gamma, K=K
            )
            passes += int(rep.worst_margin >= -1e-8)
            if rep.worst_margin < worst_rep[0]:
                worst_rep = (rep.worst_margin, k)
        frac = passes / reps
        reports.append(
            LemmaReport(
                lemma=f"dissipative-drift-{tag}-replications",
                instances=reps,
                worst_margin=float(frac - 0.95),
                witness={"pass_fraction": frac, "worst_margin": worst_rep[0], "worst_replication": worst_rep[1]},
                passed=bool(frac >= 0.95),
                seed=seed,
                details={"n": n, "gamma": gamma, "K": K, "beta": beta, "d": d, "a": a},
            )
        )
    return reports


def suite_empirical(seed: int, reps: int = 50) -> list:
    spec = MixtureSpec.along_e1(1.0, 1)
    reports = [
        empirical_process_sweep(spec, beta=4.0, A=3.0, M=3.0, n_list=(250, 1000, 4000), reps=reps, seed=seed)
    ]

    # contaminated variant: extra deviation must grow (sub)linearly in gamma
    gammas = (0.0, 0.01, 0.02, 0.04)
    n = 4000
    thetas = np.linspace(-3.0, 3.0, 101)[:, None]
    pop = e_logcosh(thetas[:, 0] * spec.theta0[0], np.abs(thetas[:, 0]))
    loc = np.array([6.0])
    means = []
    for gamma in gammas:
        cont = None if gamma == 0 else ContaminationSpec(gamma=gamma, noise="point_mass", loc=loc, K=2.0)
        devs = np.empty(reps)
        for k in range(reps):
            X = sample_data(spec, cont, n, seed=seed + 101 * k)
            devs[k] = deviation_sup(spec, X, thetas, pop)
        means.append(float(devs.mean()))
    extra = np.asarray(means) - means[0]
    g = np.asarray(gammas)
    design = np.column_stack([g[1:], g[1:] ** 2])
    c1, c2 = np.linalg.lstsq(design, extra[1:], rcond=None)[0]
    quad_frac = abs(c2) * g[-1] / c1 if c1 > 0 else np.inf
    passed = c1 > 0 and quad_frac <= 0.5
    reports.append(
        LemmaReport(
            lemma="contamination-deviation-linearity",
            instances=len(gammas) * reps,
            worst_margin=float(min(c1, 0.5 - quad_frac)),
            witness={"linear_coeff": float(c1), "quadratic_coeff": float(c2), "quadratic_fraction": float(quad_frac)},
            passed=bool(passed),
            seed=seed,
            details={"gammas": list(gammas), "extra_deviation": [float(v) for v in extra], "n": n},
        )
    )
    return reports


def suite_observational(seed: int) -> list:
    reports = []

    # Buser direction: lambda_1 <= 10 sqrt(d) (zeta sqrt(K) + zeta^2), K = curvature floor
    rng = stream(seed, "poincare-random")  # same family as the Cheeger-inequality check
    axis = GridAxis(-6.0, 6.0, 1000)
    worst = np.inf
    wit = {}
    for k in range(50):
        gd = random_density_1d(rng, axis)
        lam = 1.0 / poincare_constant(gd)
        z = cheeger_constant(gd)
        h = axis.step
        logdens = gd.logmass - np.log(h)
        curv = np.diff(logdens, n=2) / h**2  # (log rho)'' ; floor is -max of this
        K = max(0.0, float(curv.max()))
        margin = 10.0 * (z * np.sqrt(K) + z * z) - lam
        if margin < worst:
            worst, wit = margin, {"instance": k, "lambda1": lam, "cheeger": z, "curvature": K}
    reports.append(
        LemmaReport(
            lemma="buser-direction-observed",
            instances=50,
            worst_margin=float(worst),
            witness=wit,
            passed=bool(worst >= 0),
            seed=seed,
            gate=False,
        )
    )

    # restricted-cylinder Cheeger scaling: zeta * sqrt(d) A^5 M^2 stays bounded away from 0
    beta = 4.0
    products = {}
    for a0 in (0.5, 1.0, 2.0):
        pp = population_posterior(a0, 2, beta)
        for A in (4.0, 6.0):
            for M in (4.0, 6.0):
                axes = (GridAxis(0.0, A, 64), GridAxis(-M, M, 64))
                gd = GridDensity.from_log_density(lambda pts: -pp.population_potential_batch(pts), axes)
                z = cheeger_constant(gd)
                products[f"a0={a0:g},A={A:g},M={M:g}"] = float(z * np.sqrt(2.0) * A**5 * M**2)
    min_product = min(products.values())
    reports.append(
        LemmaReport(
            lemma="restricted-cheeger-scaling-observed",
            instances=len(products),
            worst_margin=float(min_product),
            witness={"min_product": min_product},
            passed=bool(min_product > 0),
            seed=seed,
            gate=False,
            details={"products": products, "beta": beta},
        )
    )
    return reports


SUITES = {
    "poincare": suite_poincare,
    "quasiconcave": suite_quasiconcave,
    "structure": suite_structure,
    "kernel": suite_kernel,
    "overlap": suite_overlap,
    "dissipativity": suite_dissipativity,
    "empirical": suite_empirical,
    "observational": suite_observational,
}


def run_suite(name: str, seed: int) -> list:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; available: {sorted(SUITES)}")
    return SUITES[name](seed)

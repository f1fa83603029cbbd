"""Lattice densities and the spectral / isoperimetric checks that run on them.

A GridDensity is a normalised probability mass vector over a 1-D or 2-D
cell lattice.  On top of it we compute:

* the Poincare constant, as 1/lambda_1 of the discrete weighted Neumann
  Laplacian of the reversible nearest-neighbour diffusion whose stationary
  law is the grid density (grid-convergent to the continuum constant);
* the Cheeger constant, exactly over interval cuts in 1-D, and as an upper
  bound from a structured cut family (vertical / horizontal / level-set
  cuts) in 2-D;
* the marginal/conditional Poincare combination bound
  2 (C1 + C2 + C1 C2 L^2), compared against the full 2-D eigensolve;
* a partition inequality for quasi-concave 1-D densities;
* unimodality of the first-axis marginal and log-concavity of the
  conditional columns for the population posterior restricted to a half
  cylinder.

Margins are signed: >= 0 means the inequality held, and each report carries
the witness of its worst case.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

__all__ = [
    "GridAxis",
    "GridDensity",
    "LemmaReport",
    "poincare_constant",
    "cheeger_constant",
    "check_poincare_combination",
    "check_quasiconcave_isoperimetry",
    "check_structure",
]

PASS_TOL = 1e-8  # default absolute slack when declaring an inequality satisfied


@dataclass(frozen=True)
class GridAxis:
    lo: float
    hi: float
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"axis needs at least one cell, got m={self.m}")
        if not self.hi > self.lo:
            raise ValueError(f"axis needs hi > lo, got [{self.lo}, {self.hi}]")

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / self.m

    @property
    def centers(self) -> np.ndarray:
        return self.lo + (np.arange(self.m) + 0.5) * self.step

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.m + 1)

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass
class GridDensity:
    """Normalised cell masses (and their logs) over a 1-D or 2-D lattice."""

    axes: tuple
    logmass: np.ndarray  # unnormalised log cell mass
    mass: np.ndarray = field(init=False)

    def __post_init__(self):
        self.axes = tuple(self.axes)
        if len(self.axes) not in (1, 2):
            raise ValueError("only 1-D and 2-D grids are supported")
        shape = tuple(ax.m for ax in self.axes)
        self.logmass = np.asarray(self.logmass, dtype=float)
        if self.logmass.shape != shape:
            raise ValueError(f"logmass shape {self.logmass.shape} does not match axes {shape}")
        shifted = self.logmass - self.logmass.max()
        mass = np.exp(shifted)
        self.mass = mass / mass.sum()

    @classmethod
    def from_log_density(cls, log_density, axes) -> "GridDensity":
        """Evaluate a vectorised log-density on cell centers.

        `log_density` maps an (K, ndim) array of points to (K,) log values;
        cell volumes are constant so they drop out after normalisation.
        """
        axes = tuple(axes)
        if len(axes) == 1:
            pts = axes[0].centers[:, None]
            logmass = np.asarray(log_density(pts), dtype=float).reshape(axes[0].m)
        else:
            c0, c1 = axes[0].centers, axes[1].centers
            g0, g1 = np.meshgrid(c0, c1, indexing="ij")
            pts = np.column_stack([g0.ravel(), g1.ravel()])
            logmass = np.asarray(log_density(pts), dtype=float).reshape(axes[0].m, axes[1].m)
        return cls(axes=axes, logmass=logmass)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    def centers(self) -> np.ndarray:
        """Cell centers as an (K, ndim) array in C order."""
        if self.ndim == 1:
            return self.axes[0].centers[:, None]
        g0, g1 = np.meshgrid(self.axes[0].centers, self.axes[1].centers, indexing="ij")
        return np.column_stack([g0.ravel(), g1.ravel()])

    def marginal(self, axis: int = 0) -> "GridDensity":
        if self.ndim != 2:
            raise ValueError("marginal is defined for 2-D grids")
        other = 1 - axis
        mass = self.mass.sum(axis=other)
        with np.errstate(divide="ignore"):
            logm = np.log(mass)
        return GridDensity(axes=(self.axes[axis],), logmass=logm)


@dataclass
class LemmaReport:
    """Outcome of one numeric inequality check.

    worst_margin >= -tol means every tested instance satisfied the claimed
    inequality; the witness pins down the worst instance so it can be
    reproduced from the recorded seed.
    """

    lemma: str
    instances: int
    worst_margin: float
    witness: dict
    passed: bool
    seed: int | None = None
    skipped: int = 0
    gate: bool = True  # observational reports set gate=False
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "instances": self.instances,
            "worst_margin": self.worst_margin,
            "witness": self.witness,
            "passed": self.passed,
            "seed": self.seed,
            "skipped": self.skipped,
            "gate": self.gate,
            "details": self.details,
        }

    def save(self, path, manifest_hash: str | None = None) -> None:
        obj = self.to_dict()
        if manifest_hash is not None:
            obj["manifest"] = manifest_hash
        with open(Path(path), "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True, default=float)
            fh.write("\n")


# -- Poincare constant ------------------------------------------------------


def _neumann_matrix_1d(mass: np.ndarray, h: float):
    """Diagonal and off-diagonal of D^{-1/2} A D^{-1/2} for the 1-D chain."""
    w = 0.5 * (mass[:-1] + mass[1:]) / h**2  # edge conductances
    diag = np.zeros_like(mass)
    diag[:-1] += w
    diag[1:] += w
    diag = diag / mass
    off = -w / np.sqrt(mass[:-1] * mass[1:])
    return diag, off


def _spectral_gap_1d(mass: np.ndarray, h: float) -> float:
    if mass.size < 2:
        raise ValueError("degenerate support: need at least two cells")
    if np.any(mass <= 0):
        raise ValueError("grid density must be strictly positive for the eigensolve")
    diag, off = _neumann_matrix_1d(mass, h)
    vals = scipy.linalg.eigh_tridiagonal(diag, off, select="i", select_range=(0, 1), eigvals_only=True)
    return float(vals[1])


def _spectral_gap_2d(mass: np.ndarray, hx: float, hy: float) -> float:
    mx, my = mass.shape
    if mx * my < 2:
        raise ValueError("degenerate support: need at least two cells")
    if np.any(mass <= 0):
        raise ValueError("grid density must be strictly positive for the eigensolve")
    p = mass.ravel()
    idx = np.arange(mx * my).reshape(mx, my)

    rows, cols, vals = [], [], []

    def add_edges(a, b, w):
        rows.extend([a, b])
        cols.extend([b, a])
        vals.extend([-w, -w])

    wx = 0.5 * (mass[:-1, :] + mass[1:, :]) / hx**2
    wy = 0.5 * (mass[:, :-1] + mass[:, 1:]) / hy**2
    ax, bx = idx[:-1, :].ravel(), idx[1:, :].ravel()
    ay, by = idx[:, :-1].ravel(), idx[:, 1:].ravel()
    add_edges(ax, bx, wx.ravel())
    add_edges(ay, by, wy.ravel())

    rows = np.concatenate([np.asarray(r).ravel() for r in rows])
    cols = np.concatenate([np.asarray(c).ravel() for c in cols])
    vals = np.concatenate([np.asarray(v).ravel() for v in vals])
    degree = np.zeros(mx * my)
    np.add.at(degree, rows, -vals)

    A = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(mx * my, mx * my)).tocsr()
    A = A + scipy.sparse.diags(degree)
    dinv = 1.0 / np.sqrt(p)
    B = scipy.sparse.diags(dinv) @ A @ scipy.sparse.diags(dinv)
    B = (B + B.T) * 0.5

    scale = float(np.mean(B.diagonal()))
    vals2 = scipy.sparse.linalg.eigsh(
        B.tocsc(), k=2, sigma=-1e-9 * scale, which="LM", return_eigenvectors=False
    )
    return float(np.max(vals2))


def poincare_constant(gd: GridDensity) -> float:
    """1 / (smallest nonzero eigenvalue) of the weighted Neumann Laplacian.

    For a standard Gaussian this converges to 1, for the uniform law on
    [0, L] to L^2 / pi^2.
    """
    if gd.ndim == 1:
        gap = _spectral_gap_1d(gd.mass, gd.axes[0].step)
    else:
        gap = _spectral_gap_2d(gd.mass, gd.axes[0].step, gd.axes[1].step)
    return 1.0 / gap


# -- Cheeger constant -------------------------------------------------------


def cheeger_constant(gd: GridDensity) -> float:
    """Bottleneck ratio of the grid density.

    1-D: exact minimum over the m - 1 interval cuts of
    (boundary density) / min(side masses).  2-D: an upper bound obtained
    from vertical, horizontal, and density-level-set cuts (the exact
    constant is NP-hard; callers must treat the 2-D value as an upper
    bound).
    """
    if gd.ndim == 1:
        mass = gd.mass
        if mass.size < 2:
            raise ValueError("degenerate support")
        h = gd.axes[0].step
        dens_edge = 0.5 * (mass[:-1] + mass[1:]) / h
        left = np.cumsum(mass)[:-1]
        side = np.minimum(left, 1.0 - left)
        ok = side > 0
        if not ok.any():
            raise ValueError("degenerate support")
        return float(np.min(dens_edge[ok] / side[ok]))

    mass = gd.mass
    mx, my = mass.shape
    if mx * my > 64 * 64:
        raise ValueError(f"2-D Cheeger search is limited to 64x64 cells, got {mx}x{my}")
    hx, hy = gd.axes[0].step, gd.axes[1].step

    def ratio(sel: np.ndarray) -> float:
        inside = float(mass[sel].sum())
        side = min(inside, 1.0 - inside)
        if side <= 0.0:
            return np.inf
        cutx = sel[:-1, :] != sel[1:, :]
        cuty = sel[:, :-1] != sel[:, 1:]
        bx = 0.5 * (mass[:-1, :] + mass[1:, :]) / (hx * hy)  # face densities
        by = 0.5 * (mass[:, :-1] + mass[:, 1:]) / (hx * hy)
        boundary = float((bx * cutx).sum() * hy + (by * cuty).sum() * hx)
        return boundary / side

    best = np.inf
    for i in range(1, mx):
        sel = np.zeros_like(mass, dtype=bool)
        sel[:i, :] = True
        best = min(best, ratio(sel))
    for j in range(1, my):
        sel = np.zeros_like(mass, dtype=bool)
        sel[:, :j] = True
        best = min(best, ratio(sel))
    levels = np.quantile(mass, np.linspace(0.02, 0.98, 97))
    for t in np.unique(levels):
        sel = mass >= t
        if sel.any() and not sel.all():
            best = min(best, ratio(sel))
    return float(best)


# -- combination of marginal and conditional Poincare inequalities ----------


def check_poincare_combination(joint: GridDensity, tol: float = PASS_TOL, mass_floor: float = 1e-14) -> LemmaReport:
    """Test C_joint <= 2 (C1 + C2 + C1 C2 L^2) on a 2-D grid density.

    C1 is the Poincare constant of the first-axis marginal, C2 the max over
    columns of the conditional constants, and L the max finite-difference
    gradient of log pi(x2 | x1) across adjacent columns (restricted to cells
    with mass above `mass_floor`, mirroring the truncation the bound itself
    assumes).
    """
    if joint.ndim != 2:
        raise ValueError("combination check needs a 2-D density")
    mass = joint.mass
    col = mass.sum(axis=1)
    if np.any(col <= 0):
        raise ValueError("conditional undefined: a column has zero mass")

    h1 = joint.axes[0].step
    C1 = 1.0 / _spectral_gap_1d(col, h1)

    C2 = 0.0
    worst_col = 0
    for i in range(mass.shape[0]):
        c = 1.0 / _spectral_gap_1d(mass[i] / col[i], joint.axes[1].step)
        if c > C2:
            C2, worst_col = c, i
    logcond = np.log(np.maximum(mass, 1e-320)) - np.log(col)[:, None]
    live = (mass[:-1, :] > mass_floor) & (mass[1:, :] > mass_floor)
    grad = np.abs(logcond[1:, :] - logcond[:-1, :]) / h1
    L = float(grad[live].max()) if live.any() else 0.0

    C_joint = poincare_constant(joint)
    bound = 2.0 * (C1 + C2 + C1 * C2 * L**2)
    margin = bound - C_joint
    return LemmaReport(
        lemma="poincare-combination",
        instances=1,
        worst_margin=float(margin),
        witness={"C1": C1, "C2": C2, "L": L, "C_joint": C_joint, "bound": bound, "worst_column": worst_col},
        passed=bool(margin >= -tol),
    )


# -- quasi-concave partition inequality --------------------------------------


def is_unimodal(mass: np.ndarray, tol: float) -> bool:
    """Single sign change of first differences, ignoring |diff| <= tol."""
    d = np.diff(mass)
    signs = np.sign(d[np.abs(d) > tol])
    if signs.size == 0:
        return True
    drops = np.flatnonzero(np.diff(signs) != 0)
    return drops.size <= 1 and (drops.size == 0 or (signs[0] > 0 > signs[-1]))


def check_quasiconcave_isoperimetry(
    gd: GridDensity, partitions: int, seed: int, tol: float = PASS_TOL
) -> LemmaReport:
    """Random three-interval partitions [0,a) | (a,b) | (b,A] of a unimodal law.

    For each partition the separator mass pi(S3) must be at least
    dist(S1, S2)/A * min(pi(S1), pi(S2)).
    """
    if gd.ndim != 1:
        raise ValueError("partition check is one-dimensional")
    mass = gd.mass
    m = mass.size
    if not is_unimodal(mass, tol=1e-12 * mass.max()):
        raise ValueError("density failed the unimodality pre-check")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    h = gd.axes[0].step
    length = gd.axes[0].length
    cum = np.concatenate([[0.0], np.cumsum(mass)])

    lo = rng.integers(1, m, size=partitions)
    hi = rng.integers(1, m, size=partitions)
    i = np.minimum(lo, hi)
    j = np.maximum(lo, hi)
    pi_s1 = cum[i]
    pi_s3 = cum[j] - cum[i]
    pi_s2 = 1.0 - cum[j]
    dist = (j - i) * h
    margins = pi_s3 - (dist / length) * np.minimum(pi_s1, pi_s2)
    k = int(np.argmin(margins))
    return LemmaReport(
        lemma="quasi-concave-partition",
        instances=partitions,
        worst_margin=float(margins[k]),
        witness={"cut_lo": int(i[k]), "cut_hi": int(j[k]), "pi_s1": float(pi_s1[k]), "pi_s2": float(pi_s2[k]), "pi_s3": float(pi_s3[k])},
        passed=bool(margins[k] >= -tol),
        seed=seed,
    )


# -- structure of the population posterior ----------------------------------


def check_structure(
    pp,
    axes,
    tol_unimodal: float = 1e-9,
    tol_logconcave: float = 1e-8,
) -> LemmaReport:
    """Half-cylinder structure of the population posterior in d = 2.

    Builds exp(-U0) on [0, A] x [-M, M] and verifies (i) the first-axis
    marginal is unimodal and (ii) every conditional column is log-concave
    (nonpositive second differences of log mass).
    """
    axes = tuple(axes)
    if pp.d != 2:
        raise ValueError("structure check requires a 2-dimensional posterior")
    theta0 = pp.spec.theta0
    if abs(theta0[1]) > 0:
        raise ValueError("structure check assumes theta0 = a0 * e1")
    if any(ax.m < 200 for ax in axes):
        raise ValueError("grid too coarse: need at least 200 points per axis")
    if axes[0].lo < 0:
        raise ValueError("first axis must live on x1 >= 0")

    gd = GridDensity.from_log_density(lambda pts: -pp.population_potential_batch(pts), axes)

    marg = gd.mass.sum(axis=1)
    marg = marg / marg.sum()
    d1 = np.diff(marg)
    peak = int(np.argmax(marg))
    rising_viol = float(np.max(-d1[:peak], initial=0.0))
    falling_viol = float(np.max(d1[peak:], initial=0.0))
    margin_unimodal = -max(rising_viol, falling_viol)

    d2 = np.diff(gd.logmass, n=2, axis=1)
    worst = np.unravel_index(int(np.argmax(d2)), d2.shape)
    margin_logconcave = -float(d2[worst])

    passed = margin_unimodal >= -tol_unimodal and margin_logconcave >= -tol_logconcave
    return LemmaReport(
        lemma="population-structure",
        instances=int(gd.mass.shape[0] * (gd.mass.shape[1] - 2) + marg.size - 1),
        worst_margin=float(min(margin_unimodal, margin_logconcave)),
        witness={
            "marginal_peak_x1": float(gd.axes[0].centers[peak]),
            "logconcavity_worst_x1": float(gd.axes[0].centers[worst[0]]),
            "logconcavity_worst_x2": float(gd.axes[1].centers[worst[1] + 1]),
        },
        passed=bool(passed),
        details={
            "margin_unimodal": float(margin_unimodal),
            "margin_logconcave": float(margin_logconcave),
            "tol_unimodal": tol_unimodal,
            "tol_logconcave": tol_logconcave,
            "a0": float(theta0[0]),
            "beta": pp.beta,
            "grid": [(ax.lo, ax.hi, ax.m) for ax in axes],
        },
    )

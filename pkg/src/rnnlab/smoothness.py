"""Growth laws of the cost and its gradient, and landscape sweeps.

The closed-form calculators evaluate how the Lipschitz constants of the
cost V and of its gradient grow with the simulation length N, driven by
the transition Lipschitz constant L_f:

    L_V  : O(1) if L_f < 1,  O(N)   if L_f = 1,  O(L_f^{2N}) if L_f > 1
    L_V' : O(1) if L_f < 1,  O(N^3) if L_f = 1,  O(L_f^{3N}) if L_f > 1

The empirical side estimates the same constants from sampled parameter
pairs, and the landscape sweeps evaluate the cost along 1-D or 2-D
parameter rays.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteState
from .sensitivity import SQUARED_ERROR, cost, gradient

# ---------------------------------------------------------------------------
# closed-form bound calculators
# ---------------------------------------------------------------------------

MARGINAL_TOL = 1e-12  # |L_f - 1| below this counts as the marginal regime


def regime_of(L_f) -> str:
    if abs(L_f - 1.0) <= MARGINAL_TOL:
        return "marginal"
    return "contractive" if L_f < 1.0 else "expanding"


def bound_S(L_f, t) -> float:
    """Accumulated trajectory-divergence factor sqrt(sum_{l=0..t} L_f^{2l}).

    Equals sqrt(t+1) at L_f = 1 and sqrt((L_f^{2t+2}-1)/(L_f^2-1))
    otherwise; evaluated in the log domain for L_f > 1 so large t does
    not overflow intermediate powers.
    """
    if L_f <= 0:
        raise ValueError("L_f must be positive")
    if t < 0:
        raise ValueError("t must be >= 0")
    return math.exp(log_bound_S(L_f, t))


def log_bound_S(L_f, t) -> float:
    if abs(L_f - 1.0) <= MARGINAL_TOL:
        return 0.5 * math.log(t + 1.0)
    if L_f < 1.0:
        return 0.5 * (math.log1p(-L_f ** (2 * t + 2)) - math.log1p(-L_f ** 2))
    # L_f > 1: log((L_f^{2t+2} - 1)/(L_f^2 - 1)) without forming the power
    lead = (2 * t + 2) * math.log(L_f)
    return 0.5 * (lead + math.log1p(-math.exp(-lead)) - math.log(L_f ** 2 - 1.0))


@dataclass(frozen=True)
class SmoothnessConstants:
    """Inputs of the bound calculators.

    ``M_scale`` sets the bound M(t) on the output magnitude as
    M(t) = M_scale * S(t); the default 1 preserves the asymptotic classes,
    which is all downstream checks rely on.
    """

    L_f: float
    N: int
    L_g: float = 1.0
    L_f_prime: float = 1.0
    L_g_prime: float = 1.0
    K1: float = 2.0
    K2: float = 2.0
    K3: float = 2.0
    K4: float = 2.0
    L_y: float = 1.0
    M_scale: float = 1.0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.L_f <= 0:
            raise ValueError("L_f must be positive")

    @property
    def regime(self):
        return regime_of(self.L_f)

    def S_table(self):
        return np.array([bound_S(self.L_f, t) for t in range(self.N + 1)])


def bound_L_V(c: SmoothnessConstants) -> float:
    """Pre-asymptotic Lipschitz bound of the cost:

        L_V = (L_g / N) * sum_{t=1..N} (K1 L_y + K2 M(t)) S(t)
    """
    S = c.S_table()
    t = np.arange(1, c.N + 1)
    M = c.M_scale * S[t]
    total = np.sum((c.K1 * c.L_y + c.K2 * M) * S[t])
    return float(c.L_g / c.N * total)


def bound_L_V_prime(c: SmoothnessConstants) -> float:
    """Pre-asymptotic Lipschitz bound of the cost gradient.

    Per-step output-Jacobian constants are assembled from the inner sums

        P(t, l) = L_f^{t-l} (L_g L_f' sum_{j=l..t} S(j) + L_f L_g' S(t))
        Q(t, l) = L_f^{t-l} (K4 M(t) L_g L_f' sum_{j=l..t} S(j) + L_f T(t) S(t))
        T(t)    = K4 (L_g' M(t) + L_g^2)

    as L_J(t) = sum_l P + L_g' S(t), L_Jy(t) = sum_l Q + T(t) S(t), and

        L_V' = (1/N) sum_{t=1..N} (K3 L_y L_J(t) + L_Jy(t)).
    """
    S = c.S_table()
    cumS = np.concatenate([[0.0], np.cumsum(S)])  # cumS[k] = sum_{j=0..k-1} S(j)
    Lf = c.L_f
    total = 0.0
    for t in range(1, c.N + 1):
        Mt = c.M_scale * S[t]
        Tt = c.K4 * (c.L_g_prime * Mt + c.L_g ** 2)
        ells = np.arange(1, t + 1)
        pow_lf = Lf ** (t - ells)
        seg = cumS[t + 1] - cumS[ells]  # sum_{j=l..t} S(j)
        P = pow_lf * (c.L_g * c.L_f_prime * seg + Lf * c.L_g_prime * S[t])
        Q = pow_lf * (c.K4 * Mt * c.L_g * c.L_f_prime * seg + Lf * Tt * S[t])
        L_J = float(np.sum(P)) + c.L_g_prime * S[t]
        L_Jy = float(np.sum(Q)) + Tt * S[t]
        total += c.K3 * c.L_y * L_J + L_Jy
    return float(total / c.N)


def bound_report(c: SmoothnessConstants) -> dict:
    """JSON-ready report with the S table, both bounds, and the regime."""
    return {
        "inputs": {
            "L_f": c.L_f, "N": c.N, "L_g": c.L_g,
            "L_f_prime": c.L_f_prime, "L_g_prime": c.L_g_prime,
            "K1": c.K1, "K2": c.K2, "K3": c.K3, "K4": c.K4,
            "L_y": c.L_y, "M_scale": c.M_scale,
        },
        "S_table": c.S_table().tolist(),
        "L_V": bound_L_V(c),
        "L_V_prime": bound_L_V_prime(c),
        "regime": c.regime,
    }


# ---------------------------------------------------------------------------
# empirical Lipschitz estimation
# ---------------------------------------------------------------------------

PAIR_SCALES = (1e-2, 1e-4, 1e-6)  # local perturbation scales, plus global pairs


@dataclass
class EmpiricalLipschitz:
    L_V_hat: float
    L_V_prime_hat: float
    n_pairs_used: int
    n_divergent: int


def empirical_lipschitz_V(model_family, dataset, loss=SQUARED_ERROR,
                          theta_low=None, theta_high=None, n_pairs=50,
                          rng_seed=0, with_gradient=True) -> EmpiricalLipschitz:
    """Sampled lower bound on the Lipschitz constants of V and grad V.

    Draws ``n_pairs`` pairs from the theta box: one quarter globally, the
    rest at fixed perturbation scales around box points (a pure global
    max badly underestimates the local spikes near chaotic regions).
    Deterministic for a given seed; divergent evaluations are skipped and
    counted.  ``model_family`` maps a flat theta to a model.
    """
    if n_pairs < 10:
        raise ValueError("n_pairs must be >= 10")
    lo = np.asarray(theta_low, dtype=float)
    hi = np.asarray(theta_high, dtype=float)
    rng = np.random.default_rng(rng_seed)

    def eval_point(theta):
        try:
            m = model_family(theta)
            v = cost(m, dataset, loss)
            if not np.isfinite(v):
                return None
            if with_gradient:
                g = gradient(m, dataset, loss)
                if not np.all(np.isfinite(g)):
                    return None
                return v, g
            return v, None
        except (NonFiniteState, FloatingPointError):
            return None

    best_v = 0.0
    best_g = 0.0
    used = 0
    divergent = 0
    scales = [None] + list(PAIR_SCALES)
    for k in range(int(n_pairs)):
        scale = scales[k % len(scales)]
        a = rng.uniform(lo, hi)
        if scale is None:
            b = rng.uniform(lo, hi)
        else:
            b = a + scale * rng.standard_normal(lo.size)
        dist = float(np.linalg.norm(a - b))
        if dist == 0.0:
            continue
        ra = eval_point(a)
        rb = eval_point(b)
        if ra is None or rb is None:
            divergent += 1
            continue
        used += 1
        best_v = max(best_v, abs(ra[0] - rb[0]) / dist)
        if with_gradient:
            best_g = max(best_g, float(np.linalg.norm(ra[1] - rb[1])) / dist)
    return EmpiricalLipschitz(
        L_V_hat=best_v, L_V_prime_hat=best_g, n_pairs_used=used, n_divergent=divergent
    )


# ---------------------------------------------------------------------------
# landscape sweeps
# ---------------------------------------------------------------------------


@dataclass
class LandscapeGrid:
    """Cost over a 1-D or 2-D grid of parameter-ray coordinates.

    ``values`` is (n1,) or (n1, n2); divergent points are NaN and listed
    in ``divergent`` (grid indices), since divergence is itself a
    landscape feature.
    """

    axes_names: list
    coords: list            # list of 1-D arrays, one per axis
    values: np.ndarray
    gradient_norms: np.ndarray | None
    divergent: list

    @property
    def ndim(self):
        return len(self.coords)

    def to_csv(self, path, meta=None):
        lines = []
        if meta:
            for k, v in meta.items():
                lines.append(f"# {k}={v}")
        if self.ndim == 1:
            header = "s1,V" + (",gradnorm" if self.gradient_norms is not None else "")
            lines.append(header)
            for i, s in enumerate(self.coords[0]):
                row = [repr(float(s)), repr(float(self.values[i]))]
                if self.gradient_norms is not None:
                    row.append(repr(float(self.gradient_norms[i])))
                lines.append(",".join(row))
        else:
            header = "s1,s2,V" + (",gradnorm" if self.gradient_norms is not None else "")
            lines.append(header)
            for i, s1 in enumerate(self.coords[0]):
                for j, s2 in enumerate(self.coords[1]):
                    row = [repr(float(s1)), repr(float(s2)),
                           repr(float(self.values[i, j]))]
                    if self.gradient_norms is not None:
                        row.append(repr(float(self.gradient_norms[i, j])))
                    lines.append(",".join(row))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def landscape_sweep(model_family, dataset, loss, axes, ranges, resolution,
                    with_gradient=False, threads=1) -> LandscapeGrid:
    """Cost over theta(s) = sum_i s_i * axis_i.

    ``axes`` is a list of 1 or 2 (name, direction-vector) pairs; ranges
    and resolution apply per axis.  ``model_family`` maps a flat theta to
    a model.
    """
    if not 1 <= len(axes) <= 2:
        raise ValueError("need 1 or 2 axes")
    if np.isscalar(resolution):
        resolution = [int(resolution)] * len(axes)
    if any(r < 2 for r in resolution):
        raise ValueError("resolution must be >= 2 per axis")
    names = [a[0] for a in axes]
    dirs = [np.asarray(a[1], dtype=float) for a in axes]
    coords = [np.linspace(lo, hi, r) for (lo, hi), r in zip(ranges, resolution)]

    if len(axes) == 1:
        points = [(i, s * dirs[0]) for i, s in enumerate(coords[0])]
        shape = (resolution[0],)
    else:
        points = []
        for i, s1 in enumerate(coords[0]):
            for j, s2 in enumerate(coords[1]):
                points.append(((i, j), s1 * dirs[0] + s2 * dirs[1]))
        shape = tuple(resolution)

    values = np.full(shape, np.nan)
    gnorms = np.full(shape, np.nan) if with_gradient else None
    divergent = []

    def run(item):
        idx, theta = item
        try:
            m = model_family(theta)
            v = cost(m, dataset, loss)
            g = float(np.linalg.norm(gradient(m, dataset, loss))) if with_gradient else None
            if not np.isfinite(v):
                return idx, None, None
            return idx, v, g
        except (NonFiniteState, FloatingPointError):
            return idx, None, None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, points))
    else:
        results = [run(p) for p in points]

    for idx, v, g in results:
        if v is None:
            divergent.append(idx)
            continue
        values[idx] = v
        if with_gradient and g is not None:
            gnorms[idx] = g
    return LandscapeGrid(
        axes_names=names, coords=coords, values=values,
        gradient_norms=gnorms, divergent=divergent,
    )


def local_minima_census(grid: LandscapeGrid):
    """Strict interior local minima of a 1-D sampled landscape."""
    if grid.ndim != 1:
        raise ValueError("census requires a 1-D grid")
    v = grid.values
    if v.size < 3:
        raise ValueError("need at least 3 grid points")
    locations = []
    for i in range(1, v.size - 1):
        if np.isnan(v[i - 1]) or np.isnan(v[i]) or np.isnan(v[i + 1]):
            continue
        if v[i] < v[i - 1] and v[i] < v[i + 1]:
            locations.append(i)
    return {"count": len(locations), "locations": locations,
            "coords": [float(grid.coords[0][i]) for i in locations]}

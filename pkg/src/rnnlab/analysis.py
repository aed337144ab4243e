"""Attractor and information analysis.

Bifurcation diagrams collect the values a scalar projection of the
steady state visits (after a burn-in) as a function of a sweep scalar:
either a parameter-ray coordinate or a training epoch.  Attractors are
classified from those samples; entropy evolution is computed analytically
for linear-Gaussian propagation, where the per-step increment is exactly
log|det A|.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteState, SingularMatrix, TooFewSamples
from .statespace import argmax_onehot_feedback, simulate, simulate_closed_loop

# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Projection:
    """Named map from (state, output) to a scalar."""

    name: str
    fn: callable = field(repr=False)

    def __call__(self, state, output):
        return float(self.fn(state, output))


def make_projection(spec, direction=None) -> Projection:
    """Built-in projections: ``output:<i>``, ``state_mean``, ``state_dot``.

    ``state_dot`` projects onto an explicit direction vector (normalized
    dot product is not applied; it is a plain inner product).
    """
    if isinstance(spec, Projection):
        return spec
    if spec == "state_mean":
        return Projection("state_mean", lambda x, y: np.mean(x))
    if spec.startswith("output"):
        idx = int(spec.split(":", 1)[1]) if ":" in spec else 0
        return Projection(f"output:{idx}", lambda x, y: y[idx])
    if spec == "state_dot":
        if direction is None:
            raise ValueError("state_dot projection needs a direction vector")
        d = np.asarray(direction, dtype=float)
        return Projection("state_dot", lambda x, y: float(np.dot(x, d)))
    raise ValueError(f"unknown projection {spec!r}")


# ---------------------------------------------------------------------------
# bifurcation diagrams
# ---------------------------------------------------------------------------


@dataclass
class SteadyStateSamples:
    """Recorded steady-state points for one sweep value."""

    sweep_value: float
    p: np.ndarray        # projected values, one per recorded step
    dp: np.ndarray       # first differences p[t] - p[t-1]
    diverged: bool = False
    diverged_step: int | None = None


@dataclass
class BifurcationDiagram:
    sweep: list
    samples: list            # list[SteadyStateSamples], one per sweep value
    config: dict

    def to_csv(self, path, meta=None):
        lines = []
        if meta:
            for k, v in meta.items():
                lines.append(f"# {k}={v}")
        lines.append("sweep,p,dp")
        for s in self.samples:
            if s.diverged:
                lines.append(f"{s.sweep_value!r},diverged,diverged")
                continue
            for p, dp in zip(s.p, s.dp):
                lines.append(f"{s.sweep_value!r},{p!r},{dp!r}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def _steady_state(model, u, x0, burn_in, record, projection, feedback=None):
    total = burn_in + record
    try:
        if feedback is None:
            inputs = np.tile(np.asarray(u, dtype=float).reshape(model.input_dim), (total, 1))
            traj = simulate(model, x0, inputs)
        else:
            traj = simulate_closed_loop(model, x0, u, total, feedback)
    except NonFiniteState as err:
        return None, err.step
    start = max(burn_in - 1, 0)
    p_all = np.array(
        [projection(traj.states[t], traj.outputs[t]) for t in range(start, total)]
    )
    if burn_in >= 1:
        # p_all[0] is the last burn-in point, kept only to difference against
        p = p_all[1:]
        dp = p_all[1:] - p_all[:-1]
    else:
        p = p_all
        dp = np.concatenate([[0.0], p_all[1:] - p_all[:-1]])
    return (p, dp), None


def bifurcation_sweep(model_family, s_values, u_const, x0, burn_in=100,
                      record=100, projection="output:0", threads=1) -> BifurcationDiagram:
    """Steady-state samples of ``model_family(s)`` for each sweep value.

    For each s the model is simulated ``burn_in + record`` steps from x0
    under the constant input; the last ``record`` projected values and
    their first differences are recorded.  Divergent sweep values are
    kept as markers so the rest of the diagram still renders.
    """
    if record < 1:
        raise ValueError("record must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    proj = make_projection(projection)
    s_values = [float(s) for s in s_values]
    x0 = np.asarray(x0, dtype=float)

    def run(s):
        model = model_family(s)
        got, step = _steady_state(model, u_const, x0, burn_in, record, proj)
        if got is None:
            return SteadyStateSamples(s, np.empty(0), np.empty(0), True, step)
        return SteadyStateSamples(s, got[0], got[1])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(run, s_values))
    else:
        samples = [run(s) for s in s_values]
    cfg = {
        "burn_in": burn_in,
        "record": record,
        "projection": proj.name,
        "sweep_kind": "parameter",
    }
    return BifurcationDiagram(sweep=s_values, samples=samples, config=cfg)


def epoch_bifurcation(snapshots, base_model, u_const, x0, burn_in=1200,
                      record=200, projection="output:0", feedback="none",
                      threads=1) -> BifurcationDiagram:
    """Bifurcation diagram over training epochs.

    ``snapshots`` is a list of (epoch, flat theta).  With
    ``feedback="argmax"`` the simulation runs closed-loop, feeding back a
    one-hot of the largest output; the supplied constant input seeds the
    loop.
    """
    snapshots = list(snapshots)
    if not snapshots:
        raise ValueError("need at least one snapshot")
    proj = make_projection(projection)
    x0 = np.asarray(x0, dtype=float)
    fb = None
    if feedback == "argmax":
        fb = argmax_onehot_feedback(base_model.input_dim)
    elif feedback not in (None, "none"):
        raise ValueError("feedback must be 'none' or 'argmax'")

    def run(item):
        epoch, theta = item
        model = base_model.with_params(theta)
        got, step = _steady_state(model, u_const, x0, burn_in, record, proj, fb)
        if got is None:
            return SteadyStateSamples(float(epoch), np.empty(0), np.empty(0), True, step)
        return SteadyStateSamples(float(epoch), got[0], got[1])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(run, snapshots))
    else:
        samples = [run(item) for item in snapshots]
    cfg = {
        "burn_in": burn_in,
        "record": record,
        "projection": proj.name,
        "sweep_kind": "epoch",
        "feedback": feedback,
    }
    return BifurcationDiagram(
        sweep=[float(e) for e, _ in snapshots], samples=samples, config=cfg
    )


# ---------------------------------------------------------------------------
# attractor classification
# ---------------------------------------------------------------------------

LYAPUNOV_TOL = 1e-3


@dataclass
class AttractorClass:
    kind: str                 # "fixed_point" | "periodic" | "quasiperiodic_or_chaotic"
    period: int | None = None
    n_distinct: int = 0
    lyapunov: float | None = None

    @property
    def is_fixed_point(self):
        return self.kind == "fixed_point"

    @property
    def is_chaotic(self):
        return (
            self.kind == "quasiperiodic_or_chaotic"
            and self.lyapunov is not None
            and self.lyapunov > LYAPUNOV_TOL
        )


def classify_attractor(samples, tol=1e-6, lyapunov=None) -> AttractorClass:
    """Classify steady-state samples rounded to a tol-grid.

    One distinct value -> fixed point; k distinct values recurring with
    exact period k (k at most half the sample count) -> periodic(k);
    anything else -> quasiperiodic_or_chaotic, with a positive supplied
    Lyapunov exponent marking it chaotic.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size < 8:
        raise TooFewSamples("need at least 8 steady-state samples")
    keys = np.round(samples / tol).astype(np.int64)
    n_distinct = len(np.unique(keys))
    if n_distinct == 1:
        return AttractorClass("fixed_point", period=1, n_distinct=1, lyapunov=lyapunov)
    n = keys.size
    if n_distinct <= n // 2:
        for k in range(2, n // 2 + 1):
            if np.all(keys[k:] == keys[:-k]):
                return AttractorClass(
                    "periodic", period=k, n_distinct=n_distinct, lyapunov=lyapunov
                )
    return AttractorClass(
        "quasiperiodic_or_chaotic", n_distinct=n_distinct, lyapunov=lyapunov
    )


# ---------------------------------------------------------------------------
# entropy of linear-Gaussian propagation
# ---------------------------------------------------------------------------


@dataclass
class EntropyTrace:
    H: np.ndarray            # entropies (nats) at t = 0..T
    increments: np.ndarray   # H[t+1] - H[t], all equal to log|det A|
    log_abs_det_A: float
    n_states: int


def entropy_linear_gaussian(A, sigma0, T) -> EntropyTrace:
    """Differential entropy along x[t+1] = A x[t] with Gaussian x[0].

    H[t] = 0.5 * log((2 pi e)^n det Sigma[t]) with Sigma[t+1] = A Sigma A^T,
    so the increment per step is exactly log|det A|, independent of t and
    of the initial covariance.
    """
    A = np.asarray(A, dtype=float)
    sigma0 = np.asarray(sigma0, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or sigma0.shape != (n, n):
        raise ValueError("A and sigma0 must be square and conformable")
    sign, logdet_A = np.linalg.slogdet(A)
    if sign == 0:
        raise SingularMatrix("transition matrix is singular")
    evals = np.linalg.eigvalsh(sigma0)
    if np.any(evals <= 0):
        raise ValueError("sigma0 must be positive definite")

    H = np.empty(int(T) + 1)
    sigma = sigma0
    const = n * np.log(2.0 * np.pi * np.e)
    for t in range(int(T) + 1):
        _, logdet_s = np.linalg.slogdet(sigma)
        H[t] = 0.5 * (const + logdet_s)
        sigma = A @ sigma @ A.T
    return EntropyTrace(
        H=H, increments=np.diff(H), log_abs_det_A=float(logdet_A), n_states=n
    )


@dataclass
class EntropyBoundReport:
    """Both orientations of the per-step entropy/Lipschitz inequality.

    ``upper_ok[t]``:  H[t+1] <= H[t] + n log L_f   (the direction the
    determinant/Hadamard chain supports).
    ``lower_ok[t]``:  H[t] + n log L_f <= H[t+1]   (the printed form).
    A contraction with unequal rates (e.g. A = diag(0.9, 0.1) with
    L_f = 0.9) satisfies the upper form strictly and violates the lower
    form, which is why both are reported instead of guessing.
    """

    bound_rate: float
    upper_ok: np.ndarray
    lower_ok: np.ndarray

    @property
    def upper_holds(self):
        return bool(np.all(self.upper_ok))

    @property
    def lower_holds(self):
        return bool(np.all(self.lower_ok))


def check_entropy_bound(trace: EntropyTrace, L_f, atol=1e-9) -> EntropyBoundReport:
    if L_f <= 0:
        raise ValueError("L_f must be positive")
    rate = trace.n_states * np.log(L_f)
    inc = trace.increments
    return EntropyBoundReport(
        bound_rate=float(rate),
        upper_ok=inc <= rate + atol,
        lower_ok=inc >= rate - atol,
    )


def hadamard_chain(A):
    """(log|det A|, sum_i log||col_i||, n log sigma_max) for one matrix."""
    A = np.asarray(A, dtype=float)
    sign, logdet = np.linalg.slogdet(A)
    if sign == 0:
        logdet = -np.inf
    col_norms = np.linalg.norm(A, axis=0)
    sum_log_cols = float(np.sum(np.log(col_norms)))
    n_log_sigma = A.shape[0] * float(np.log(np.linalg.norm(A, 2)))
    return float(logdet), sum_log_cols, n_log_sigma

"""Discrete-time dynamical-system contract and generic machinery.

A model is the pair of maps

    x[t+1] = f(x[t], z[t]; theta)      (state transition)
    y[t]   = g(x[t], z[t]; theta)      (output)

with analytic Jacobians A = df/dx, B = df/dtheta, C = dg/dx, F = dg/dtheta.
Everything downstream (simulation, fixed points, Lyapunov exponents,
sensitivity gradients, bifurcation diagrams, smoothness estimates) is built
on this contract, so concrete cells only implement step/output/jacobians.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyRegion, NonFiniteState
from .params import ParameterVector

log = logging.getLogger(__name__)

__version__ = "0.1.0"


class DynamicalModel:
    """Base class for concrete cells.

    Subclasses set ``state_dim``, ``input_dim``, ``output_dim`` and
    ``params`` (a :class:`ParameterVector`) and implement ``step``,
    ``output`` and ``jacobians``.  Models are immutable after
    construction; parameter updates go through :meth:`with_params`,
    which returns a new model, so instances are safe to share across
    parallel workers.
    """

    state_dim: int
    input_dim: int
    output_dim: int
    params: ParameterVector
    name = "model"

    def step(self, x, z):
        raise NotImplementedError

    def output(self, x, z):
        raise NotImplementedError

    def jacobians(self, x, z):
        """Return (A, B, C, F) evaluated at (x, z, self.params)."""
        raise NotImplementedError

    def with_params(self, values) -> "DynamicalModel":
        """New model of the same kind with a replacement flat theta."""
        raise NotImplementedError

    @property
    def n_params(self) -> int:
        return self.params.size

    def initial_state(self) -> np.ndarray:
        return np.zeros(self.state_dim)

    def _empty_input(self):
        return np.zeros(self.input_dim)


@dataclass
class Trajectory:
    """Time-indexed states/outputs/inputs from one simulation.

    ``states[t+1] == step(states[t], inputs[t])`` exactly (the simulator
    stores what ``step`` returned, no recomputation).
    """

    states: np.ndarray   # (N, N_x)
    outputs: np.ndarray  # (N, N_y)
    inputs: np.ndarray   # (N, N_z)
    t0: int = 0

    def __len__(self):
        return self.states.shape[0]

    def to_csv(self, path, meta=None):
        """Write ``t,x0..,y0..`` rows; floats use shortest round-trip repr."""
        n_x = self.states.shape[1]
        n_y = self.outputs.shape[1]
        header = ",".join(
            ["t"] + [f"x{i}" for i in range(n_x)] + [f"y{i}" for i in range(n_y)]
        )
        lines = []
        if meta:
            for k, v in meta.items():
                lines.append(f"# {k}={v}")
        lines.append(header)
        for t in range(len(self)):
            row = [str(self.t0 + t)]
            row += [repr(float(v)) for v in self.states[t]]
            row += [repr(float(v)) for v in self.outputs[t]]
            lines.append(",".join(row))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    def to_json(self, path, model_name="model", theta_hash=None, seed=None, meta=None):
        doc = {
            "format_version": 1,
            "model": model_name,
            "theta_hash": theta_hash,
            "seed": seed,
            "t0": self.t0,
            "states": self.states.tolist(),
            "outputs": self.outputs.tolist(),
            "inputs": self.inputs.tolist(),
        }
        if meta:
            doc.update(meta)
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")


def _as_input_array(model, inputs):
    if model.input_dim == 0:
        # any sequence-like stands in for its step count
        n = int(inputs) if np.isscalar(inputs) else len(inputs)
        return np.zeros((n, 0))
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim == 1:
        if model.input_dim != 1:
            raise ValueError(f"inputs must be (N, {model.input_dim})")
        inputs = inputs[:, None]
    return inputs


def simulate(model: DynamicalModel, x0, inputs) -> Trajectory:
    """Run the model forward for ``len(inputs)`` steps.

    ``states[0]`` is ``x0``; ``outputs[t] = g(states[t], inputs[t])``.
    Raises :class:`NonFiniteState` with the offending step index as soon
    as a state or output entry becomes NaN/Inf.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.state_dim,):
        raise ValueError(f"x0 must have length {model.state_dim}")
    inputs = _as_input_array(model, inputs)
    n = inputs.shape[0]
    if n < 1:
        raise ValueError("need at least one input step")

    states = np.empty((n, model.state_dim))
    outputs = np.empty((n, model.output_dim))
    x = x0
    for t in range(n):
        states[t] = x
        y = model.output(x, inputs[t])
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(t, "output")
        outputs[t] = y
        if t + 1 < n:
            x = model.step(x, inputs[t])
            if not np.all(np.isfinite(x)):
                raise NonFiniteState(t + 1)
    return Trajectory(states=states, outputs=outputs, inputs=inputs)


def simulate_closed_loop(model, x0, z0, horizon, feedback) -> Trajectory:
    """Simulate with the output fed back into the input.

    ``z[t+1] = feedback(y[t])`` where ``y[t] = g(x[t], z[t])``; the pair
    ``(x, y)`` plays the role of an extended state, so attractors of this
    loop may differ from those of the constant-input map.
    """
    x0 = np.asarray(x0, dtype=float)
    z = np.asarray(z0, dtype=float).reshape(model.input_dim)
    n = int(horizon)
    if n < 1:
        raise ValueError("horizon must be >= 1")
    states = np.empty((n, model.state_dim))
    outputs = np.empty((n, model.output_dim))
    inputs = np.empty((n, model.input_dim))
    x = x0
    for t in range(n):
        states[t] = x
        inputs[t] = z
        y = model.output(x, z)
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(t, "output")
        outputs[t] = y
        if t + 1 < n:
            x = model.step(x, z)
            if not np.all(np.isfinite(x)):
                raise NonFiniteState(t + 1)
            z = np.asarray(feedback(y), dtype=float).reshape(model.input_dim)
            if not np.all(np.isfinite(z)):
                raise NonFiniteState(t + 1, "input")
    return Trajectory(states=states, outputs=outputs, inputs=inputs)


def argmax_onehot_feedback(n_inputs: int):
    """Feedback map: one-hot of the largest output coordinate."""

    def fb(y):
        z = np.zeros(n_inputs)
        z[int(np.argmax(y[:n_inputs] if len(y) >= n_inputs else y))] = 1.0
        return z

    return fb


# ---------------------------------------------------------------------------
# fixed points
# ---------------------------------------------------------------------------

STABILITY_MARGIN = 1e-3  # spectral-radius band treated as marginal


@dataclass
class FixedPoint:
    x_star: np.ndarray
    residual: float
    jacobian_spectral_radius: float
    stability: str  # "stable" | "unstable" | "marginal"


def _spectral_radius(A):
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def _classify_stability(rho, margin=STABILITY_MARGIN):
    if rho < 1.0 - margin:
        return "stable"
    if rho > 1.0 + margin:
        return "unstable"
    return "marginal"


def find_fixed_points(model, u_const, seeds, tol=1e-10, max_iter=100):
    """Newton iteration on r(x) = f(x, u) - x from every seed.

    Converged roots are deduplicated at distance ``10 * tol`` and
    classified by the spectral radius of A at the root.  Seeds that do
    not converge are logged and skipped; a singular Newton step falls
    back to damped fixed-point iteration.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    seeds = [np.asarray(s, dtype=float) for s in seeds]
    if not seeds:
        raise ValueError("need at least one seed")
    u = np.asarray(u_const, dtype=float).reshape(model.input_dim)
    eye = np.eye(model.state_dim)

    roots = []
    for k, seed in enumerate(seeds):
        x = seed.copy()
        converged = False
        for _ in range(max_iter):
            fx = model.step(x, u)
            r = fx - x
            if not np.all(np.isfinite(r)):
                break
            if np.linalg.norm(r) < tol:
                converged = True
                break
            A, _, _, _ = model.jacobians(x, u)
            try:
                dx = np.linalg.solve(A - eye, -r)
            except np.linalg.LinAlgError:
                dx = 0.5 * r  # damped fixed-point fallback
            x = x + dx
        if not converged:
            log.debug("fixed-point seed %d did not converge", k)
            continue
        if any(np.linalg.norm(x - fp.x_star) < 10 * tol for fp in roots):
            continue
        A, _, _, _ = model.jacobians(x, u)
        rho = _spectral_radius(A)
        residual = float(np.linalg.norm(model.step(x, u) - x))
        roots.append(
            FixedPoint(
                x_star=x,
                residual=residual,
                jacobian_spectral_radius=rho,
                stability=_classify_stability(rho),
            )
        )
    return roots


# ---------------------------------------------------------------------------
# Lipschitz estimation
# ---------------------------------------------------------------------------


@dataclass
class Region:
    """Box over states and, optionally, parameters.

    When the parameter box is absent the transition map is treated as a
    function of the state alone (theta frozen) and only the A block
    enters the Jacobian norm; with a parameter box the joint (x, theta)
    Jacobian [A | B] is used.
    """

    x_low: np.ndarray
    x_high: np.ndarray
    theta_low: np.ndarray | None = None
    theta_high: np.ndarray | None = None

    def __post_init__(self):
        self.x_low = np.asarray(self.x_low, dtype=float)
        self.x_high = np.asarray(self.x_high, dtype=float)
        if self.theta_low is not None:
            self.theta_low = np.asarray(self.theta_low, dtype=float)
            self.theta_high = np.asarray(self.theta_high, dtype=float)

    @property
    def has_theta(self):
        return self.theta_low is not None


def estimate_lipschitz_f(model, region: Region, u_const, n_samples=200, rng_seed=0):
    """Sampled lower bound on the transition Lipschitz constant.

    Returns the max over sampled points of the spectral norm of the
    Jacobian of f: jointly in (x, theta) when the region has a parameter
    box, else in x alone.  A sampled maximum can only under-estimate the
    true supremum over the region; treat the result as an estimate.
    """
    if n_samples < 2:
        raise EmptyRegion("need at least 2 samples")
    if np.any(region.x_high < region.x_low):
        raise EmptyRegion("state box is empty")
    rng = np.random.default_rng(rng_seed)
    u = np.asarray(u_const, dtype=float).reshape(model.input_dim)

    best = 0.0
    for _ in range(int(n_samples)):
        x = rng.uniform(region.x_low, region.x_high)
        m = model
        if region.has_theta:
            theta = rng.uniform(region.theta_low, region.theta_high)
            m = model.with_params(theta)
        A, B, _, _ = m.jacobians(x, u)
        J = np.hstack([A, B]) if region.has_theta else A
        s = float(np.linalg.norm(J, 2))
        if s > best:
            best = s
    return best


def lipschitz_region_from_trajectory(traj: Trajectory, pad=0.0) -> Region:
    """State box spanned by a trajectory (theta frozen)."""
    lo = traj.states.min(axis=0) - pad
    hi = traj.states.max(axis=0) + pad
    return Region(x_low=lo, x_high=hi)


# ---------------------------------------------------------------------------
# Lyapunov exponent
# ---------------------------------------------------------------------------


def lyapunov_exponent(model, x0, u_const, burn_in=100, horizon=1000):
    """Largest Lyapunov exponent of the constant-input map.

    Propagates one tangent direction through the state Jacobians A_t with
    re-orthonormalization (norm extraction, the one-column case of a QR
    factorization) at every step; the average log stretch over the
    horizon is the exponent.  Burn-in steps run first and are discarded.
    """
    if horizon < 100:
        raise ValueError("horizon must be >= 100")
    u = np.asarray(u_const, dtype=float).reshape(model.input_dim)
    x = np.asarray(x0, dtype=float).copy()
    for t in range(int(burn_in)):
        x = model.step(x, u)
        if not np.all(np.isfinite(x)):
            raise NonFiniteState(t + 1)

    v = np.full(model.state_dim, 1.0 / np.sqrt(model.state_dim))
    log_sum = 0.0
    for t in range(int(horizon)):
        A, _, _, _ = model.jacobians(x, u)
        v = A @ v
        r = float(np.linalg.norm(v))
        if r == 0.0 or not np.isfinite(r):
            if r == 0.0:
                return -np.inf
            raise NonFiniteState(burn_in + t, "tangent")
        log_sum += np.log(r)
        v /= r
        x = model.step(x, u)
        if not np.all(np.isfinite(x)):
            raise NonFiniteState(burn_in + t + 1)
    return log_sum / horizon

"""Small hand-checkable models and finite-difference oracles for the tests."""

import numpy as np

from rnnlab.params import ParameterLayout, ParameterVector
from rnnlab.statespace import DynamicalModel


class ScalarLinear(DynamicalModel):
    """x' = a * x with a trainable; y = x."""

    name = "scalar_linear"

    def __init__(self, a):
        self.params = ParameterVector(
            ParameterLayout([("a", (1,))]), np.atleast_1d(np.asarray(a, dtype=float))
        )
        self.state_dim = 1
        self.input_dim = 0
        self.output_dim = 1

    def step(self, x, z):
        return self.params.values * x

    def output(self, x, z):
        return np.asarray(x, dtype=float).copy()

    def jacobians(self, x, z):
        a = self.params.values[0]
        return (
            np.array([[a]]),
            np.array([[float(x[0])]]),
            np.array([[1.0]]),
            np.array([[0.0]]),
        )

    def with_params(self, v):
        return ScalarLinear(np.asarray(v, dtype=float))


class FixedScalarLinear(ScalarLinear):
    """x' = a * x with a frozen (empty theta); y = x."""

    name = "fixed_scalar_linear"

    def __init__(self, a):
        self.a = float(a)
        self.params = ParameterVector(ParameterLayout([]), np.zeros(0))
        self.state_dim = 1
        self.input_dim = 0
        self.output_dim = 1

    def step(self, x, z):
        return self.a * np.asarray(x, dtype=float)

    def jacobians(self, x, z):
        return (
            np.array([[self.a]]),
            np.zeros((1, 0)),
            np.array([[1.0]]),
            np.zeros((1, 0)),
        )

    def with_params(self, v):
        return FixedScalarLinear(self.a)


class DrivenScalar(DynamicalModel):
    """x' = a * x + g * z with fixed contraction a and trainable gain g; y = x."""

    name = "driven_scalar"

    def __init__(self, g, a=0.9):
        self.a = float(a)
        self.params = ParameterVector(
            ParameterLayout([("g", (1,))]), np.atleast_1d(np.asarray(g, dtype=float))
        )
        self.state_dim = 1
        self.input_dim = 1
        self.output_dim = 1

    def step(self, x, z):
        return self.a * np.asarray(x, dtype=float) + self.params.values * z

    def output(self, x, z):
        return np.asarray(x, dtype=float).copy()

    def jacobians(self, x, z):
        return (
            np.array([[self.a]]),
            np.array([[float(z[0])]]),
            np.array([[1.0]]),
            np.array([[0.0]]),
        )

    def with_params(self, v):
        return DrivenScalar(np.asarray(v, dtype=float), self.a)


class TanhMap(DynamicalModel):
    """x' = tanh(w * x) scalar map with trainable w; y = x."""

    name = "tanh_map"

    def __init__(self, w):
        self.params = ParameterVector(
            ParameterLayout([("w", (1,))]), np.atleast_1d(np.asarray(w, dtype=float))
        )
        self.state_dim = 1
        self.input_dim = 0
        self.output_dim = 1

    def step(self, x, z):
        return np.tanh(self.params.values * x)

    def output(self, x, z):
        return np.asarray(x, dtype=float).copy()

    def jacobians(self, x, z):
        w = self.params.values[0]
        s = 1.0 - np.tanh(w * x[0]) ** 2
        return (
            np.array([[w * s]]),
            np.array([[float(x[0]) * s]]),
            np.array([[1.0]]),
            np.array([[0.0]]),
        )

    def with_params(self, v):
        return TanhMap(np.asarray(v, dtype=float))


class RotationMap(DynamicalModel):
    """2-D rotation by a fixed angle (an isometry; empty theta)."""

    name = "rotation"

    def __init__(self, angle):
        self.angle = float(angle)
        c, s = np.cos(self.angle), np.sin(self.angle)
        self.R = np.array([[c, -s], [s, c]])
        self.params = ParameterVector(ParameterLayout([]), np.zeros(0))
        self.state_dim = 2
        self.input_dim = 0
        self.output_dim = 2

    def step(self, x, z):
        return self.R @ np.asarray(x, dtype=float)

    def output(self, x, z):
        return np.asarray(x, dtype=float).copy()

    def jacobians(self, x, z):
        return self.R.copy(), np.zeros((2, 0)), np.eye(2), np.zeros((2, 0))

    def with_params(self, v):
        return RotationMap(self.angle)


class LogisticMap(DynamicalModel):
    """x' = r * x * (1 - x), the textbook period-doubling family."""

    name = "logistic"

    def __init__(self, r):
        self.params = ParameterVector(
            ParameterLayout([("r", (1,))]), np.atleast_1d(np.asarray(r, dtype=float))
        )
        self.state_dim = 1
        self.input_dim = 0
        self.output_dim = 1

    def step(self, x, z):
        r = self.params.values[0]
        return np.array([r * x[0] * (1.0 - x[0])])

    def output(self, x, z):
        return np.asarray(x, dtype=float).copy()

    def jacobians(self, x, z):
        r = self.params.values[0]
        return (
            np.array([[r * (1.0 - 2.0 * x[0])]]),
            np.array([[x[0] * (1.0 - x[0])]]),
            np.array([[1.0]]),
            np.array([[0.0]]),
        )

    def with_params(self, v):
        return LogisticMap(np.asarray(v, dtype=float))


class FeedthroughMap(DynamicalModel):
    """x' = z, y = x: the closed loop with identity feedback holds any state."""

    name = "feedthrough"

    def __init__(self, dim=1):
        self.params = ParameterVector(ParameterLayout([]), np.zeros(0))
        self.state_dim = dim
        self.input_dim = dim
        self.output_dim = dim

    def step(self, x, z):
        return np.asarray(z, dtype=float).copy()

    def output(self, x, z):
        return np.asarray(x, dtype=float).copy()

    def jacobians(self, x, z):
        n = self.state_dim
        return np.zeros((n, n)), np.zeros((n, 0)), np.eye(n), np.zeros((n, 0))

    def with_params(self, v):
        return FeedthroughMap(self.state_dim)


def fd_jacobians(model, x, z, eps=1e-6):
    """Central-difference Jacobians (A, B, C, F) of step/output."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    nx, nth, ny = model.state_dim, model.n_params, model.output_dim
    A = np.zeros((nx, nx))
    C = np.zeros((ny, nx))
    for k in range(nx):
        xp = x.copy()
        xp[k] += eps
        xm = x.copy()
        xm[k] -= eps
        A[:, k] = (model.step(xp, z) - model.step(xm, z)) / (2 * eps)
        C[:, k] = (model.output(xp, z) - model.output(xm, z)) / (2 * eps)
    B = np.zeros((nx, nth))
    F = np.zeros((ny, nth))
    theta = model.params.values
    for k in range(nth):
        tp = theta.copy()
        tp[k] += eps
        tm = theta.copy()
        tm[k] -= eps
        mp, mm = model.with_params(tp), model.with_params(tm)
        B[:, k] = (mp.step(x, z) - mm.step(x, z)) / (2 * eps)
        F[:, k] = (mp.output(x, z) - mm.output(x, z)) / (2 * eps)
    return A, B, C, F


def rel_err(got, want):
    got = np.asarray(got, dtype=float)
    want = np.asarray(want, dtype=float)
    scale = max(1.0, float(np.abs(want).max()) if want.size else 1.0)
    return float(np.abs(got - want).max()) / scale

"""Markovian master-equation propagation with heat/work accounting.

drho/dt = -i [H(t), rho] + sum_mu gamma_mu (L rho L^dag - {L^dag L, rho}/2)

Integration is classical fixed-step RK4. The dissipated-heat and work
integrals

    Q(t) = -int_0^t Tr[H(t') drho/dt'] dt',   W(t) = int_0^t Tr[dH/dt' rho] dt'

are accumulated inside the RK4 stages with the same stage weights as the
state, which keeps the first-law identity dE_S = W - Q at integrator accuracy
rather than quadrature-on-samples accuracy. States are re-Hermitized and
trace-renormalized every step; the pre-renormalization drift is recorded so
that masking of real errors stays detectable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg
from .errors import (
    PositivityError,
    ProtocolDomainError,
    StabilityError,
    UndrivenModelWarning,
)
from .qstate import DensityMatrix

_STEP_DRIFT_LIMIT = 1e-6
_MIN_EIG_LIMIT = -1e-6


@dataclass(frozen=True)
class JumpChannel:
    """One dissipation channel: damping rate gamma >= 0 and operator protocol."""

    rate: float
    operator_protocol: Callable[[float], np.ndarray]

    def __post_init__(self) -> None:
        if self.rate < 0:
            raise ValueError(f"channel rate must be >= 0, got {self.rate}")

    @classmethod
    def constant(cls, rate: float, operator: np.ndarray) -> "JumpChannel":
        op = linalg.as_operator(operator).copy()
        op.setflags(write=False)
        return cls(rate=rate, operator_protocol=lambda t: op)

    def operator(self, t: float) -> np.ndarray:
        try:
            return linalg.as_operator(self.operator_protocol(t))
        except Exception as exc:
            raise ProtocolDomainError(f"jump operator failed at t={t!r}: {exc}") from exc


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Hamiltonian protocol plus jump channels.

    ``driven = False`` asserts that the Hamiltonian and all channel operators
    are time independent; the propagator then precomputes the generator once.
    ``hamiltonian_rate_protocol`` optionally supplies the analytic dH/dt used
    by the work integral; otherwise a central finite difference with step
    1e-6 * protocol_timescale is used.
    """

    dim: int
    hamiltonian_protocol: Callable[[float], np.ndarray]
    channels: tuple[JumpChannel, ...]
    driven: bool = False
    hamiltonian_rate_protocol: Callable[[float], np.ndarray] | None = None
    protocol_timescale: float = 1.0

    def hamiltonian(self, t: float) -> np.ndarray:
        try:
            h = linalg.as_operator(self.hamiltonian_protocol(t))
        except Exception as exc:
            raise ProtocolDomainError(f"Hamiltonian failed at t={t!r}: {exc}") from exc
        if h.shape != (self.dim, self.dim):
            raise ProtocolDomainError(f"Hamiltonian shape {h.shape} != dim {self.dim}")
        return h


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled propagation output with accumulated heat/work and diagnostics.

    ``min_eigenvalues`` holds the smallest state eigenvalue at each sample;
    ``max_step_trace_drift`` is the largest per-step |Tr rho - 1| seen before
    renormalization and ``cumulative_trace_drift`` the sum of corrections.
    """

    times: np.ndarray
    states: tuple[DensityMatrix, ...]
    heat: np.ndarray
    work: np.ndarray
    min_eigenvalues: np.ndarray
    max_step_trace_drift: float
    cumulative_trace_drift: float
    dt: float
    n_steps: int


def generator(model: LindbladModel, t: float, rho: DensityMatrix | np.ndarray) -> np.ndarray:
    """Right-hand side of the master equation at (t, rho).

    Returns a traceless Hermitian matrix for a valid Hermitian input.
    """
    r = rho.matrix if isinstance(rho, DensityMatrix) else linalg.as_operator(rho)
    h = linalg.require_hermitian(model.hamiltonian(t))
    out = -1j * (h @ r - r @ h)
    for ch in model.channels:
        if ch.rate == 0.0:
            continue
        l_op = ch.operator(t)
        ld = l_op.conj().T
        ll = ld @ l_op
        out = out + ch.rate * (l_op @ r @ ld - 0.5 * (ll @ r + r @ ll))
    return out


def hamiltonian_rate(model: LindbladModel, t: float) -> np.ndarray:
    """dH/dt at time t: analytic protocol when available, else central difference."""
    if not model.driven:
        warnings.warn("hamiltonian_rate of an undriven model is identically zero",
                      UndrivenModelWarning, stacklevel=2)
        return np.zeros((model.dim, model.dim), dtype=np.complex128)
    if model.hamiltonian_rate_protocol is not None:
        try:
            return linalg.as_operator(model.hamiltonian_rate_protocol(t))
        except Exception as exc:
            raise ProtocolDomainError(f"dH/dt failed at t={t!r}: {exc}") from exc
    h_fd = 1e-6 * model.protocol_timescale
    return (model.hamiltonian(t + h_fd) - model.hamiltonian(t - h_fd)) / (2.0 * h_fd)


def _vectorized_superoperator(model: LindbladModel) -> np.ndarray:
    """Constant generator as a d^2 x d^2 matrix acting on row-major vec(rho).

    vec(A rho B) = (A kron B^T) vec(rho) for C-order raveling. Used only for
    undriven models; algebraically identical to ``generator``.
    """
    d = model.dim
    h = linalg.require_hermitian(model.hamiltonian(0.0))
    eye = np.eye(d, dtype=np.complex128)
    m = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for ch in model.channels:
        if ch.rate == 0.0:
            continue
        l_op = ch.operator(0.0)
        ll = l_op.conj().T @ l_op
        m += ch.rate * (np.kron(l_op, l_op.conj())
                        - 0.5 * (np.kron(ll, eye) + np.kron(eye, ll.T)))
    return m


def _stability_scale(model: LindbladModel) -> float:
    h = model.hamiltonian(0.0)
    scale = 2.0 * float(np.linalg.norm(h))
    for ch in model.channels:
        scale += ch.rate * float(np.linalg.norm(ch.operator(0.0))) ** 2
    return scale


def propagate(
    model: LindbladModel,
    rho0: DensityMatrix,
    t_end: float,
    dt: float,
    n_samples: int,
) -> Trajectory:
    """RK4 propagation over [0, t_end] retaining n_samples uniform samples.

    The step count is ceil(t_end / dt); dt is shrunk to divide t_end exactly.
    Raises ``StabilityError`` when a single step drifts the trace by more
    than 1e-6 and ``PositivityError`` when a sampled state has an eigenvalue
    below -1e-6.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    n_steps = max(1, math.ceil(t_end / dt - 1e-12))
    if n_samples > n_steps + 1:
        raise ValueError(f"n_samples {n_samples} exceeds available steps {n_steps} + 1")
    dt_eff = t_end / n_steps

    scale = _stability_scale(model)
    if dt_eff * scale >= 0.1:
        warnings.warn(
            f"dt * generator scale = {dt_eff * scale:.3g} >= 0.1; accuracy may degrade",
            stacklevel=2,
        )

    sample_idx = np.unique(np.rint(np.linspace(0, n_steps, n_samples)).astype(int))
    if len(sample_idx) != n_samples:
        raise ValueError("sample grid collapsed; reduce n_samples")

    if model.driven:
        return _propagate_generic(model, rho0, dt_eff, n_steps, sample_idx)
    return _propagate_constant(model, rho0, dt_eff, n_steps, sample_idx)


def _finalize_sample(
    rho: np.ndarray,
    idx: int,
    dt: float,
    q: float,
    w: float,
    states: list[DensityMatrix],
    times: list[float],
    heats: list[float],
    works: list[float],
    mins: list[float],
) -> None:
    eigs = np.linalg.eigvalsh(rho)
    if float(eigs[0]) < _MIN_EIG_LIMIT:
        raise PositivityError(f"min eigenvalue {eigs[0]:.3e} at t={idx * dt!r}")
    states.append(DensityMatrix.from_matrix(rho, check=False))
    times.append(idx * dt)
    heats.append(q)
    works.append(w)
    mins.append(float(eigs[0]))


def _renormalize(rho: np.ndarray, t: float) -> tuple[np.ndarray, float]:
    rho = (rho + rho.conj().T) * 0.5
    tr = float(np.trace(rho).real)
    drift = abs(tr - 1.0)
    if drift > _STEP_DRIFT_LIMIT:
        raise StabilityError(f"trace drift {drift:.3e} in one step at t={t!r}")
    # A unit-trace positive state has Frobenius norm <= 1; large growth means
    # the step size is unstable even when the trace happens to be preserved.
    frob = float(np.linalg.norm(rho))
    if not math.isfinite(frob) or frob > 10.0:
        raise StabilityError(f"state norm {frob:.3e} after one step at t={t!r}")
    return rho / tr, drift


def _rk4_transfer_matrix(m: np.ndarray, dt: float) -> np.ndarray:
    """One-step map of classical RK4 for a constant generator.

    For y' = M y the four stages collapse exactly to the degree-4 Taylor
    polynomial I + hM + (hM)^2/2 + (hM)^3/6 + (hM)^4/24.
    """
    eye = np.eye(m.shape[0], dtype=np.complex128)
    hm = dt * m
    r = eye + hm
    p = hm
    for k in (2.0, 3.0, 4.0):
        p = (p @ hm) / k
        r += p
    return r


def _propagate_constant(
    model: LindbladModel,
    rho0: DensityMatrix,
    dt: float,
    n_steps: int,
    sample_idx: np.ndarray,
) -> Trajectory:
    d = model.dim
    m = _vectorized_superoperator(model)
    r_step = _rk4_transfer_matrix(m, dt)
    h = model.hamiltonian(0.0)
    h_row = h.T.ravel()  # Tr[H k] = h_row . vec(k)

    y = rho0.matrix.astype(np.complex128).ravel().copy()
    q = 0.0
    max_drift = 0.0
    cum_drift = 0.0

    states: list[DensityMatrix] = []
    times: list[float] = []
    heats: list[float] = []
    works: list[float] = []
    mins: list[float] = []
    targets = set(int(i) for i in sample_idx)
    if 0 in targets:
        _finalize_sample(y.reshape(d, d).copy(), 0, dt, 0.0, 0.0,
                         states, times, heats, works, mins)

    for step in range(n_steps):
        y_new = r_step @ y
        # Undriven: the stage-weighted heat increment telescopes exactly to
        # -Tr[H (rho_new - rho_old)].
        q -= (h_row @ (y_new - y)).real

        rho, drift = _renormalize(y_new.reshape(d, d), (step + 1) * dt)
        y = rho.ravel()
        max_drift = max(max_drift, drift)
        cum_drift += drift
        if (step + 1) in targets:
            _finalize_sample(rho.copy(), step + 1, dt, q, 0.0,
                             states, times, heats, works, mins)

    return Trajectory(
        times=np.array(times),
        states=tuple(states),
        heat=np.array(heats),
        work=np.array(works),
        min_eigenvalues=np.array(mins),
        max_step_trace_drift=max_drift,
        cumulative_trace_drift=cum_drift,
        dt=dt,
        n_steps=n_steps,
    )


def _propagate_generic(
    model: LindbladModel,
    rho0: DensityMatrix,
    dt: float,
    n_steps: int,
    sample_idx: np.ndarray,
) -> Trajectory:
    d = model.dim
    rho = rho0.matrix.astype(np.complex128).copy()
    q = 0.0
    w = 0.0
    max_drift = 0.0
    cum_drift = 0.0

    # Hot loop: call the protocols directly (no per-call validation); the
    # t = 0 operators were validated above and sampled states are checked.
    ham = model.hamiltonian_protocol
    ops = tuple((ch.rate, ch.operator_protocol) for ch in model.channels if ch.rate)
    if model.hamiltonian_rate_protocol is not None:
        hdot_fn = model.hamiltonian_rate_protocol
    else:
        h_fd = 1e-6 * model.protocol_timescale

        def hdot_fn(t: float) -> np.ndarray:
            return (ham(t + h_fd) - ham(t - h_fd)) / (2.0 * h_fd)

    def rhs(t: float, r: np.ndarray) -> tuple[np.ndarray, float, float]:
        h = ham(t)
        k = -1j * (h @ r - r @ h)
        for rate, op in ops:
            l_op = op(t)
            ld = l_op.conj().T
            ll = ld @ l_op
            k += rate * (l_op @ r @ ld - 0.5 * (ll @ r + r @ ll))
        qdot = -float(np.sum(h * k.T).real)
        wdot = float(np.sum(hdot_fn(t) * r.T).real)
        return k, qdot, wdot

    states: list[DensityMatrix] = []
    times: list[float] = []
    heats: list[float] = []
    works: list[float] = []
    mins: list[float] = []
    targets = set(int(i) for i in sample_idx)
    if 0 in targets:
        _finalize_sample(rho.copy(), 0, dt, 0.0, 0.0, states, times, heats, works, mins)

    sixth = dt / 6.0
    half = dt / 2.0
    for step in range(n_steps):
        t = step * dt
        k1, q1, w1 = rhs(t, rho)
        k2, q2, w2 = rhs(t + half, rho + half * k1)
        k3, q3, w3 = rhs(t + half, rho + half * k2)
        k4, q4, w4 = rhs(t + dt, rho + dt * k3)
        rho = rho + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        q += sixth * (q1 + 2.0 * q2 + 2.0 * q3 + q4)
        w += sixth * (w1 + 2.0 * w2 + 2.0 * w3 + w4)

        rho, drift = _renormalize(rho, (step + 1) * dt)
        max_drift = max(max_drift, drift)
        cum_drift += drift
        if (step + 1) in targets:
            _finalize_sample(rho.copy(), step + 1, dt, q, w,
                             states, times, heats, works, mins)

    return Trajectory(
        times=np.array(times),
        states=tuple(states),
        heat=np.array(heats),
        work=np.array(works),
        min_eigenvalues=np.array(mins),
        max_step_trace_drift=max_drift,
        cumulative_trace_drift=cum_drift,
        dt=dt,
        n_steps=n_steps,
    )

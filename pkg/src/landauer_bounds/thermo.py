"""Per-sample evaluation of the entropy-energy inequalities.

Undriven chain, with a reference Gibbs state rho_th fixed by entropy matching
at t = 0 (beta_R = 1/T_R):

    gap_P  = beta_R dE_R - dS = D(rho(t) || rho_th) >= 0
    Q_u    = dE_in - T_R dS               (upper bound on Q = -dE_S)
    lp     = -T dS <= Q                   (needs a genuine bath at T)

Driven chain, with instantaneous matching beta_R(t) and correction
C(t) = (beta_R(t) - beta_R(0)) E_S(t) + ln Z(t)/Z(0):

    gap    = beta_R(0) dE_R~ - dS + C = D(rho(t) || rho_th(t)) >= 0
    Q_u~   = dE_in~ - T_R(0) dS + T_R(0) C
    lp <= Q <= Q_u~ + W

The entropy change dS is always recomputed from sampled states, never
accumulated, so integrator error cannot leak into an inequality check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import linalg, qstate
from .errors import (
    DrivenModelSupplied,
    MisalignedSeries,
    NoBathTemperature,
    SingularReference,
)
from .lindblad import LindbladModel, Trajectory
from .qstate import ReferenceState
from .refsolve import BetaSolveResult


@dataclass(frozen=True)
class UndrivenBounds:
    """One sample of the undriven bound chain."""

    t: float
    E_S: float
    S: float
    S_diag: float
    Coh: float
    dE_R: float
    dS: float
    gap_P: float
    D_direct: float | None
    dE_in: float
    Q_u: float
    Q: float
    lp_lower: float | None
    dS_diag: float
    dCoh: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class DrivenBounds:
    """One sample of the driven bound chain."""

    t: float
    E_S: float
    S: float
    S_diag: float
    Coh: float
    Q: float
    W: float
    beta_R_t: float
    C_t: float
    dE_R_tilde: float
    gap: float | None
    D_inst: float | None
    dE_in_tilde: float
    Qu_tilde: float
    upper: float
    lp_lower: float | None
    dS: float
    dS_diag: float
    dCoh: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class NlpComparison:
    """Slacks of the thermal-bath comparison inequalities (all >= 0)."""

    t: float
    F_neq_T: float
    F_eq_t: float
    slack_S23: float
    slack_S25: float | None
    slack_S26: float | None


def _scaled_product(t_r: float, ds: float) -> float:
    """T_R * dS with the 0 * inf convention (divergent reference, no change)."""
    if ds == 0.0:
        return 0.0
    return t_r * ds


def undriven_bounds(
    traj: Trajectory,
    model: LindbladModel,
    ref: ReferenceState,
    bath_T: float | None = None,
) -> list[UndrivenBounds]:
    """Evaluate the undriven chain on every trajectory sample.

    ``ref`` is the entropy-matched reference for the initial state. With a
    negative-branch reference the upper bound flips direction; rows are then
    flagged ``direction_flipped`` and Q_u is reported as the flipped lower
    bound, as configured.
    """
    if model.driven:
        raise DrivenModelSupplied("undriven_bounds requires an undriven model")
    h = linalg.require_hermitian(model.hamiltonian(0.0))
    basis = linalg.eigh(h)
    beta_r = ref.beta_R
    t_r = 1.0 / beta_r if beta_r != 0.0 else math.inf

    e_th = linalg.trace_product(ref.gibbs.matrix, h).real
    base_flags: tuple[str, ...] = ()
    if qstate.has_degenerate_spectrum(basis.eigenvalues):
        base_flags += ("degenerate_spectrum",)
    if beta_r < 0.0:
        base_flags += ("direction_flipped",)
    if ref.saturated:
        base_flags += ("reference_saturated",)

    samples = [
        qstate.state_functionals(float(t), rho, basis)
        for t, rho in zip(traj.times, traj.states)
    ]
    s0, sdiag0, coh0, e0 = samples[0].S, samples[0].S_diag, samples[0].Coh, samples[0].E_S
    de_in = e0 - e_th

    rows: list[UndrivenBounds] = []
    for sm, rho in zip(samples, traj.states):
        ds = sm.S - s0
        de_r = sm.E_S - e_th
        gap_p = beta_r * de_r - ds
        flags = base_flags
        if ref.saturated:
            d_direct = None
        else:
            try:
                d_direct = qstate.relative_entropy(rho, ref.gibbs)
            except SingularReference:
                d_direct = None
                flags = flags + ("identity_suppressed",)
        rows.append(
            UndrivenBounds(
                t=sm.t,
                E_S=sm.E_S,
                S=sm.S,
                S_diag=sm.S_diag,
                Coh=sm.Coh,
                dE_R=de_r,
                dS=ds,
                gap_P=gap_p,
                D_direct=d_direct,
                dE_in=de_in,
                Q_u=de_in - _scaled_product(t_r, ds),
                Q=-(sm.E_S - e0),
                lp_lower=None if bath_T is None else -bath_T * ds,
                dS_diag=sm.S_diag - sdiag0,
                dCoh=sm.Coh - coh0,
                flags=flags,
            )
        )
    return rows


def driven_bounds(
    traj: Trajectory,
    model: LindbladModel,
    beta_series: list[BetaSolveResult],
    bath_T: float | None = None,
) -> list[DrivenBounds]:
    """Evaluate the driven chain on every sample.

    ``beta_series`` must align with traj.times. Saturated samples keep their
    bound fields (which only need beta_R(0) and the capped beta_R(t) through
    C(t)) but the gap/relative-entropy identity pair is suppressed because
    the capped reference is numerically a projector.
    """
    if len(beta_series) != len(traj.times):
        raise MisalignedSeries(
            f"{len(beta_series)} reference solves for {len(traj.times)} samples"
        )
    b0 = beta_series[0]
    if b0.error is not None or b0.saturated or not math.isfinite(b0.beta_R):
        raise MisalignedSeries("initial reference parameter must be finite and non-saturated")
    beta_r0 = b0.beta_R
    t_r0 = 1.0 / beta_r0 if beta_r0 != 0.0 else math.inf

    h0 = linalg.require_hermitian(model.hamiltonian(float(traj.times[0])))
    ref0 = qstate.gibbs_state(h0, beta_r0)
    e_th0 = linalg.trace_product(ref0.gibbs.matrix, h0).real

    rows: list[DrivenBounds] = []
    s0 = sdiag0 = coh0 = e0 = 0.0
    for i, (t, rho, res) in enumerate(zip(traj.times, traj.states, beta_series)):
        t = float(t)
        h_t = model.hamiltonian(t)
        basis = linalg.eigh(h_t)
        sm = qstate.state_functionals(t, rho, basis)
        if i == 0:
            s0, sdiag0, coh0, e0 = sm.S, sm.S_diag, sm.Coh, sm.E_S

        flags: tuple[str, ...] = ()
        if res.error is not None:
            rows.append(
                DrivenBounds(
                    t=t, E_S=sm.E_S, S=sm.S, S_diag=sm.S_diag, Coh=sm.Coh,
                    Q=float(traj.heat[i]), W=float(traj.work[i]),
                    beta_R_t=math.nan, C_t=math.nan, dE_R_tilde=sm.E_S - e_th0,
                    gap=None, D_inst=None, dE_in_tilde=e0 - e_th0,
                    Qu_tilde=math.nan, upper=math.nan,
                    lp_lower=None if bath_T is None else -bath_T * (sm.S - s0),
                    dS=sm.S - s0, dS_diag=sm.S_diag - sdiag0, dCoh=sm.Coh - coh0,
                    flags=("beta_solve_failed",),
                )
            )
            continue

        ref_t = qstate.gibbs_state(h_t, res.beta_R)
        ds = sm.S - s0
        c_t = (res.beta_R - beta_r0) * sm.E_S + (ref_t.log_Z - ref0.log_Z)
        de_r = sm.E_S - e_th0
        qu = (e0 - e_th0) - _scaled_product(t_r0, ds) + t_r0 * c_t

        if res.saturated or ref_t.saturated:
            gap = None
            d_inst = None
            flags += ("saturated",)
        else:
            gap = beta_r0 * de_r - ds + c_t
            try:
                d_inst = qstate.relative_entropy(traj.states[i], ref_t.gibbs)
            except SingularReference:
                d_inst = None
                flags += ("identity_suppressed",)

        rows.append(
            DrivenBounds(
                t=t,
                E_S=sm.E_S,
                S=sm.S,
                S_diag=sm.S_diag,
                Coh=sm.Coh,
                Q=float(traj.heat[i]),
                W=float(traj.work[i]),
                beta_R_t=res.beta_R,
                C_t=c_t,
                dE_R_tilde=de_r,
                gap=gap,
                D_inst=d_inst,
                dE_in_tilde=e0 - e_th0,
                Qu_tilde=qu,
                upper=qu + float(traj.work[i]),
                lp_lower=None if bath_T is None else -bath_T * ds,
                dS=ds,
                dS_diag=sm.S_diag - sdiag0,
                dCoh=sm.Coh - coh0,
                flags=flags,
            )
        )
    return rows


def nlp_comparison(
    traj: Trajectory,
    model: LindbladModel,
    bath_beta: float | None,
) -> list[NlpComparison]:
    """Slacks of the comparison bounds built from the instantaneous thermal state.

    Requires a genuine thermal bath: ``bath_beta`` is configuration metadata,
    never inferred from jump operators. Each slack equals
    beta (F(t) - F_eq(t)) = D(rho(t) || rho_eq(t)) >= 0 for detailed-balance
    models.
    """
    if bath_beta is None or not math.isfinite(bath_beta) or bath_beta <= 0:
        raise NoBathTemperature("nlp_comparison needs a positive bath inverse temperature")
    temp = 1.0 / bath_beta

    h0 = model.hamiltonian(float(traj.times[0]))
    eq0 = qstate.gibbs_state(h0, bath_beta)
    e_eq0 = linalg.trace_product(eq0.gibbs.matrix, h0).real
    s_eq0 = qstate.von_neumann_entropy(eq0.gibbs)

    rows: list[NlpComparison] = []
    for t, rho in zip(traj.times, traj.states):
        t = float(t)
        h_t = model.hamiltonian(t) if model.driven else h0
        eq_t = eq0 if not model.driven else qstate.gibbs_state(h_t, bath_beta)
        basis = linalg.eigh(h_t)
        sm = qstate.state_functionals(t, rho, basis)
        e_eq = linalg.trace_product(eq_t.gibbs.matrix, h_t).real
        s_eq = qstate.von_neumann_entropy(eq_t.gibbs)

        slack_s23 = bath_beta * (sm.E_S - e_eq) - (sm.S - s_eq)
        slack_s25 = None
        slack_s26 = None
        if model.driven:
            slack_s25 = (
                bath_beta * (sm.E_S - e_eq0)
                - (sm.S - s_eq0)
                + (eq_t.log_Z - eq0.log_Z)
            )
        else:
            slack_s26 = slack_s23
        rows.append(
            NlpComparison(
                t=t,
                F_neq_T=sm.E_S - temp * sm.S,
                F_eq_t=-temp * eq_t.log_Z,
                slack_S23=slack_s23,
                slack_S25=slack_s25,
                slack_S26=slack_s26,
            )
        )
    return rows

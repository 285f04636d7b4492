"""Projected-gradient solver for the fixed-order continuous schedule.

For a fixed transmission order the cost

    U(E, t) = sum_i 2**(B_i - bhat_i(E_i, t_i)) + sum_i a_i * t_i

is smooth and jointly convex over {E_i >= 0, sum E_i <= E, t_i >= t_min}, so
any point with zero projected gradient is a global optimum.  The solver
exploits that, for fixed times, the optimal energies have a closed
water-filling form (one scalar bisection); the outer loop is projected
gradient descent on the times alone, with a Barzilai-Borwein initial step
and Armijo backtracking.  Convergence is declared on the joint
projected-gradient residual, so the returned point is stationary for the
original problem in both variable blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    T_MIN,
    ContinuousAllocation,
    CostBreakdown,
    DomainError,
    Instance,
    Order,
    delay_coefficients,
    evaluate_cost,
)

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for :func:`solve_fixed_order`."""

    max_iters: int = 200_000
    grad_tol: float = 1e-8
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    init_step: float = 1.0
    t_min: float = T_MIN

    def __post_init__(self) -> None:
        if self.max_iters <= 0 or self.grad_tol <= 0 or self.init_step <= 0:
            raise ValueError("max_iters, grad_tol and init_step must be positive")
        if not 0 < self.armijo_c < 1 or not 0 < self.backtrack_factor < 1:
            raise ValueError("armijo_c and backtrack_factor must lie in (0, 1)")
        if self.t_min <= 0:
            raise ValueError("t_min must be positive")


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one fixed-order solve.

    ``overshoot`` lists the (1-based) packets whose delivered bits exceed
    their size — the model never forbids that, so it is flagged, not fixed.
    """

    alloc: ContinuousAllocation
    cost: CostBreakdown
    iterations: int
    final_pg_norm: float
    converged: bool
    energy_slack: float
    overshoot: tuple[int, ...]

    def to_doc(self) -> dict:
        return {
            "alloc": self.alloc.to_doc(),
            "cost": self.cost.to_doc(),
            "iterations": self.iterations,
            "final_pg_norm": self.final_pg_norm,
            "converged": self.converged,
            "energy_slack": self.energy_slack,
            "overshoot": list(self.overshoot),
        }


# ---------------------------------------------------------------------------
# Smooth pieces (arrays in, arrays out; no validation on the hot path).


def _bhat(e, t):
    return t * np.log1p(e / t) / _LN2


def _cost(e, t, bits, a):
    return float(np.exp2(bits - _bhat(e, t)).sum() + a @ t)


def _grad_e(e, t, bits):
    p = np.exp2(bits - _bhat(e, t))
    return -p * t / (t + e)


def _grad_t(e, t, bits, a):
    p = np.exp2(bits - _bhat(e, t))
    return -p * (np.log1p(e / t) - e / (t + e)) + a


def gradient(inst: Instance, alloc: ContinuousAllocation) -> np.ndarray:
    """Analytic gradient of the total cost, interleaved as
    (dU/dE_1, dU/dt_1, dU/dE_2, dU/dt_2, ...)."""
    if alloc.n != inst.n:
        raise ValueError("allocation size does not match instance")
    e = np.asarray(alloc.energies)
    t = np.asarray(alloc.times)
    if np.any(t < T_MIN):
        raise DomainError(f"time must be at least t_min={T_MIN}")
    bits = np.asarray(inst.bits)
    a = delay_coefficients(alloc.order)
    out = np.empty(2 * inst.n)
    out[0::2] = _grad_e(e, t, bits)
    out[1::2] = _grad_t(e, t, bits, a)
    return out


def hessian_block(inst: Instance, packet: int, e: float, t: float, a: float) -> np.ndarray:
    """The 2x2 curvature block of one packet's cost in (E_i, t_i).

    Computed by central differences of the analytic gradient, then
    symmetrized.  The cost separates across packets up to linear terms, so
    the full Hessian is block diagonal and these blocks carry all of it.
    """
    if not 1 <= packet <= inst.n:
        raise ValueError("packet index out of range")
    if t < T_MIN:
        raise DomainError(f"time must be at least t_min={T_MIN}")
    if e < 0:
        raise DomainError("energy must be non-negative")
    b = inst.bits[packet - 1]

    def g(ev, tv):
        p = 2.0 ** (b - tv * math.log1p(ev / tv) / _LN2)
        ge = -p * tv / (tv + ev)
        gt = -p * (math.log1p(ev / tv) - ev / (tv + ev)) + a
        return np.array([ge, gt])

    he = 1e-6 * max(1.0, abs(e))
    ht = 1e-6 * max(1.0, abs(t))
    # The formulas extend smoothly to small negative e (they only need
    # e > -t), so the centered probe below is safe unless e - he would buck
    # that; fall back to a one-sided difference there.
    if e - he > -0.5 * t:
        col_e = (g(e + he, t) - g(e - he, t)) / (2.0 * he)
    else:
        col_e = (g(e + he, t) - g(e, t)) / he
    col_t = (g(e, t + ht) - g(e, t - ht)) / (2.0 * ht)
    h = np.column_stack([col_e, col_t])
    return 0.5 * (h + h.T)


def project_budget(vec: np.ndarray, budget: float) -> np.ndarray:
    """Euclidean projection onto {x : x >= 0, sum(x) <= budget}.

    If clamping to the orthant already satisfies the budget the clamp is the
    projection; otherwise project onto the simplex {x >= 0, sum(x) = budget}
    by the sort-and-threshold rule (O(n log n)).
    """
    clamped = np.maximum(vec, 0.0)
    if clamped.sum() <= budget:
        return clamped
    u = np.sort(vec)[::-1]
    css = np.cumsum(u) - budget
    ks = np.arange(1, len(vec) + 1)
    k = np.nonzero(u - css / ks > 0)[0][-1]
    return np.maximum(vec - css[k] / (k + 1.0), 0.0)


def _pg_norm(e, t, bits, a, budget, t_min):
    """Joint projected-gradient residual ||x - Proj(x - grad)|| at unit step."""
    re = e - project_budget(e - _grad_e(e, t, bits), budget)
    rt = t - np.maximum(t - _grad_t(e, t, bits, a), t_min)
    return math.sqrt(float(re @ re + rt @ rt))


def _waterfill(t, bits, budget):
    """Exact energy allocation minimizing the cost for fixed times.

    Stationarity in E_i gives 2**B_i * t_i**(t_i+1) * (t_i+E_i)**-(t_i+1)
    equal to a common multiplier exp(mu) wherever E_i > 0, i.e.

        E_i(mu) = t_i * expm1(max((B_i ln 2 - mu) / (t_i + 1), 0)).

    The sum is continuous and strictly decreasing in mu, and the marginal
    value of energy is always positive, so the budget binds: bisect mu until
    the full budget is spent, then rescale away the last bisection residue.
    """
    mu_hi = float(np.max(bits * _LN2))
    mu_lo = float(np.min(bits * _LN2 - (t + 1.0) * np.log1p(budget / t)))
    for _ in range(100):
        mu = 0.5 * (mu_lo + mu_hi)
        e = t * np.expm1(np.maximum((bits * _LN2 - mu) / (t + 1.0), 0.0))
        if e.sum() > budget:
            mu_lo = mu
        else:
            mu_hi = mu
        if mu_hi - mu_lo < 1e-16 * max(1.0, abs(mu_hi)):
            break
    e = t * np.expm1(np.maximum((bits * _LN2 - mu_hi) / (t + 1.0), 0.0))
    s = e.sum()
    if s > 0.0:
        e *= budget / s
    return e


def solve_fixed_order(
    inst: Instance,
    order: Order,
    cfg: SolverConfig | None = None,
    cost_trace: list | None = None,
) -> SolveReport:
    """Solve the continuous problem for one fixed order.

    Returns a feasible allocation with joint projected-gradient residual at
    most ``cfg.grad_tol`` (``converged=True``) or gives up after
    ``cfg.max_iters`` iterations (``converged=False``, never raised).  If
    ``cost_trace`` is a list, the cost of every accepted iterate is appended
    to it.
    """
    cfg = cfg or SolverConfig()
    if order.n != inst.n:
        raise ValueError("order size does not match instance")
    if inst.energy <= 0:
        raise ValueError("the continuous solver needs a positive energy budget")
    bits = np.asarray(inst.bits)
    a = delay_coefficients(order)
    budget = inst.energy

    # Scale-aware deterministic start: t_i = B_i / 2; energies then come from
    # the exact inner minimization, as on every later iterate.
    t = np.maximum(bits / 2.0, cfg.t_min)
    e = _waterfill(t, bits, budget)
    f = _cost(e, t, bits, a)
    if cost_trace is not None:
        cost_trace.append(f)

    step = cfg.init_step
    stalls = 0
    pg = _pg_norm(e, t, bits, a, budget, cfg.t_min)
    it = 0
    while it < cfg.max_iters and pg > cfg.grad_tol:
        it += 1
        g = _grad_t(e, t, bits, a)
        # Armijo backtracking along the projected-gradient arc in t.  The
        # machine-relative slack keeps the line search from deadlocking once
        # the attainable decrease falls below the resolution of f itself.
        alpha = step
        slack = 5e-16 * (1.0 + abs(f))
        accepted = False
        for _ in range(80):
            tn = np.maximum(t - alpha * g, cfg.t_min)
            d = tn - t
            if not d.any():
                break
            en = _waterfill(tn, bits, budget)
            fn = _cost(en, tn, bits, a)
            if fn <= f + cfg.armijo_c * float(g @ d) + slack:
                accepted = True
                break
            alpha *= cfg.backtrack_factor
        if not accepted:
            # Nothing representable improves; retry from the default step a
            # couple of times, then settle for the current point.
            stalls += 1
            if stalls >= 3:
                break
            step = cfg.init_step
            continue
        stalls = 0
        gn = _grad_t(en, tn, bits, a)
        s = tn - t
        y = gn - g
        sy = float(s @ y)
        if sy > 0.0:
            step = min(max(float(s @ s) / sy, 1e-14), 1e14)
        else:
            step = alpha * 2.0
        e, t, f = en, tn, fn
        if cost_trace is not None:
            cost_trace.append(f)
        pg = _pg_norm(e, t, bits, a, budget, cfg.t_min)

    alloc = ContinuousAllocation(tuple(e), tuple(t), order)
    cost = evaluate_cost(inst, alloc)
    overshoot = tuple(
        i + 1 for i in range(inst.n) if cost.bhat[i] > inst.bits[i] + 1e-12
    )
    return SolveReport(
        alloc=alloc,
        cost=cost,
        iterations=it,
        final_pg_norm=pg,
        converged=bool(pg <= cfg.grad_tol),
        energy_slack=float(budget - e.sum()),
        overshoot=overshoot,
    )

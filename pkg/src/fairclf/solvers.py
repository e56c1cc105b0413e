"""Generic constrained convex solvers with KKT diagnostics.

Two entry points share one augmented-Lagrangian core:

* :func:`minimize_smooth` - smooth convex objective under linear inequality
  and general differentiable convex inequality constraints.
* :func:`solve_qp` - convex quadratic objective under a variable box, one
  linear equality and linear inequality constraints.

The outer loop updates multipliers and the penalty weight; each subproblem is
handed to a limited-memory quasi-Newton solve (L-BFGS-B), which also absorbs
the box in the QP case. A run reports stationarity, worst primal violation
and worst complementary-slackness product, and only claims convergence when
all three are inside tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

__all__ = [
    "ConstraintBlock",
    "KKTResiduals",
    "QuadraticProblem",
    "SmoothProblem",
    "SolverResult",
    "SolverSettings",
    "kkt_residuals",
    "minimize_smooth",
    "solve_qp",
]

_RHO_INIT = 10.0
_RHO_GROWTH = 10.0
_RHO_MAX = 1e12


@dataclass(frozen=True)
class SolverSettings:
    """Stopping controls; ``max_iterations`` caps total inner iterations.

    ``feasibility_tolerance`` bounds the worst constraint violation at a
    converged point separately from the stationarity/comp-slack tolerance; it
    defaults to ``kkt_tolerance`` and can be set much tighter for problems
    whose constraints must hold to near machine precision.
    """

    max_iterations: int = 10_000
    objective_tolerance: float = 1e-7
    kkt_tolerance: float = 1e-5
    feasibility_tolerance: float | None = None
    verbosity: int = 0

    def __post_init__(self):
        if self.objective_tolerance <= 0 or self.kkt_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.feasibility_tolerance is not None and self.feasibility_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    @property
    def feas_tol(self) -> float:
        return self.feasibility_tolerance if self.feasibility_tolerance is not None else self.kkt_tolerance


@dataclass(frozen=True)
class KKTResiduals:
    stationarity_norm: float
    max_violation: float
    max_comp_slack: float

    def within(self, settings: SolverSettings) -> bool:
        return (
            self.stationarity_norm <= settings.kkt_tolerance
            and self.max_violation <= settings.feas_tol
            and self.max_comp_slack <= settings.kkt_tolerance
        )


@dataclass(frozen=True)
class SolverResult:
    point: np.ndarray
    objective_value: float
    status: Literal["converged", "max_iter", "infeasible"]
    kkt: KKTResiduals
    iterations: int
    multipliers: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ConstraintBlock:
    """Vectorized inequality block g(x) <= 0 with m rows.

    ``value`` maps x to a length-m vector, ``jacobian`` to an (m, n) matrix.
    Scalar constraints are the m=1 case; grouping related constraints into one
    block keeps the per-iteration cost at a few matrix products.
    """

    value: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    size: int


@dataclass(frozen=True)
class SmoothProblem:
    """Differentiable convex objective with linear and convex inequality constraints.

    ``linear_constraints`` holds (a, b) pairs meaning a.x <= b.
    ``convex_constraints`` accepts either (value_fn, gradient_fn) pairs for
    scalar constraints g(x) <= 0 or :class:`ConstraintBlock` instances.
    """

    dimension: int
    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    linear_constraints: Sequence[tuple[np.ndarray, float]] = ()
    convex_constraints: Sequence = ()
    initial_point: np.ndarray | None = None


@dataclass(frozen=True)
class QuadraticProblem:
    """Convex QP: minimize 0.5 x'Qx + q.x over a box with optional equality.

    Q must be symmetric positive semidefinite (validated up to numerical
    noise). ``box`` is a (lower, upper) pair of per-variable bounds, either of
    which may be None for unbounded; ``equality`` is an (a, b) pair meaning
    a.x = b; ``linear_constraints`` are (a, b) pairs meaning a.x <= b.
    """

    q_matrix: np.ndarray
    q_vector: np.ndarray
    box: tuple[np.ndarray | None, np.ndarray | None] = (None, None)
    equality: tuple[np.ndarray, float] | None = None
    linear_constraints: Sequence[tuple[np.ndarray, float]] = ()
    initial_point: np.ndarray | None = None


# ---------------------------------------------------------------------------
# problem compilation


def _linear_block(pairs: Sequence[tuple[np.ndarray, float]], n: int) -> ConstraintBlock | None:
    if not pairs:
        return None
    a = np.array([np.asarray(p[0], dtype=float) for p in pairs])
    b = np.array([float(p[1]) for p in pairs])
    if a.shape[1] != n:
        raise ValueError("linear constraint dimension mismatch")
    return ConstraintBlock(value=lambda x: a @ x - b, jacobian=lambda x: a, size=len(pairs))


def _as_block(entry, n: int) -> ConstraintBlock:
    if isinstance(entry, ConstraintBlock):
        return entry
    value_fn, grad_fn = entry
    return ConstraintBlock(
        value=lambda x, f=value_fn: np.atleast_1d(np.asarray(f(x), dtype=float)),
        jacobian=lambda x, g=grad_fn: np.atleast_2d(np.asarray(g(x), dtype=float)),
        size=1,
    )


@dataclass
class _Compiled:
    n: int
    objective: Callable
    gradient: Callable
    blocks: list  # inequality ConstraintBlocks
    equality: tuple[np.ndarray, float] | None
    bounds: list | None
    x0: np.ndarray


def _compile_smooth(problem: SmoothProblem) -> _Compiled:
    n = problem.dimension
    blocks = []
    lin = _linear_block(problem.linear_constraints, n)
    if lin is not None:
        blocks.append(lin)
    blocks.extend(_as_block(c, n) for c in problem.convex_constraints)
    x0 = np.zeros(n) if problem.initial_point is None else np.asarray(problem.initial_point, dtype=float).copy()
    if x0.shape != (n,):
        raise ValueError("initial_point dimension mismatch")
    return _Compiled(n, problem.objective, problem.gradient, blocks, None, None, x0)


def _validate_psd(q: np.ndarray) -> None:
    scale = max(float(np.abs(q).max()), 1.0)
    if not np.allclose(q, q.T, atol=1e-10 * scale):
        raise ValueError("Q must be symmetric")
    jitter = 1e-10 * scale
    try:
        np.linalg.cholesky(q + jitter * np.eye(q.shape[0]))
    except np.linalg.LinAlgError:
        raise ValueError("Q must be positive semidefinite") from None


def _compile_qp(problem: QuadraticProblem) -> _Compiled:
    q = np.asarray(problem.q_matrix, dtype=float)
    c = np.asarray(problem.q_vector, dtype=float)
    n = c.size
    if q.shape != (n, n):
        raise ValueError("Q and q dimensions disagree")
    _validate_psd(q)
    lo, hi = problem.box
    lo = np.full(n, -np.inf) if lo is None else np.broadcast_to(np.asarray(lo, dtype=float), (n,))
    hi = np.full(n, np.inf) if hi is None else np.broadcast_to(np.asarray(hi, dtype=float), (n,))
    bounds = list(zip(lo, hi))
    blocks = []
    lin = _linear_block(problem.linear_constraints, n)
    if lin is not None:
        blocks.append(lin)
    if problem.initial_point is None:
        x0 = np.clip(np.zeros(n), lo, hi)
    else:
        x0 = np.clip(np.asarray(problem.initial_point, dtype=float), lo, hi)
    equality = None
    if problem.equality is not None:
        a, b = problem.equality
        equality = (np.asarray(a, dtype=float), float(b))

    def objective(x: np.ndarray) -> float:
        return float(0.5 * x @ q @ x + c @ x)

    def gradient(x: np.ndarray) -> np.ndarray:
        return q @ x + c

    return _Compiled(n, objective, gradient, blocks, equality, bounds, x0)


# ---------------------------------------------------------------------------
# augmented-Lagrangian core


def _residuals(comp: _Compiled, x: np.ndarray, lam: list, mu: float) -> KKTResiduals:
    grad = comp.gradient(x).astype(float)
    max_violation = 0.0
    max_comp = 0.0
    for block, lam_b in zip(comp.blocks, lam):
        g = block.value(x)
        if lam_b.size:
            grad = grad + block.jacobian(x).T @ lam_b
            max_comp = max(max_comp, float(np.max(np.abs(lam_b * g))))
        if g.size:
            max_violation = max(max_violation, float(np.max(np.maximum(g, 0.0))))
    if comp.equality is not None:
        a, b = comp.equality
        grad = grad + mu * a
        max_violation = max(max_violation, abs(float(a @ x - b)))
    if comp.bounds is not None:
        lo = np.array([p[0] for p in comp.bounds])
        hi = np.array([p[1] for p in comp.bounds])
        stationarity = float(np.max(np.abs(x - np.clip(x - grad, lo, hi)))) if x.size else 0.0
    else:
        stationarity = float(np.linalg.norm(grad))
    return KKTResiduals(stationarity, max_violation, max_comp)


def _solve_al(comp: _Compiled, settings: SolverSettings) -> SolverResult:
    x = comp.x0.copy()
    lam = [np.zeros(block.size) for block in comp.blocks]
    mu = 0.0
    rho = _RHO_INIT
    used = 0
    scale0 = float(np.linalg.norm(comp.gradient(x))) + 1.0
    gtol = min(1e-2 * scale0, 1.0)
    gtol_floor = max(settings.kkt_tolerance * 5e-2, 1e-12)
    prev_violation = np.inf
    constrained = bool(comp.blocks) or comp.equality is not None
    if not constrained:
        gtol = gtol_floor
    stalled = 0

    def al_value_grad(x: np.ndarray):
        value = comp.objective(x)
        grad = comp.gradient(x).astype(float)
        for block, lam_b in zip(comp.blocks, lam):
            g = block.value(x)
            t = np.maximum(0.0, lam_b + rho * g)
            active = t > 0
            value += float((t @ t - lam_b @ lam_b) / (2.0 * rho))
            if np.any(active):
                grad = grad + block.jacobian(x)[active].T @ t[active]
        if comp.equality is not None:
            a, b = comp.equality
            h = float(a @ x - b)
            value += mu * h + 0.5 * rho * h * h
            grad = grad + (mu + rho * h) * a
        return value, grad

    for outer in range(200):
        budget = settings.max_iterations - used
        if budget <= 0:
            break
        x_before = x.copy()
        res = _scipy_minimize(
            al_value_grad,
            x,
            jac=True,
            method="L-BFGS-B",
            bounds=comp.bounds,
            options={
                "maxiter": budget,
                "maxfun": 20 * budget,
                # inner relative-progress cutoff scales with the requested
                # objective tolerance; the gradient test is the real stop
                "ftol": max(settings.objective_tolerance * 1e-9, 1e-16),
                "gtol": max(gtol, gtol_floor),
                "maxcor": 20,
            },
        )
        x = res.x
        used += max(int(res.nit), 1)
        if not constrained:
            kkt = _residuals(comp, x, lam, mu)
            status = "converged" if kkt.within(settings) else "max_iter"
            return SolverResult(x, comp.objective(x), status, kkt, used, {"inequality": []})

        violation = 0.0
        for i, block in enumerate(comp.blocks):
            g = block.value(x)
            lam[i] = np.maximum(0.0, lam[i] + rho * g)
            if g.size:
                violation = max(violation, float(np.max(np.maximum(g, 0.0))))
        if comp.equality is not None:
            a, b = comp.equality
            h = float(a @ x - b)
            mu += rho * h
            violation = max(violation, abs(h))

        kkt = _residuals(comp, x, lam, mu)
        if settings.verbosity:
            print(
                f"[al] outer={outer} rho={rho:.1e} viol={kkt.max_violation:.2e} "
                f"stat={kkt.stationarity_norm:.2e} comp={kkt.max_comp_slack:.2e} obj={comp.objective(x):.10g}"
            )
        if kkt.within(settings):
            return SolverResult(x, comp.objective(x), "converged", kkt, used, _named_multipliers(comp, lam, mu))
        # multiplier updates alone contract the violation once rho is large
        # enough; grow rho only when that contraction stalls, since extreme
        # penalties make the multiplier estimates noise-dominated
        if violation > settings.feas_tol and violation > 0.7 * prev_violation:
            rho = min(rho * _RHO_GROWTH, _RHO_MAX)
        prev_violation = violation
        gtol = max(gtol * 0.2, gtol_floor)
        # a problem is declared infeasible only when the penalty weight is
        # exhausted and the violation is macroscopic, not merely above the
        # (possibly very tight) feasibility tolerance
        if rho >= _RHO_MAX and kkt.max_violation > max(1e3 * settings.feas_tol, 1e-6):
            return SolverResult(
                x, comp.objective(x), "infeasible", kkt, used, _named_multipliers(comp, lam, mu)
            )
        # quasi-Newton at its floating-point floor and multipliers stable:
        # further outer iterations cannot improve the iterate
        if gtol <= gtol_floor and np.array_equal(x, x_before) and violation <= settings.feas_tol:
            stalled += 1
            if stalled >= 3:
                break
        else:
            stalled = 0

    kkt = _residuals(comp, x, lam, mu)
    status = "converged" if kkt.within(settings) else "max_iter"
    return SolverResult(x, comp.objective(x), status, kkt, used, _named_multipliers(comp, lam, mu))


def _named_multipliers(comp: _Compiled, lam: list, mu: float) -> dict:
    out = {"inequality": [l.copy() for l in lam]}
    if comp.equality is not None:
        out["equality"] = mu
    return out


# ---------------------------------------------------------------------------
# public entry points


def minimize_smooth(problem: SmoothProblem, settings: SolverSettings | None = None) -> SolverResult:
    """Minimize a smooth convex objective under the problem's constraints.

    Deterministic given identical inputs. ``status == "converged"`` certifies
    that all KKT residuals are inside the configured tolerances.
    """
    settings = settings or SolverSettings()
    return _solve_al(_compile_smooth(problem), settings)


def solve_qp(problem: QuadraticProblem, settings: SolverSettings | None = None) -> SolverResult:
    """KKT-certified solve of a convex box/equality/inequality QP."""
    settings = settings or SolverSettings()
    return _solve_al(_compile_qp(problem), settings)


def kkt_residuals(problem, point, multipliers) -> KKTResiduals:
    """Evaluate KKT residuals of (point, multipliers) for a given problem.

    ``multipliers`` maps "inequality" to a flat vector ordered as linear
    constraints first, then convex constraints / blocks, and optionally
    "equality" to a scalar. Inequality multipliers must be non-negative.
    Stationarity is the norm of the Lagrangian gradient (projected onto the
    box for quadratic problems); the violation and complementary-slackness
    entries are worst-case over all constraints.
    """
    if isinstance(problem, SmoothProblem):
        comp = _compile_smooth(problem)
    elif isinstance(problem, QuadraticProblem):
        comp = _compile_qp(problem)
    else:
        raise TypeError("problem must be SmoothProblem or QuadraticProblem")
    x = np.asarray(point, dtype=float)
    flat = np.atleast_1d(np.asarray(multipliers.get("inequality", []), dtype=float))
    if np.any(flat < 0):
        raise ValueError("inequality multipliers must be non-negative")
    total = sum(block.size for block in comp.blocks)
    if flat.size != total:
        raise ValueError(f"expected {total} inequality multipliers, got {flat.size}")
    lam = []
    pos = 0
    for block in comp.blocks:
        lam.append(flat[pos : pos + block.size])
        pos += block.size
    mu = float(multipliers.get("equality", 0.0))
    return _residuals(comp, x, lam, mu)

"""Implicit-midpoint iteration family: inner step solver and outer loops.

Each outer step n solves the implicit equation

    x = cf * f(x_n) + cx * x_n + cT * T^p((x_n + x) / 2)

for x, where the coefficient triple (cf, cx, cT) and the power p depend
on the scheme (see :data:`SCHEMES`). The step map is a contraction with
factor q_n = cT * k_p / 2 whenever q_n < 1, so the step is solved by
Picard iteration warm-started at x_n with the standard a-posteriori
error bound q/(1-q) * ||y_m - y_{m-1}|| as the stopping rule. For
affine T the step also has a closed-form linear solve, kept as an
independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import IllPosedError, InnerBudgetError, InvalidInputError
from .mappings import Contraction, Mapping, affine_power_pair, apply_power
from .schedules import Schedule
from .space import NormSpec, as_vector, norm

__all__ = [
    "Scheme",
    "SCHEMES",
    "scheme_by_name",
    "SolverConfig",
    "StepResult",
    "TraceRecord",
    "Trace",
    "implicit_step",
    "implicit_step_affine_oracle",
    "run",
    "residual_profile",
]


@dataclass(frozen=True)
class Scheme:
    """One member of the iteration family.

    ``viscosity``    whether the contraction term cf = a_n is present
                     (when absent, x_n carries 1 - a_n and the operator
                     carries a_n);
    ``keep_inertia`` whether the x_n term carries the schedule's b_n
                     (else it is dropped and the operator gets 1 - a_n);
    ``use_power``    whether step n applies T^n rather than T.
    """

    name: str
    viscosity: bool
    keep_inertia: bool
    use_power: bool

    def coefficients(self, sched: Schedule, n: int) -> tuple[float, float, float]:
        """(cf, cx, cT) for step n."""
        a = sched.a(n)
        if not self.viscosity:
            return 0.0, 1.0 - a, a
        if self.keep_inertia:
            return a, sched.b(n), sched.c(n)
        return a, 0.0, 1.0 - a

    def power(self, n: int) -> int:
        return n if self.use_power else 1


SCHEMES: dict[str, Scheme] = {
    "IMR": Scheme("IMR", viscosity=False, keep_inertia=False, use_power=False),
    "VIM": Scheme("VIM", viscosity=True, keep_inertia=False, use_power=False),
    "GVIM": Scheme("GVIM", viscosity=True, keep_inertia=True, use_power=False),
    "AGVIM": Scheme("AGVIM", viscosity=True, keep_inertia=True, use_power=True),
    "AVIM63": Scheme("AVIM63", viscosity=True, keep_inertia=False, use_power=True),
}


def scheme_by_name(name: str) -> Scheme:
    try:
        return SCHEMES[name.strip().upper()]
    except KeyError:
        raise InvalidInputError(
            f"unknown scheme {name!r}; choose from {sorted(SCHEMES)}"
        ) from None


@dataclass(frozen=True)
class SolverConfig:
    """Everything a run needs.

    ``tol_step = 0`` disables the step-norm stop (the loop then runs
    max_outer steps, or stops on an exactly stationary iterate); with a
    positive tol_step, tol_inner must be strictly smaller so the inner
    error cannot pollute the outer stopping decision. ``power_cap``
    bounds n-fold power evaluation for mappings without a closed form.
    ``force`` skips the upfront well-posedness scan of q_n.
    """

    scheme: Scheme
    mapping: Mapping
    schedule: Schedule
    x1: np.ndarray
    contraction: Optional[Contraction] = None
    max_outer: int = 10_000
    tol_step: float = 1e-8
    tol_inner: float = 1e-12
    max_inner: int = 10_000
    norm: NormSpec = field(default_factory=NormSpec)
    power_cap: int = 1_000
    force: bool = False

    def __post_init__(self):
        object.__setattr__(self, "x1", as_vector(self.x1, dim=self.mapping.domain_dim))
        if self.max_inner < 1 or self.max_outer < 1:
            raise InvalidInputError("max_inner and max_outer must be >= 1")
        if self.tol_step < 0.0 or self.tol_inner <= 0.0:
            raise InvalidInputError("tolerances must be positive (tol_step may be 0)")
        if self.tol_step > 0.0 and not (self.tol_inner < self.tol_step):
            raise InvalidInputError(
                f"tol_inner ({self.tol_inner}) must be smaller than tol_step ({self.tol_step})"
            )
        if self.scheme.viscosity and self.contraction is None:
            raise InvalidInputError(f"scheme {self.scheme.name} needs a contraction")

    def step_contraction_factor(self, n: int) -> float:
        """q_n for this scheme: operator coefficient times k_p / 2."""
        _, _, cT = self.scheme.coefficients(self.schedule, n)
        return 0.5 * cT * self.schedule.k(self.scheme.power(n))


@dataclass(frozen=True)
class StepResult:
    x: np.ndarray
    inner_iters: int
    q: float
    bound: float
    deltas: Optional[list] = None


def implicit_step(cfg: SolverConfig, n: int, x_n, collect_deltas: bool = False) -> StepResult:
    """Solve one implicit step by Picard iteration on the step map.

    Returns the accepted iterate together with the inner iteration count
    and the final a-posteriori bound; the accepted iterate is within
    tol_inner of the exact step solution whenever the contraction bound
    is valid. Raises IllPosedError if q_n >= 1 and InnerBudgetError if
    max_inner is hit first (the achieved bound is attached).
    """
    x_n = as_vector(x_n, dim=cfg.mapping.domain_dim)
    cf, cx, cT = cfg.scheme.coefficients(cfg.schedule, n)
    p = cfg.scheme.power(n)
    q = cfg.step_contraction_factor(n)
    if q >= 1.0:
        raise IllPosedError(
            f"implicit step not a contraction at n={n}: q_n = {q:.6f} >= 1", n=n, q=q
        )

    base = cx * x_n
    if cf != 0.0:
        base = base + cf * cfg.contraction(x_n)

    if cT == 0.0:
        # operator term absent: the step map is constant
        return StepResult(x=base, inner_iters=1, q=q, bound=0.0,
                          deltas=[] if collect_deltas else None)

    factor = q / (1.0 - q)
    y = x_n
    deltas = [] if collect_deltas else None
    for m in range(1, cfg.max_inner + 1):
        y_new = base + cT * apply_power(cfg.mapping, p, 0.5 * (x_n + y), cap=cfg.power_cap)
        delta = norm(y_new - y, cfg.norm)
        if deltas is not None:
            deltas.append(delta)
        y = y_new
        bound = factor * delta
        if bound <= cfg.tol_inner:
            return StepResult(x=y, inner_iters=m, q=q, bound=bound, deltas=deltas)
    raise InnerBudgetError(
        f"inner solver hit max_inner={cfg.max_inner} at n={n}; achieved bound {bound:.3e}",
        n=n, achieved_bound=bound, iterations=cfg.max_inner,
    )


def implicit_step_affine_oracle(
    A,
    b,
    scheme: Scheme,
    schedule: Schedule,
    n: int,
    x_n,
    contraction: Optional[Contraction] = None,
) -> np.ndarray:
    """Exact implicit step for an affine mapping u -> A u + b.

    Solves (I - (cT/2) A_p) x = cf f(x_n) + cx x_n + cT (A_p x_n / 2 + b_p)
    directly, with (A_p, b_p) the affine p-th power. Independent of the
    Picard path; used as its oracle.
    """
    A = np.asarray(A, dtype=float)
    x_n = as_vector(x_n, dim=A.shape[0])
    cf, cx, cT = scheme.coefficients(schedule, n)
    p = scheme.power(n)
    Ap, bp = affine_power_pair(A, b, p)
    rhs = cx * x_n + cT * (Ap @ x_n / 2.0 + bp)
    if cf != 0.0:
        if contraction is None:
            raise InvalidInputError("scheme uses a contraction but none was given")
        rhs = rhs + cf * contraction(x_n)
    M = np.eye(A.shape[0]) - 0.5 * cT * Ap
    try:
        return np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise IllPosedError(f"singular implicit system at n={n}: {exc}", n=n) from exc


@dataclass(frozen=True)
class TraceRecord:
    """State at the start of outer step n plus the step's statistics.

    res_power is ||x_n - T^n x_n|| (NaN when the power is uncomputable
    under the configured cap); res_map is ||x_n - T x_n||.
    """

    n: int
    x: np.ndarray
    step_norm: float
    res_map: float
    res_power: float
    inner_iters: int
    q: float
    a: float
    b: float
    c: float
    k: float


@dataclass(frozen=True)
class Trace:
    records: list
    final: np.ndarray
    converged: bool
    scheme: str

    def __len__(self):
        return len(self.records)

    def iterates(self) -> np.ndarray:
        """All iterates including the final one, stacked row-wise."""
        return np.vstack([r.x for r in self.records] + [self.final])

    def step_norms(self) -> np.ndarray:
        return np.array([r.step_norm for r in self.records])

    def res_map(self) -> np.ndarray:
        return np.array([r.res_map for r in self.records])

    def res_power(self) -> np.ndarray:
        return np.array([r.res_power for r in self.records])


def _power_residual(cfg: SolverConfig, n: int, x: np.ndarray) -> float:
    """||x - T^n x||, NaN when n exceeds the fold cap for closed-form-less maps."""
    try:
        return norm(x - apply_power(cfg.mapping, n, x, cap=cfg.power_cap), cfg.norm)
    except InvalidInputError:
        return math.nan


def run(cfg: SolverConfig) -> Trace:
    """Iterate the configured scheme from x1.

    Stops when ||x_{n+1} - x_n|| <= tol_step or after max_outer steps.
    Unless ``cfg.force``, the q_n sequence is scanned upfront over the
    whole outer budget and the first ill-posed index is reported before
    any work is done.
    """
    if not cfg.force:
        for n in range(1, cfg.max_outer + 1):
            try:
                qn = cfg.step_contraction_factor(n)
            except InvalidInputError:
                break  # schedule horizon shorter than max_outer; checked lazily
            if qn >= 1.0:
                raise IllPosedError(
                    f"schedule is ill-posed for scheme {cfg.scheme.name}: "
                    f"q_n = {qn:.6f} >= 1 first at n={n}",
                    n=n, q=qn,
                )

    records = []
    x = cfg.x1
    converged = False
    for n in range(1, cfg.max_outer + 1):
        res_map = norm(x - cfg.mapping(x), cfg.norm)
        res_power = _power_residual(cfg, n, x)
        step = implicit_step(cfg, n, x)
        step_norm = norm(step.x - x, cfg.norm)
        records.append(
            TraceRecord(
                n=n,
                x=x,
                step_norm=step_norm,
                res_map=res_map,
                res_power=res_power,
                inner_iters=step.inner_iters,
                q=step.q,
                a=cfg.schedule.a(n),
                b=cfg.schedule.b(n),
                c=cfg.schedule.c(n),
                k=cfg.schedule.k(n),
            )
        )
        x = step.x
        if step_norm <= cfg.tol_step:
            converged = True
            break
    return Trace(records=records, final=x, converged=converged, scheme=cfg.scheme.name)


def residual_profile(trace: Trace):
    """Sequence of (n, step_norm, res_map, res_power) straight from the trace."""
    if not trace.records:
        raise InvalidInputError("empty trace")
    return [(r.n, r.step_norm, r.res_map, r.res_power) for r in trace.records]

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

from ..errors import InvalidProblem
from ..graph import VertexFunction


class Method(str, enum.Enum):
    NEWTON = "Newton"
    VARIATIONAL = "Variational"
    MONOTONE = "Monotone"


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and budgets shared by every solver.

    ``march_factor``, ``newton_starts`` and ``max_march_steps`` only matter
    for the threshold search and the multi-start fallback.
    """

    residual_tol: float = 1e-10
    step_tol: float = 1e-12
    max_iterations: int = 500
    newton_damping: float = 0.5
    constraint_tol: float = 1e-10
    rng_seed: int = 0
    march_factor: float = 2.0
    newton_starts: int = 20
    max_march_steps: int = 40

    def __post_init__(self):
        for name in ("residual_tol", "step_tol", "constraint_tol"):
            if not getattr(self, name) > 0:
                raise InvalidProblem(f"{name} must be positive")
        if not 0 < self.newton_damping < 1:
            raise InvalidProblem("newton_damping must lie in (0, 1)")
        if self.max_iterations < 1 or self.newton_starts < 1 or self.max_march_steps < 1:
            raise InvalidProblem("iteration budgets must be positive")
        if not self.march_factor > 1:
            raise InvalidProblem("march_factor must exceed 1")


@dataclass(frozen=True)
class Multipliers:
    """Fitted Lagrange multipliers and the shift applied afterwards.

    For ``c = 0`` the fit is ``Δᵐv + (λ/2)·h eᵛ + γ/2 = 0`` and the returned
    solution is ``v + θ`` with ``e^θ = λ/2``. For ``c ≠ 0`` it is
    ``Δᵐu = c − λ·h eᵘ``; ``gamma`` and ``theta`` are then ``None``.
    """

    lam: float
    gamma: float | None = None
    theta: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"lambda": self.lam, "gamma": self.gamma, "theta": self.theta}


@dataclass
class SolveReport:
    solution: VertexFunction
    residual_inf: float
    iterations: int
    method: Method
    energy: float
    multipliers: Multipliers | None = None
    trace: list[dict[str, Any]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    state: Any = field(default=None, repr=False)

    def to_dict(self, verbose: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {
            "method": self.method.value,
            "solution": self.solution.as_dict(),
            "residual_inf": self.residual_inf,
            "iterations": self.iterations,
            "energy": self.energy,
            "multipliers": self.multipliers.to_dict() if self.multipliers else None,
            "notes": list(self.notes),
        }
        if verbose:
            out["trace"] = list(self.trace)
        return out

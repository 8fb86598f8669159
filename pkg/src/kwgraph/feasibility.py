"""Solvability verdicts and explicit members of the constraint sets.

Notation: ``B1 = {v : ∫h eᵛ dμ = 0, ∫v dμ = 0}`` and
``B2 = {u : ∫h eᵘ dμ = c·Vol(V)}`` (the same set serves the negative-c,
higher-order route).

For even order the residual ``Δᵐu − c + h eᵘ`` equals
``(−Δ)ᵐu − c + h eᵘ``, which after the substitution ``(c, h) → (−c, −h)`` is
the odd-order form ``(−Δ)ᵐu = h eᵘ − c`` that the variational arguments
actually treat. :func:`check` applies the theorems to that transformed pair.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import BracketingFailed, PreconditionFailed
from .graph import Graph, VertexFunction, values_of
from .numerics import bisect
from .operators import Problem

L_MAX = 700.0


class Case(str, enum.Enum):
    ZERO_C = "ZeroC"
    POSITIVE_C = "PositiveC"
    NEGATIVE_C = "NegativeC"


class Status(str, enum.Enum):
    SOLVABLE_CERTIFIED = "SolvableCertified"
    NECESSARY_CONDITIONS_HOLD = "NecessaryConditionsHold"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class FeasibilityVerdict:
    case: Case
    status: Status
    reasons: dict[str, bool]
    basis: str = ""
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "case": self.case.value,
            "status": self.status.value,
            "reasons": dict(self.reasons),
            "basis": self.basis,
            "notes": list(self.notes),
        }


def sign_reasons(g: Graph, h: np.ndarray) -> dict[str, bool]:
    total = float(g.mu @ h)
    pos = bool(np.any(h > 0))
    neg = bool(np.any(h < 0))
    return {
        "h_changes_sign": pos and neg,
        "integral_h_negative": total < 0,
        "h_positive_somewhere": pos,
        "mean_h_negative": total / g.volume < 0,
        "h_nonpositive_nontrivial": bool(np.all(h <= 0)) and neg,
        "integral_h_positive": total > 0,
        "h_negative_somewhere": neg,
        "h_negative_everywhere": bool(np.all(h < 0)),
        "h_positive_everywhere": bool(np.all(h > 0)),
    }


def check(g: Graph, p: Problem) -> FeasibilityVerdict:
    """Classify the problem by the solvability theorems for its sign of ``c``."""
    h = values_of(g, p.h)
    r = sign_reasons(g, h)
    case = Case.ZERO_C if p.c == 0 else (Case.POSITIVE_C if p.c > 0 else Case.NEGATIVE_C)
    S = Status

    if p.m == 1:
        if case is Case.ZERO_C:
            ok = r["h_changes_sign"] and r["integral_h_negative"]
            return FeasibilityVerdict(case, S.SOLVABLE_CERTIFIED if ok else S.INFEASIBLE, r,
                                      "c=0 is solvable iff h changes sign and ∫h<0")
        if case is Case.POSITIVE_C:
            ok = r["h_positive_somewhere"]
            return FeasibilityVerdict(case, S.SOLVABLE_CERTIFIED if ok else S.INFEASIBLE, r,
                                      "c>0 is solvable iff h is positive somewhere")
        if not r["mean_h_negative"]:
            return FeasibilityVerdict(case, S.INFEASIBLE, r, "c<0 requires mean(h)<0")
        if r["h_nonpositive_nontrivial"]:
            return FeasibilityVerdict(case, S.SOLVABLE_CERTIFIED, r,
                                      "c<0, h<=0 and h not identically 0: solvable for every c<0")
        return FeasibilityVerdict(case, S.NECESSARY_CONDITIONS_HOLD, r,
                                  "c<0: solvable above a critical constant, unsolvable below it")

    odd = p.m % 2 == 1
    # conditions on the transformed pair (c', h') = (±c, ±h), phrased in terms of h
    if odd:
        changes, integral_ok = r["h_changes_sign"], r["integral_h_negative"]
        pos_somewhere, neg_everywhere = r["h_positive_somewhere"], r["h_negative_everywhere"]
        neg_somewhere = r["h_negative_somewhere"]
        ceff = p.c
    else:
        changes, integral_ok = r["h_changes_sign"], r["integral_h_positive"]
        pos_somewhere, neg_everywhere = r["h_negative_somewhere"], r["h_positive_everywhere"]
        neg_somewhere = r["h_positive_somewhere"]
        ceff = -p.c
    notes = [] if odd else ["even order: conditions stated for (c, h) -> (-c, -h)"]

    if ceff == 0:
        if not changes:
            return FeasibilityVerdict(case, S.INFEASIBLE, r, "c=0 requires h to change sign", notes)
        if integral_ok:
            return FeasibilityVerdict(case, S.SOLVABLE_CERTIFIED, r,
                                      "c=0, order m: sign change and integral condition", notes)
        return FeasibilityVerdict(case, S.NECESSARY_CONDITIONS_HOLD, r,
                                  "c=0, order m>1: integral condition fails; no theorem decides",
                                  notes)
    if ceff > 0:
        ok = pos_somewhere
        return FeasibilityVerdict(case, S.SOLVABLE_CERTIFIED if ok else S.INFEASIBLE, r,
                                  "positive effective c: sign condition necessary and sufficient",
                                  notes)
    if not neg_somewhere:
        return FeasibilityVerdict(case, S.INFEASIBLE, r,
                                  "negative effective c requires the integral constraint to be "
                                  "attainable", notes)
    if neg_everywhere:
        return FeasibilityVerdict(case, S.SOLVABLE_CERTIFIED, r,
                                  "negative effective c with strictly signed h", notes)
    return FeasibilityVerdict(case, S.NECESSARY_CONDITIONS_HOLD, r,
                              "negative effective c, order m>1: only strictly signed h is "
                              "certified", notes)


def _grow_spike(bracketed) -> float:
    ell = 1.0
    while ell <= L_MAX:
        if bracketed(ell):
            return ell
        ell *= 2.0
    if bracketed(L_MAX):
        return L_MAX
    raise BracketingFailed(f"no spike height up to {L_MAX:g} brackets the constraint")


def seed_B1(g: Graph, h: VertexFunction) -> VertexFunction:
    """A member of ``B1`` built from a single spike.

    Put a spike of height ℓ at the vertex where ``h`` is largest, find
    ``t₀ ∈ (0, 1)`` with ``∫h e^{t₀·spike} dμ = 0`` by bisection, then subtract
    the mean.
    """
    hv = values_of(g, h)
    mu = g.mu
    r = sign_reasons(g, hv)
    if not (r["h_changes_sign"] and r["integral_h_negative"]):
        raise PreconditionFailed("B1 seed needs h to change sign and ∫h dμ < 0")
    x1 = int(np.argmax(hv))
    rest = float(mu @ hv) - mu[x1] * hv[x1]
    top = mu[x1] * hv[x1]

    def phi(t: float, ell: float) -> float:
        return top * np.exp(t * ell) + rest

    ell = _grow_spike(lambda e: phi(1.0, e) > 0)
    t0 = bisect(lambda t: phi(t, ell), 0.0, 1.0, ftol=1e-12)
    v = np.zeros(g.n)
    v[x1] = t0 * ell
    v -= (mu @ v) / g.volume
    drift = float(mu @ (hv * np.exp(v)))
    if abs(drift) > 1e-10 or abs(float(mu @ v)) / g.volume > 1e-12:
        raise BracketingFailed(f"B1 seed misses the constraint by {drift:.3e}")
    return g.function(v)


def seed_B2(g: Graph, h: VertexFunction, c: float) -> VertexFunction:
    """A member of ``B2``: ``∫h eᵘ dμ = c·Vol(V)``.

    Interpolates ``t·u_ℓ + (1−t)·(−ℓ)`` between a spike ``u_ℓ`` and the
    constant ``−ℓ``, doubling ℓ until the two ends bracket the target. For
    ``c > 0`` the spike sits where ``h`` is largest, for ``c < 0`` where it
    is smallest.
    """
    hv = values_of(g, h)
    mu = g.mu
    target = c * g.volume
    tol = 1e-10 * (1.0 + abs(target))
    if abs(float(mu @ hv) - target) <= 1e-12 * (1.0 + abs(target)):
        return g.constant(0.0)
    if c == 0:
        raise PreconditionFailed("B2 seed needs c != 0 (use seed_B1 for c = 0)")
    x0 = int(np.argmax(hv)) if c > 0 else int(np.argmin(hv))
    if hv[x0] * c <= 0:
        raise BracketingFailed(
            f"h e^u never reaches {target:.6g}: h has no {'positive' if c > 0 else 'negative'} value"
        )
    spike = np.zeros(g.n)
    spike[x0] = 1.0

    def phi(t: float, ell: float) -> float:
        with np.errstate(over="ignore"):
            return float(mu @ (hv * np.exp(t * ell * spike - (1.0 - t) * ell))) - target

    ell = _grow_spike(lambda e: phi(0.0, e) * phi(1.0, e) < 0)
    t0 = bisect(lambda t: phi(t, ell), 0.0, 1.0, ftol=1e-12 * (1.0 + abs(target)))
    u = t0 * ell * spike - (1.0 - t0) * ell
    miss = float(mu @ (hv * np.exp(u))) - target
    if not abs(miss) <= tol:
        raise BracketingFailed(f"B2 seed misses the constraint by {miss:.3e}")
    return g.function(u)

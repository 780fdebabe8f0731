"""Cooperative games over features and exact Shapley values.

Two concrete games are provided: the expected-value game, whose
characteristic function is the conditional expectation of the model output
with a coalition's features fixed, and the sufficiency game, whose
characteristic function is 1 exactly when the coalition is a weak
abductive explanation. The first is the classical feature-attribution
game; the second is a monotone 0/1 (simple) game whose Shapley values are
zero precisely on irrelevant features.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from math import factorial
from typing import Callable, Iterable, Mapping, Optional

from .errors import PreconditionError, SizeLimitError, ValidationError
from .explanations import (
    MODEL_AWARE,
    Universe,
    is_waxp,
    relevant_features,
)
from .models import (
    Instance,
    TabularModel,
    TreeLeaf,
    TreeModel,
    conditional_expectation,
    output_range,
)
from .similarity import CLASS_EQUALITY, ExplanationProblem

EXACT_GUARD = 24      # 2^m subset evaluations
PERMUTATION_GUARD = 10  # m! permutation evaluations

EXPECTED_VALUE = "expected"
WAXP_BASED = "waxp"
CUSTOM = "custom"


@dataclass
class Game:
    """A set of players and a characteristic function on coalitions.

    Values are memoized per game instance; the function must be pure.
    Under concurrent use the worst case is a duplicate evaluation of the
    same coalition, never an inconsistent result (dict updates are atomic).
    ``marginal_bound`` is an upper bound on |nu(S+i) - nu(S)| used by the
    sampling estimator; pass one explicitly for custom games.
    """

    players: tuple[int, ...]
    charfn: Callable[[frozenset[int]], Fraction]
    tag: str = CUSTOM
    marginal_bound: Optional[Fraction] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def value(self, coalition: Iterable[int]) -> Fraction:
        key = frozenset(coalition)
        cached = self._cache.get(key)
        if cached is None:
            cached = Fraction(self.charfn(key))
            self._cache[key] = cached
        return cached

    @property
    def m(self) -> int:
        return len(self.players)


@dataclass(frozen=True)
class ScoreVector:
    """Per-feature attribution scores, tagged with game and method."""

    scores: tuple[Fraction, ...]  # index i holds the score of feature i+1
    game: str
    method: str  # "exact" or "cgt"

    def score(self, feature_id: int) -> Fraction:
        return self.scores[feature_id - 1]

    def total(self) -> Fraction:
        return sum(self.scores, Fraction(0))

    @property
    def m(self) -> int:
        return len(self.scores)


# ---------------------------------------------------------------------------
# Characteristic functions
# ---------------------------------------------------------------------------

def cf_expected(problem: ExplanationProblem, features: Iterable[int]) -> Fraction:
    """Conditional expected model output with the coalition's features
    fixed at the instance values."""
    return conditional_expectation(problem.model, problem.instance, features)


def cf_waxp(problem: ExplanationProblem, features: Iterable[int],
            universe: Universe = MODEL_AWARE) -> int:
    """1 if fixing the coalition forces an indistinguishable output, else 0."""
    return 1 if is_waxp(problem, features, universe) else 0


def expected_game(problem: ExplanationProblem) -> Game:
    lo, hi = output_range(problem.model)
    return Game(
        players=problem.feature_ids,
        charfn=lambda s: cf_expected(problem, s),
        tag=EXPECTED_VALUE,
        marginal_bound=hi - lo,
    )


def waxp_game(problem: ExplanationProblem, universe: Universe = MODEL_AWARE) -> Game:
    return Game(
        players=problem.feature_ids,
        charfn=lambda s: Fraction(cf_waxp(problem, s, universe)),
        tag=WAXP_BASED,
        marginal_bound=Fraction(1),
    )


# ---------------------------------------------------------------------------
# Exact Shapley values
# ---------------------------------------------------------------------------

def shapley_exact(game: Game) -> ScoreVector:
    """Exact Shapley values by the weighted subset-sum formula.

    score(i) = sum over S not containing i of
               |S|! (m - |S| - 1)! / m! * (nu(S + i) - nu(S)).
    """
    m = game.m
    if m > EXACT_GUARD:
        raise SizeLimitError(f"exact computation guarded at m <= {EXACT_GUARD}, got {m}")
    weights = [Fraction(factorial(s) * factorial(m - s - 1), factorial(m)) for s in range(m)]
    scores = []
    for i in game.players:
        others = [j for j in game.players if j != i]
        acc = Fraction(0)
        for size in range(m):
            w = weights[size]
            for combo in combinations(others, size):
                s = frozenset(combo)
                acc += w * (game.value(s | {i}) - game.value(s))
        scores.append(acc)
    return ScoreVector(tuple(scores), game.tag, "exact")


def shapley_via_permutations(game: Game) -> ScoreVector:
    """Average marginal contribution over all m! player orders.

    Independent route to the same quantity as :func:`shapley_exact`; the
    two must agree exactly.
    """
    m = game.m
    if m > PERMUTATION_GUARD:
        raise SizeLimitError(
            f"permutation enumeration guarded at m <= {PERMUTATION_GUARD}, got {m}")
    acc = {i: Fraction(0) for i in game.players}
    for order in permutations(game.players):
        coalition: frozenset[int] = frozenset()
        prev = game.value(coalition)
        for player in order:
            coalition = coalition | {player}
            cur = game.value(coalition)
            acc[player] += cur - prev
            prev = cur
    n_orders = factorial(m)
    scores = tuple(acc[i] / n_orders for i in game.players)
    return ScoreVector(scores, game.tag, "exact")


# ---------------------------------------------------------------------------
# Score diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureCompliance:
    feature: int
    relevant: bool
    score: Fraction

    @property
    def misleading(self) -> bool:
        # A score misleads when it is zero on a relevant feature or
        # nonzero on an irrelevant one.
        return self.relevant == (self.score == 0)


@dataclass(frozen=True)
class ComplianceReport:
    entries: tuple[FeatureCompliance, ...]
    game: str

    @property
    def violations(self) -> tuple[int, ...]:
        return tuple(e.feature for e in self.entries if e.misleading)

    @property
    def compliant(self) -> bool:
        return not self.violations


def check_compliance(problem: ExplanationProblem, scores: ScoreVector,
                     universe: Universe = MODEL_AWARE) -> ComplianceReport:
    """Compare zero/nonzero scores against feature (ir)relevancy.

    A fully compliant vector is zero exactly on the features that occur in
    no abductive explanation."""
    relevant = set(relevant_features(problem, universe))
    entries = tuple(
        FeatureCompliance(i, i in relevant, scores.score(i))
        for i in problem.feature_ids
    )
    return ComplianceReport(entries, scores.game)


def check_value_independence(problem: ExplanationProblem,
                             relabel: Mapping,
                             universe: Universe = MODEL_AWARE) -> bool:
    """Do sufficiency-game scores survive an injective relabeling of the
    model's output values?

    The relabeled problem keeps the same instance point; its prediction is
    the relabeled original. True means the score vector is unchanged
    feature-by-feature (exact equality).
    """
    if problem.similarity.mode != CLASS_EQUALITY:
        raise PreconditionError("value independence is defined for class-equality similarity")
    relabeled = relabel_problem(problem, relabel)
    before = shapley_exact(waxp_game(problem, universe))
    after = shapley_exact(waxp_game(relabeled, universe))
    return before.scores == after.scores


def relabel_problem(problem: ExplanationProblem, relabel: Mapping) -> ExplanationProblem:
    """Apply an injective output-value map to a discrete model and its
    instance, preserving the feature space."""
    model = problem.model
    if isinstance(model, TabularModel):
        values = set(model.table.values())
    elif isinstance(model, TreeModel):
        values = {n.value for n in model.nodes.values() if isinstance(n, TreeLeaf)}
    else:
        raise PreconditionError("output relabeling needs a discrete-output model")
    missing = [v for v in values if v not in relabel]
    if missing:
        raise ValidationError(f"relabeling map misses output value {missing[0]!r}")
    images = [relabel[v] for v in values]
    if len(set(images)) != len(images):
        raise ValidationError("relabeling map is not injective on the model's outputs")
    kind = _kind_of(set(images))
    if isinstance(model, TabularModel):
        new_model = TabularModel(
            model.space, {pt: relabel[v] for pt, v in model.table.items()}, kind)
    else:
        new_nodes = {
            nid: TreeLeaf(relabel[n.value]) if isinstance(n, TreeLeaf) else n
            for nid, n in model.nodes.items()
        }
        new_model = TreeModel(model.space, new_nodes, model.root, kind)
    instance = Instance(problem.instance.point,
                        relabel[problem.instance.prediction])
    return ExplanationProblem(new_model, instance, problem.similarity)


def _kind_of(values: set) -> str:
    from .models import CATEGORICAL, NUMERIC
    return NUMERIC if all(isinstance(v, (int, Fraction)) for v in values) else CATEGORICAL

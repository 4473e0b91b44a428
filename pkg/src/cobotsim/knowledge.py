"""Confidence-scored knowledge triples with rule-based completion.

Facts are (head, relation, tail) triples carrying a belief in (0, 1].
Completion forward-chains transitive and two-step composition rules to a
fixpoint: a chained conclusion's confidence is the product of its premise
confidences, and independent derivations of the same triple keep the
maximum. Completions feed the operator-intent estimate used by authority
auto-tuning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

TripleKey = tuple[str, str, str]

INTENT_THRESHOLD = 0.5

REQUESTS = "requests"
PREFERS = "prefers"
GUIDANCE = "guidance"
AUTONOMY = "autonomy"
ASKS_FOR = "asks_for"  # raw observation lifted into "requests" by rule
FAVORS = "favors"  # raw observation lifted into "prefers" by rule
MEMBER_OF = "member_of"


class Intent(str, Enum):
    GUIDANCE_REQUESTED = "guidance_requested"
    AUTONOMY_PREFERRED = "autonomy_preferred"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class KnowledgeTriple:
    head: str
    relation: str
    tail: str
    confidence: float

    def __post_init__(self):
        for name in ("head", "relation", "tail"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value:
                raise ValueError(f"{name} must be a non-empty string, got {value!r}")
        c = self.confidence
        if not (isinstance(c, (int, float)) and math.isfinite(c) and 0.0 < c <= 1.0):
            raise ValueError(f"confidence must be in (0, 1], got {c!r}")
        object.__setattr__(self, "confidence", float(c))

    @property
    def key(self) -> TripleKey:
        return (self.head, self.relation, self.tail)


@dataclass(frozen=True)
class CompletionRule:
    """Premise relation chain (one or two) concluding another relation.

    A transitive rule is the one sanctioned self-reference: (r, r) -> r.
    Any other rule must conclude a relation absent from its premises.
    """

    premises: tuple[str, ...]
    conclusion: str

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))
        if len(self.premises) not in (1, 2):
            raise ValueError("rule needs one or two premise relations")
        if not all(isinstance(p, str) and p for p in self.premises):
            raise ValueError("premise relations must be non-empty strings")
        if not isinstance(self.conclusion, str) or not self.conclusion:
            raise ValueError("conclusion must be a non-empty string")
        if self.conclusion in self.premises and not self.is_transitive:
            raise ValueError(
                f"rule {self.premises} -> {self.conclusion!r} feeds its own premise"
            )

    @property
    def is_transitive(self) -> bool:
        return self.premises == (self.conclusion, self.conclusion)


def transitive(relation: str) -> CompletionRule:
    return CompletionRule(premises=(relation, relation), conclusion=relation)


DEFAULT_RULES: tuple[CompletionRule, ...] = (
    transitive("part_of"),
    transitive(MEMBER_OF),
    CompletionRule(premises=(ASKS_FOR,), conclusion=REQUESTS),
    CompletionRule(premises=(FAVORS,), conclusion=PREFERS),
    CompletionRule(premises=(MEMBER_OF, ASKS_FOR), conclusion=REQUESTS),
    CompletionRule(premises=(MEMBER_OF, FAVORS), conclusion=PREFERS),
)


@dataclass(frozen=True)
class KnowledgeGraph:
    """Immutable asserted-triple store; updates return a new graph."""

    triples: dict[TripleKey, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "triples", dict(self.triples))

    def __len__(self) -> int:
        return len(self.triples)

    def confidence(self, head: str, relation: str, tail: str) -> float:
        """Asserted confidence, 0.0 when absent."""
        return self.triples.get((head, relation, tail), 0.0)

    def as_triples(self) -> tuple[KnowledgeTriple, ...]:
        return tuple(
            KnowledgeTriple(h, r, t, c) for (h, r, t), c in sorted(self.triples.items())
        )


@dataclass(frozen=True)
class IntentEstimate:
    """Operator intent resolved from asserted plus completed triples."""

    intent: Intent
    confidence: float
    supporting: tuple[KnowledgeTriple, ...] = ()
    threshold: float = INTENT_THRESHOLD

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        below = self.confidence < self.threshold
        if below != (self.intent is Intent.UNKNOWN):
            raise ValueError("unknown intent exactly when confidence is sub-threshold")

    def wants_guidance(self) -> bool:
        return self.intent is Intent.GUIDANCE_REQUESTED


def assert_triple(graph: KnowledgeGraph, triple: KnowledgeTriple) -> KnowledgeGraph:
    """Insert, keeping the maximum confidence on re-assertion."""
    merged = dict(graph.triples)
    key = triple.key
    if triple.confidence > merged.get(key, 0.0):
        merged[key] = triple.confidence
    return KnowledgeGraph(triples=merged)


def _apply_rules(
    facts: dict[TripleKey, float], rules: Iterable[CompletionRule]
) -> dict[TripleKey, float]:
    """One forward-chaining round over the current fact view."""
    by_relation: dict[str, list[tuple[str, str, float]]] = {}
    by_head: dict[tuple[str, str], list[tuple[str, float]]] = {}
    for (h, r, t), c in facts.items():
        by_relation.setdefault(r, []).append((h, t, c))
        by_head.setdefault((r, h), []).append((t, c))
    derived: dict[TripleKey, float] = {}
    for rule in rules:
        if len(rule.premises) == 1:
            for h, t, c in by_relation.get(rule.premises[0], ()):
                key = (h, rule.conclusion, t)
                if c > derived.get(key, 0.0):
                    derived[key] = c
        else:
            first, second = rule.premises
            for h, mid, c1 in by_relation.get(first, ()):
                for t, c2 in by_head.get((second, mid), ()):
                    key = (h, rule.conclusion, t)
                    c = c1 * c2
                    if c > derived.get(key, 0.0):
                        derived[key] = c
    return derived


def complete(
    graph: KnowledgeGraph, rules: Iterable[CompletionRule] = DEFAULT_RULES
) -> dict[TripleKey, float]:
    """Inferred triples at the forward-chaining fixpoint.

    Derivations may chain on earlier inferences. The result contains only
    keys whose inferred confidence beats any asserted value for the same
    key; asserted facts are never weakened.
    """
    rules = tuple(rules)
    view = dict(graph.triples)
    inferred: dict[TripleKey, float] = {}
    while True:
        changed = False
        for key, c in _apply_rules(view, rules).items():
            if c > view.get(key, 0.0):
                view[key] = c
                inferred[key] = c
                changed = True
        if not changed:
            break
    return {k: c for k, c in inferred.items() if c > graph.triples.get(k, 0.0)}


def merged_view(
    graph: KnowledgeGraph, rules: Iterable[CompletionRule] = DEFAULT_RULES
) -> dict[TripleKey, float]:
    """Asserted facts joined with completions, maximum confidence per key."""
    view = dict(graph.triples)
    for key, c in complete(graph, rules).items():
        if c > view.get(key, 0.0):
            view[key] = c
    return view


def query(
    graph: KnowledgeGraph,
    head: Optional[str] = None,
    relation: Optional[str] = None,
    tail: Optional[str] = None,
    rules: Iterable[CompletionRule] = DEFAULT_RULES,
) -> tuple[KnowledgeTriple, ...]:
    """Pattern match over asserted plus completed triples.

    None binds nothing (wildcard). Results are ordered lexicographically by
    (head, relation, tail).
    """
    out = []
    for (h, r, t), c in sorted(merged_view(graph, rules).items()):
        if (head is None or h == head) and (relation is None or r == relation) and (
            tail is None or t == tail
        ):
            out.append(KnowledgeTriple(h, r, t, c))
    return tuple(out)


def infer_intent(
    graph: KnowledgeGraph,
    worker_id: str,
    rules: Iterable[CompletionRule] = DEFAULT_RULES,
    threshold: float = INTENT_THRESHOLD,
) -> IntentEstimate:
    """Resolve whether a worker wants guidance or autonomy.

    Compares (worker, requests, guidance) against (worker, prefers,
    autonomy) over the completed view; the higher confidence wins when it
    clears the threshold, guidance winning exact ties. Anything below the
    threshold is Unknown.
    """
    view = merged_view(graph, rules)
    guidance_key = (worker_id, REQUESTS, GUIDANCE)
    autonomy_key = (worker_id, PREFERS, AUTONOMY)
    c_guidance = view.get(guidance_key, 0.0)
    c_autonomy = view.get(autonomy_key, 0.0)
    if max(c_guidance, c_autonomy) < threshold:
        return IntentEstimate(
            intent=Intent.UNKNOWN,
            confidence=max(c_guidance, c_autonomy),
            threshold=threshold,
        )
    if c_guidance >= c_autonomy:
        support = (KnowledgeTriple(*guidance_key, confidence=c_guidance),)
        return IntentEstimate(
            intent=Intent.GUIDANCE_REQUESTED,
            confidence=c_guidance,
            supporting=support,
            threshold=threshold,
        )
    support = (KnowledgeTriple(*autonomy_key, confidence=c_autonomy),)
    return IntentEstimate(
        intent=Intent.AUTONOMY_PREFERRED,
        confidence=c_autonomy,
        supporting=support,
        threshold=threshold,
    )

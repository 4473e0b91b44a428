"""Plain-language compliance commands.

An utterance is tokenized, scored against a small vocabulary bank by
normalized edit similarity, and resolved to a single compliance command (or
none). Commands only retune admittance parameters inside the stable region;
they never touch the desired trajectory, so free-space motion is preserved.
The scorer is a deterministic stand-in with the same interface a learned
model would have.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .admittance import AdmittanceParams, ParamBounds, clamp_to_stable

SIMILARITY_FLOOR = 0.75

_PUNCT = re.compile(r"[^\w\s]", re.UNICODE)


class Effect(str, Enum):
    SCALE_STIFFNESS = "scale_stiffness"
    SCALE_DAMPING = "scale_damping"
    SCALE_MASS = "scale_mass"
    SCALE_SPEED = "scale_speed"


@dataclass(frozen=True)
class VocabEntry:
    token: str
    effect: Effect
    factor: float
    aliases: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "token", self.token.lower().strip())
        object.__setattr__(self, "aliases", tuple(a.lower().strip() for a in self.aliases))
        if not self.token:
            raise ValueError("vocabulary token must be non-empty")
        if not (self.factor > 0) or not math.isfinite(self.factor):
            raise ValueError(f"factor for {self.token!r} must be finite and > 0")

    def phrases(self) -> tuple[str, ...]:
        return (self.token, *self.aliases)


@dataclass(frozen=True)
class VocabularyBank:
    entries: tuple[VocabEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        seen: set[str] = set()
        for entry in self.entries:
            for phrase in entry.phrases():
                if phrase in seen:
                    raise ValueError(f"duplicate vocabulary phrase {phrase!r}")
                seen.add(phrase)

    def __len__(self) -> int:
        return len(self.entries)


def default_bank() -> VocabularyBank:
    """Stock vocabulary; factors are configuration, not ground truth."""
    return VocabularyBank(
        entries=(
            VocabEntry("softly", Effect.SCALE_STIFFNESS, 0.5, aliases=("soft",)),
            VocabEntry("gently", Effect.SCALE_STIFFNESS, 0.7, aliases=("gentle",)),
            VocabEntry("stiffly", Effect.SCALE_STIFFNESS, 2.0, aliases=("stiff", "firmly")),
            VocabEntry("slow down", Effect.SCALE_SPEED, 0.5, aliases=("slower",)),
            VocabEntry("heavier feel", Effect.SCALE_MASS, 1.5, aliases=("heavier",)),
        )
    )


@dataclass(frozen=True)
class EntryScore:
    """Normalized score for one bank entry; position is the index of the
    first token of its best-matching window (earliest such window)."""

    token: str
    score: float
    position: int


@dataclass(frozen=True)
class ComplianceCommand:
    matched_token: str
    effect: Effect
    factor: float
    confidence: float
    target_object: Optional[str] = None
    scores: tuple[EntryScore, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


def tokenize(utterance: str) -> list[str]:
    """Lowercased, punctuation-stripped, whitespace-split; order kept."""
    return _PUNCT.sub(" ", utterance.lower()).split()


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance, single-row dynamic program."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def similarity(a: str, b: str) -> float:
    """1 - distance/maxlen, in [0, 1]; empty vs empty counts as identical."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - edit_distance(a, b) / longest


def _best_window_match(tokens: list[str], phrase: str) -> tuple[float, int]:
    """Best similarity of phrase against same-width token windows.

    Multi-word phrases slide a window of their own word count over the
    token list, joined by single spaces. Returns (score, window start);
    the earliest window attaining the maximum wins.
    """
    width = max(1, len(phrase.split()))
    if len(tokens) < width:
        candidates = [" ".join(tokens)] if tokens else []
        return (similarity(candidates[0], phrase), 0) if candidates else (0.0, 0)
    best, best_pos = -1.0, 0
    for start in range(len(tokens) - width + 1):
        window = " ".join(tokens[start : start + width])
        s = similarity(window, phrase)
        if s > best:
            best, best_pos = s, start
    return best, best_pos


def score_tokens(
    tokens: Sequence[str], bank: VocabularyBank, floor: float = SIMILARITY_FLOOR
) -> tuple[EntryScore, ...]:
    """Per-entry best similarity, floored then normalized to sum 1.

    Entries whose best similarity falls below the floor are dropped; when
    nothing survives the result is empty.
    """
    if not bank.entries:
        raise ValueError("vocabulary bank is empty")
    toks = list(tokens)
    raw: list[tuple[VocabEntry, float, int]] = []
    for entry in bank.entries:
        best, best_pos = -1.0, 0
        for phrase in entry.phrases():
            s, pos = _best_window_match(toks, phrase)
            if s > best or (s == best and pos < best_pos):
                best, best_pos = s, pos
        if best >= floor:
            raw.append((entry, best, best_pos))
    total = sum(s for _, s, _ in raw)
    if total <= 0.0:
        return ()
    return tuple(
        EntryScore(token=e.token, score=s / total, position=pos) for e, s, pos in raw
    )


def interpret(
    utterance: str,
    bank: VocabularyBank,
    object_ids: Sequence[str] = (),
    floor: float = SIMILARITY_FLOOR,
) -> Optional[ComplianceCommand]:
    """Resolve an utterance to at most one compliance command.

    The highest normalized score wins; ties go to the entry matched
    earliest in the utterance. An object whose id appears as a token
    becomes the command target. Returns None when no entry clears the
    similarity floor.
    """
    tokens = tokenize(utterance)
    scores = score_tokens(tokens, bank, floor)
    if not scores:
        return None
    winner = max(scores, key=lambda s: (s.score, -s.position))
    entry = next(e for e in bank.entries if e.token == winner.token)
    known = {oid.lower(): oid for oid in object_ids}
    target = next((known[t] for t in tokens if t in known), None)
    return ComplianceCommand(
        matched_token=entry.token,
        effect=entry.effect,
        factor=entry.factor,
        confidence=winner.score,
        target_object=target,
        scores=scores,
    )


def apply_command(
    cmd: ComplianceCommand, params: AdmittanceParams, bounds: ParamBounds, dt: float
) -> AdmittanceParams:
    """Scale the targeted admittance parameter, then clamp into the stable
    box. Speed scaling has no admittance parameter; the session applies it
    to the active trajectory, so the params pass through unchanged."""
    if cmd.effect is Effect.SCALE_STIFFNESS:
        params = AdmittanceParams(
            mass=params.mass,
            damping=params.damping,
            stiffness=tuple(k * cmd.factor for k in params.stiffness),
        )
    elif cmd.effect is Effect.SCALE_DAMPING:
        params = AdmittanceParams(
            mass=params.mass,
            damping=tuple(d * cmd.factor for d in params.damping),
            stiffness=params.stiffness,
        )
    elif cmd.effect is Effect.SCALE_MASS:
        params = AdmittanceParams(
            mass=tuple(m * cmd.factor for m in params.mass),
            damping=params.damping,
            stiffness=params.stiffness,
        )
    return clamp_to_stable(params, bounds, dt)

"""Finite two-player games: construction, validation, parallel repetition,
built-in games and the JSON game format.

A game is stored index-first.  Questions and answers are dense 0-based
indices; the label tuples are only for display and file round-trips.  The
question distribution is an ``(|X|, |Y|)`` object array of ``Fraction`` and the
predicate an ``(|X|, |Y|, |A|, |B|)`` int8 array holding 1 (accept), 0 (reject)
or -1 (undefined; only ever present in an unvalidated game).
"""

from __future__ import annotations

import itertools
import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from pathlib import Path
from typing import Any

import numpy as np

from .errors import (
    IncompletePredicate,
    InputError,
    InvalidSizeParameter,
    NegativeProbability,
    NonNormalizedDistribution,
    ShapeMismatch,
    SizeBudgetExceeded,
    UnknownGame,
)

DEFAULT_CELL_BUDGET = 10**8

BUILTIN_GAMES = ("magic-square", "chsh", "nonlocal-dj", "hidden-matching")


def to_fraction(value: Any) -> Fraction:
    """Exact conversion; floats go through their shortest repr (0.1 -> 1/10)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        return Fraction(repr(float(value)))
    if isinstance(value, (tuple, list)) and len(value) == 2:
        return Fraction(int(value[0]), int(value[1]))
    return Fraction(value)


@dataclass(frozen=True)
class Diagnostic:
    kind: type
    message: str

    @property
    def code(self) -> str:
        return self.kind.__name__


@dataclass(frozen=True, eq=False)
class Game:
    """A finite two-player one-round game.

    Construct through :func:`make_game` (validating) unless you need an
    intentionally broken instance, e.g. to exercise :func:`validate`.
    """

    questions_a: tuple
    questions_b: tuple
    answers_a: tuple
    answers_b: tuple
    distribution: np.ndarray
    predicate: np.ndarray
    name: str = ""

    def __post_init__(self) -> None:
        for arr in (self.distribution, self.predicate):
            arr.flags.writeable = False

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (len(self.questions_a), len(self.questions_b), len(self.answers_a), len(self.answers_b))

    @cached_property
    def accepts(self) -> np.ndarray:
        out = self.predicate == 1
        out.flags.writeable = False
        return out

    @cached_property
    def weights(self) -> np.ndarray:
        """Question distribution as float64."""
        out = np.array([[float(p) for p in row] for row in self.distribution], dtype=float)
        out = out.reshape(self.shape[:2])
        out.flags.writeable = False
        return out

    def probability(self, x: int, y: int) -> Fraction:
        return self.distribution[x, y]

    def support(self) -> list[tuple[int, int]]:
        nx, ny = self.shape[:2]
        return [(x, y) for x in range(nx) for y in range(ny) if self.distribution[x, y] != 0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Game):
            return NotImplemented
        return (
            self.questions_a == other.questions_a
            and self.questions_b == other.questions_b
            and self.answers_a == other.answers_a
            and self.answers_b == other.answers_b
            and self.distribution.shape == other.distribution.shape
            and all(p == q for p, q in zip(self.distribution.flat, other.distribution.flat))
            and np.array_equal(self.predicate, other.predicate)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        nx, ny, na, nb = self.shape
        label = f"{self.name!r}, " if self.name else ""
        return f"Game({label}|X|={nx}, |Y|={ny}, |A|={na}, |B|={nb})"


def _labels(spec: int | Sequence) -> tuple:
    if isinstance(spec, (int, np.integer)):
        if spec < 1:
            raise InputError(f"set size must be >= 1, got {spec}")
        return tuple(range(int(spec)))
    return tuple(spec)


def _coerce_distribution(dist: Any, nx: int, ny: int) -> np.ndarray:
    out = np.empty((nx, ny), dtype=object)
    out.fill(Fraction(0))
    if isinstance(dist, Mapping):
        for (x, y), p in dist.items():
            if not (0 <= x < nx and 0 <= y < ny):
                raise ShapeMismatch(f"distribution entry ({x}, {y}) out of range")
            out[x, y] = to_fraction(p)
        return out
    rows = list(dist)
    if len(rows) != nx or any(len(row) != ny for row in rows):
        raise ShapeMismatch(f"distribution table must be {nx}x{ny}")
    for x, row in enumerate(rows):
        for y, p in enumerate(row):
            out[x, y] = to_fraction(p)
    return out


def _coerce_predicate(pred: Any, shape: tuple[int, int, int, int]) -> np.ndarray:
    if callable(pred):
        out = np.zeros(shape, dtype=np.int8)
        for idx in itertools.product(*map(range, shape)):
            out[idx] = 1 if pred(*idx) else 0
        return out
    if isinstance(pred, (set, frozenset)):
        out = np.zeros(shape, dtype=np.int8)
        for idx in pred:
            if not all(0 <= i < n for i, n in zip(idx, shape)) or len(idx) != 4:
                raise ShapeMismatch(f"predicate quadruple {idx} out of range")
            out[tuple(idx)] = 1
        return out
    out = np.full(shape, -1, dtype=np.int8)
    if isinstance(pred, Mapping):
        for idx, v in pred.items():
            out[tuple(idx)] = 1 if v else 0
        return out
    arr = np.asarray(pred, dtype=object)
    if arr.ndim != 4:
        return out
    overlap = tuple(slice(0, min(a, b)) for a, b in zip(arr.shape, shape))
    sub = arr[overlap]
    filled = np.vectorize(lambda v: -1 if v is None else (1 if v else 0), otypes=[np.int8])(sub)
    out[overlap] = filled
    return out


def validate(g: Game) -> list[Diagnostic]:
    """Return one diagnostic per violated invariant; empty iff ``g`` is valid."""
    diags: list[Diagnostic] = []
    shape = tuple(len(s) for s in (g.questions_a, g.questions_b, g.answers_a, g.answers_b))
    if min(shape) < 1:
        diags.append(Diagnostic(InputError, f"all sets need at least one element, sizes {shape}"))
    if g.distribution.shape != shape[:2]:
        diags.append(Diagnostic(ShapeMismatch, f"distribution shape {g.distribution.shape} != {shape[:2]}"))
        return diags
    negatives = [(x, y) for (x, y), p in np.ndenumerate(g.distribution) if p < 0]
    for x, y in negatives:
        diags.append(Diagnostic(NegativeProbability, f"P({x},{y}) = {g.distribution[x, y]} < 0"))
    total = sum(g.distribution.flat, Fraction(0))
    if total != 1:
        diags.append(Diagnostic(NonNormalizedDistribution, f"distribution sums to {total}, not 1"))
    if g.predicate.shape != shape:
        diags.append(Diagnostic(IncompletePredicate, f"predicate shape {g.predicate.shape} != {shape}"))
    else:
        missing = np.argwhere(g.predicate < 0)
        for cell in missing:
            diags.append(Diagnostic(IncompletePredicate, f"predicate undefined at {tuple(int(i) for i in cell)}"))
    return diags


def make_game(
    questions_a: int | Sequence,
    questions_b: int | Sequence,
    answers_a: int | Sequence,
    answers_b: int | Sequence,
    distribution: Any,
    predicate: Any,
    *,
    name: str = "",
) -> Game:
    """Build and validate a game.

    ``questions_*``/``answers_*`` are label sequences or plain sizes.  The
    distribution is an ``|X| x |Y|`` table or a ``{(x, y): p}`` mapping
    (missing entries are 0).  The predicate may be a callable on indices, a
    4-d table, a ``{(x, y, a, b): bool}`` mapping (which must be total), or a
    set of accepted quadruples.
    """
    qa, qb, aa, ab = (_labels(s) for s in (questions_a, questions_b, answers_a, answers_b))
    shape = (len(qa), len(qb), len(aa), len(ab))
    g = Game(qa, qb, aa, ab, _coerce_distribution(distribution, *shape[:2]), _coerce_predicate(predicate, shape), name)
    diags = validate(g)
    if diags:
        raise diags[0].kind(diags[0].message)
    return g


def check_cells(shape: Sequence[int], budget: int = DEFAULT_CELL_BUDGET) -> None:
    cells = math.prod(shape)
    if cells > budget:
        raise SizeBudgetExceeded(f"question-answer table has {cells} cells, budget is {budget}")


def parallel_repeat(g: Game, n: int, *, budget: int = DEFAULT_CELL_BUDGET) -> Game:
    """The n-fold parallel repetition: product questions, product distribution,
    and the conjunction of the per-coordinate predicates.

    Tuples are ordered with the first coordinate most significant, matching
    ``itertools.product``.
    """
    if n < 1:
        raise InvalidSizeParameter(f"repetition count must be positive, got {n}")
    if n == 1:
        return g
    check_cells([s**n for s in g.shape], budget)

    dist = g.distribution
    acc = g.accepts
    for _ in range(n - 1):
        dist = np.multiply.outer(dist, g.distribution)  # (X', Y', X, Y)
        dist = dist.transpose(0, 2, 1, 3).reshape(dist.shape[0] * dist.shape[2], dist.shape[1] * dist.shape[3])
        p = np.logical_and.outer(acc, g.accepts)  # (X',Y',A',B',X,Y,A,B)
        p = p.transpose(0, 4, 1, 5, 2, 6, 3, 7)
        s = p.shape
        acc = p.reshape(s[0] * s[1], s[2] * s[3], s[4] * s[5], s[6] * s[7])

    def prod_labels(labels: tuple) -> tuple:
        return tuple(itertools.product(labels, repeat=n))

    name = f"{g.name}^{n}" if g.name else ""
    return Game(
        prod_labels(g.questions_a),
        prod_labels(g.questions_b),
        prod_labels(g.answers_a),
        prod_labels(g.answers_b),
        dist,
        acc.astype(np.int8),
        name,
    )


# --------------------------------------------------------------------------
# built-in games


def _bits(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def _bitstring(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width else ""


def chsh() -> Game:
    return make_game(
        (0, 1), (0, 1), (0, 1), (0, 1),
        [[Fraction(1, 4)] * 2] * 2,
        lambda x, y, a, b: (a ^ b) == (x & y),
        name="chsh",
    )


def magic_square() -> Game:
    """Rows x in {1,2,3} for Alice, columns y in {1,2,3} for Bob.

    Answers are bit-triples; answer index ``i`` is the triple ``_bits(i, 3)``,
    whose first bit is the entry in the first column (for Alice) or first row
    (for Bob).  Alice's row must have even parity, Bob's column odd parity, and
    they must agree on the shared cell.
    """
    triples = [_bits(i, 3) for i in range(8)]

    def wins(x: int, y: int, a: int, b: int) -> bool:
        row, col = triples[a], triples[b]
        return sum(row) % 2 == 0 and sum(col) % 2 == 1 and row[y] == col[x]

    return make_game(
        (1, 2, 3), (1, 2, 3),
        tuple(_bitstring(i, 3) for i in range(8)), tuple(_bitstring(i, 3) for i in range(8)),
        [[Fraction(1, 9)] * 3] * 3,
        wins,
        name="magic-square",
    )


def _log2_size(n: int | None, game: str) -> int:
    if n is None:
        raise InvalidSizeParameter(f"{game} needs a size parameter n")
    if n < 2 or n & (n - 1):
        raise InvalidSizeParameter(f"{game} needs n a power of two >= 2, got {n}")
    return n.bit_length() - 1


def nonlocal_dj(n: int | None) -> Game:
    """Inputs x, y in {0,1}^n promised equal or at Hamming distance n/2;
    outputs in {0,1}^(log n) must be equal in the first case, different in the second.

    String ``x`` is the integer whose binary digits are ``x_1 ... x_n`` (x_1 most
    significant).  Non-promise inputs get probability 0 and an all-accept predicate.
    """
    m = _log2_size(n, "nonlocal-dj")
    size = 2**n
    promise = [
        (x, y) for x in range(size) for y in range(size) if x == y or bin(x ^ y).count("1") == n // 2
    ]
    p = Fraction(1, len(promise))
    dist = {xy: p for xy in promise}
    kinds = np.zeros((size, size), dtype=np.int8)  # 0 outside promise, 1 equal, 2 far
    for x, y in promise:
        kinds[x, y] = 1 if x == y else 2

    def wins(x: int, y: int, a: int, b: int) -> bool:
        k = kinds[x, y]
        return k == 0 or (k == 1) == (a == b)

    labels_q = tuple(_bitstring(v, n) for v in range(size))
    labels_a = tuple(_bitstring(v, m) for v in range(2**m))
    return make_game(labels_q, labels_q, labels_a, labels_a, dist, wins, name=f"nonlocal-dj-{n}")


def perfect_matchings(n: int) -> list[tuple[tuple[int, int], ...]]:
    """All perfect matchings of ``range(n)``, each a sorted tuple of sorted pairs."""

    def rec(rest: tuple[int, ...]) -> list[tuple[tuple[int, int], ...]]:
        if not rest:
            return [()]
        first, others = rest[0], rest[1:]
        out = []
        for k, partner in enumerate(others):
            remaining = others[:k] + others[k + 1:]
            out.extend(((first, partner),) + tail for tail in rec(remaining))
        return out

    return rec(tuple(range(n)))


def dot2(u: int, v: int) -> int:
    """Inner product mod 2 of two bit strings stored as integers."""
    return bin(u & v).count("1") & 1


def hidden_matching(n: int | None) -> Game:
    """Alice gets x in {0,1}^n, Bob a perfect matching M of [n] (0-based).

    Alice answers k in {0,1}^m, Bob answers a pair (i, j) with i < j and l in
    {0,1}^m; Bob's answer index is ``pair_index * n + l`` where pairs are
    enumerated by ``itertools.combinations(range(n), 2)``.  They win iff
    (i, j) is in M and (i xor j).(k xor l) = x_i xor x_j, with element indices
    read as m-bit strings.  ``x_i`` is the i-th character of x's bitstring.
    """
    m = _log2_size(n, "hidden-matching")
    matchings = perfect_matchings(n)
    pairs = list(itertools.combinations(range(n), 2))
    size = 2**n
    in_matching = np.zeros((len(matchings), len(pairs)), dtype=bool)
    for yi, mt in enumerate(matchings):
        for pr in mt:
            in_matching[yi, pairs.index(pr)] = True
    xbits = [_bits(x, n) for x in range(size)]

    def wins(x: int, y: int, k: int, b: int) -> bool:
        pi, l = divmod(b, n)
        if not in_matching[y, pi]:
            return False
        i, j = pairs[pi]
        return dot2(i ^ j, k ^ l) == (xbits[x][i] ^ xbits[x][j])

    p = Fraction(1, size * len(matchings))
    return make_game(
        tuple(_bitstring(v, n) for v in range(size)),
        tuple("|".join(f"{i}{j}" for i, j in mt) for mt in matchings),
        tuple(_bitstring(v, m) for v in range(n)),
        tuple(f"{i}{j}:{_bitstring(l, m)}" for i, j in pairs for l in range(n)),
        [[p] * len(matchings)] * size,
        wins,
        name=f"hidden-matching-{n}",
    )


def builtin(name: str, size: int | None = None) -> Game:
    if name == "magic-square":
        return magic_square()
    if name == "chsh":
        return chsh()
    if name == "nonlocal-dj":
        return nonlocal_dj(size)
    if name == "hidden-matching":
        return hidden_matching(size)
    raise UnknownGame(f"unknown game {name!r}; expected one of {', '.join(BUILTIN_GAMES)}")


# --------------------------------------------------------------------------
# JSON format


def _jsonable_label(label: Any) -> Any:
    if isinstance(label, tuple):
        return [_jsonable_label(v) for v in label]
    return label


def _label_from_json(label: Any) -> Any:
    if isinstance(label, list):
        return tuple(_label_from_json(v) for v in label)
    return label


def game_to_dict(g: Game) -> dict:
    out: dict[str, Any] = {}
    if g.name:
        out["name"] = g.name
    for key in ("questions_a", "questions_b", "answers_a", "answers_b"):
        out[key] = [_jsonable_label(v) for v in getattr(g, key)]
    out["distribution"] = [
        [x, y, p.numerator, p.denominator] for (x, y), p in np.ndenumerate(g.distribution) if p != 0
    ]
    out["predicate"] = [[int(i) for i in cell] for cell in np.argwhere(g.predicate == 1)]
    return out


def game_from_dict(data: Mapping) -> Game:
    try:
        labels = [[_label_from_json(v) for v in data[k]] for k in ("questions_a", "questions_b", "answers_a", "answers_b")]
        dist = {}
        for x, y, num, den in data.get("distribution", []):
            dist[(int(x), int(y))] = dist.get((int(x), int(y)), Fraction(0)) + Fraction(int(num), int(den))
        accepted = frozenset(tuple(int(i) for i in q) for q in data.get("predicate", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed game file: {exc}") from exc
    return make_game(*labels, dist, accepted, name=str(data.get("name", "")))


def dumps_game(g: Game) -> str:
    return json.dumps(game_to_dict(g), separators=(",", ":"))


def loads_game(text: str) -> Game:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"game file is not valid JSON: {exc}") from exc
    return game_from_dict(data)


def save_game(g: Game, path: str | Path) -> None:
    Path(path).write_text(dumps_game(g) + "\n")


def load_game(path: str | Path) -> Game:
    return loads_game(Path(path).read_text())


def lcm_denominator(g: Game) -> int:
    return reduce(math.lcm, (p.denominator for p in g.distribution.flat), 1)


# modules/suspension_lab/transfer.py

import random
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from core.exceptions import SuspensionError
from core.logger import get_surgery_logger
from modules.exact_core import ExactMatrix, RingKind, RingSpec
from modules.exact_core.rings import GroupElement
from .banded import BandedMatrix, SuspensionElement
from .objects import GradedObject

logger = get_surgery_logger("surgerykit.suspension_lab", "SUSPENSION")

Letter = Tuple[str, int]
Word = Tuple[Letter, ...]
WordCombination = Sequence[Tuple[int, Word]]

_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?$")


def parse_word(text: str) -> Word:
    """'x y x^-1 t^2' -> ((x, 1), (y, 1), (x, -1), (t, 1), (t, 1)); '1' or '' is the empty word."""
    letters: List[Letter] = []
    for token in text.replace("*", " ").split():
        if token in ("1", "e"):
            continue
        m = _TOKEN.match(token)
        if not m:
            raise SuspensionError(f"cannot read word token {token!r}")
        power = int(m.group(2)) if m.group(2) else 1
        letters.extend([(m.group(1), 1 if power > 0 else -1)] * abs(power))
    return reduce_word(letters)


def reduce_word(letters: Sequence[Letter]) -> Word:
    out: List[Letter] = []
    for name, e in letters:
        if out and out[-1] == (name, -e):
            out.pop()
        else:
            out.append((name, e))
    return tuple(out)


def format_word(word: Word) -> str:
    return " ".join(name if e == 1 else f"{name}^-1" for name, e in word) or "1"


def inverse_word(word: Word) -> Word:
    return tuple((name, -e) for name, e in reversed(word))


def fold(k: int) -> int:
    """ℤ → ℕ zigzag: 0, 1, −1, 2, −2, … ↦ 0, 1, 2, 3, 4, …"""
    return 2 * k - 1 if k > 0 else -2 * k


def unfold(i: int) -> int:
    return (i + 1) // 2 if i % 2 else -(i // 2)


@dataclass(frozen=True)
class CosetMove:
    """
    Left action of one generator x of G on G/H: x·g_k = g_{k′}·h with h ∈ H.
    `window` lists k ↦ (k′, h) for |k| ≤ reach (or for every coset of a
    finite coset space); beyond the reach x translates by `shift` with the
    constant cocycles `upper` (k > reach) and `lower` (k < −reach).
    """
    window: Dict[int, Tuple[int, Word]]
    reach: int = 0
    shift: int = 0
    upper: Word = ()
    lower: Word = ()

    def to_dict(self) -> Dict[str, Any]:
        return {"window": {k: [v, format_word(h)] for k, (v, h) in sorted(self.window.items())},
                "reach": self.reach, "shift": self.shift,
                "upper": format_word(self.upper), "lower": format_word(self.lower)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CosetMove":
        window = {int(k): (int(v[0]), parse_word(str(v[1]))) for k, v in (data.get("window") or {}).items()}
        return cls(window, int(data.get("reach", 0)), int(data.get("shift", 0)),
                   parse_word(str(data.get("upper", ""))), parse_word(str(data.get("lower", ""))))


@dataclass(frozen=True, eq=False)
class TransferData:
    """
    Group data for ρ: ℤΓ → ΣℤΠ. G is given by generators and relators, H by
    generators with images r_Π(h) in Π, the coset space G/H by one CosetMove
    per generator of G (ℤ-indexed, or finite with `finite_cosets` elements)
    and e_*(t) as a word in G.
    """
    generators: Tuple[str, ...]
    moves: Dict[str, CosetMove]
    pi_ring: RingSpec = field(default_factory=RingSpec.integers)
    h_images: Dict[str, GroupElement] = field(default_factory=dict)
    relators: Tuple[Word, ...] = ()
    e_t: Word = ()
    finite_cosets: Optional[int] = None

    def __post_init__(self):
        missing = [g for g in self.generators if g not in self.moves]
        if missing:
            raise SuspensionError(f"no coset move for generators {missing}")
        for w in self.relators + (self.e_t,):
            unknown = {name for name, _ in w if name not in self.generators}
            if unknown:
                raise SuspensionError(f"word {format_word(w)} uses unknown generators {sorted(unknown)}")
        for g, move in self.moves.items():
            for h in [h for _, h in move.window.values()] + [move.upper, move.lower]:
                unknown = {name for name, _ in h if name not in self.h_images}
                if unknown:
                    raise SuspensionError(f"cocycle of {g} uses unknown H generators {sorted(unknown)}")
        if self.pi_ring.kind is RingKind.LAURENT:
            bad = [h for h, img in self.h_images.items() if len(tuple(img)) != self.pi_ring.rank]
            if bad:
                raise SuspensionError(f"r_Π images of {bad} are not exponent vectors of length {self.pi_ring.rank}")

    @property
    def is_finite(self) -> bool:
        return self.finite_cosets is not None

    def to_dict(self) -> Dict[str, Any]:
        out = {"generators": list(self.generators),
               "moves": {g: self.moves[g].to_dict() for g in self.generators},
               "h_images": {h: list(v) if isinstance(v, tuple) else v for h, v in self.h_images.items()},
               "relators": [format_word(w) for w in self.relators],
               "e_t": format_word(self.e_t)}
        if self.finite_cosets is not None:
            out["finite_cosets"] = self.finite_cosets
        return out


# Π-valued cocycles

def _pi_identity(ring: RingSpec) -> GroupElement:
    return () if ring.is_integers else ring.group_identity()


def _pi_mul(ring: RingSpec, a: GroupElement, b: GroupElement) -> GroupElement:
    return () if ring.is_integers else ring.group_mul(a, b)


def _pi_inv(ring: RingSpec, a: GroupElement) -> GroupElement:
    return () if ring.is_integers else ring.group_inv(a)


def r_pi(data: TransferData, word: Word) -> GroupElement:
    """r_Π on an H-word."""
    ring = data.pi_ring
    out = _pi_identity(ring)
    for name, e in word:
        g = data.h_images[name]
        g = tuple(g) if isinstance(g, list) else g
        out = _pi_mul(ring, out, g if e > 0 else _pi_inv(ring, g))
    return out


def _scalar(ring: RingSpec, g: GroupElement) -> ExactMatrix:
    return ExactMatrix.from_rows(ring, [[ring.one() if ring.is_integers else ring.group_element(g)]])


@dataclass(frozen=True)
class _Action:
    """A generator or its inverse acting on cosets with Π-valued cocycle."""
    window: Dict[int, Tuple[int, GroupElement]]
    reach: int
    shift: int
    upper: GroupElement
    lower: GroupElement

    def image(self, k: int) -> Tuple[int, GroupElement]:
        if k in self.window:
            return self.window[k]
        if k > self.reach:
            return k + self.shift, self.upper
        if k < -self.reach:
            return k + self.shift, self.lower
        raise SuspensionError(f"coset {k} is missing from the window of a coset move")


def _resolve(data: TransferData, name: str, e: int) -> _Action:
    move = data.moves[name]
    ring = data.pi_ring
    act = _Action({k: (v, r_pi(data, h)) for k, (v, h) in move.window.items()}, move.reach, move.shift,
                  r_pi(data, move.upper), r_pi(data, move.lower))
    if data.is_finite:
        images = sorted(v for v, _ in act.window.values())
        if sorted(act.window) != list(range(data.finite_cosets)) or images != list(range(data.finite_cosets)):
            raise SuspensionError(f"move of {name} is not a permutation of the {data.finite_cosets} cosets")
        if e > 0:
            return act
        return _Action({v: (k, _pi_inv(ring, g)) for k, (v, g) in act.window.items()}, 0, 0,
                       _pi_identity(ring), _pi_identity(ring))
    span = move.reach + 2 * abs(move.shift) + 1
    seen: Dict[int, Tuple[int, GroupElement]] = {}
    for k in range(-span, span + 1):
        v, g = act.image(k)
        if v in seen:
            raise SuspensionError(f"move of {name} sends cosets {seen[v][0]} and {k} to {v}")
        seen[v] = (k, g)
    inner = move.reach + abs(move.shift)
    if any(v not in seen for v in range(-inner, inner + 1)):
        raise SuspensionError(f"move of {name} is not onto near coset 0")
    if e > 0:
        return act
    return _Action({v: (k, _pi_inv(ring, g)) for v, (k, g) in seen.items() if abs(v) <= inner}, inner, -move.shift,
                   _pi_inv(ring, act.upper), _pi_inv(ring, act.lower))


def _letter_matrix(data: TransferData, act: _Action) -> BandedMatrix:
    """
    ρ_G(x)[fold(x·k), fold(k)] = r_Π(h_x(k)). Past the head the even indices
    (k ≤ 0) and the odd ones (k > 0) each move by a fixed step, giving a
    period-(2, 2) band.
    """
    ring = data.pi_ring
    one = GradedObject.constant(1)
    d = act.shift
    N = 2 * (act.reach + abs(d) + 1)
    exc = {}
    for k in range(-(N // 2 + abs(d) + 2), N // 2 + abs(d) + 3):
        v, g = act.image(k)
        i, j = fold(v), fold(k)
        if i < N or j < N:
            exc[(i, j)] = _scalar(ring, g)
    tail = ({2 * d: _scalar(ring, act.lower)}, {1 - 2 * d: _scalar(ring, act.upper)})
    return BandedMatrix(ring, one, one, N, N, (2, 2), exc, tail)


def _finite_matrix(data: TransferData, word: Word) -> ExactMatrix:
    ring, m = data.pi_ring, data.finite_cosets
    out = ExactMatrix.identity(ring, m)
    for name, e in word:
        act = _resolve(data, name, e)
        rows = [[ring.zero()] * m for _ in range(m)]
        for k, (v, g) in act.window.items():
            rows[v][k] = ring.one() if ring.is_integers else ring.group_element(g)
        out = out @ ExactMatrix.from_rows(ring, rows)
    return out


def transfer_matrix(data: TransferData, word: Word) -> BandedMatrix:
    """ρ_G(w) ∈ M_∞(ℤΠ) for a word w in the generators of G (ℤ-indexed coset spaces)."""
    if data.is_finite:
        raise SuspensionError("a finite coset space has no infinite matrix; ρ vanishes there")
    ring = data.pi_ring
    out = BandedMatrix.identity(ring, GradedObject.constant(1))
    for name, e in word:
        out = out @ _letter_matrix(data, _resolve(data, name, e))
    return out


def verify_transfer_data(data: TransferData) -> Dict[str, Any]:
    """Relators act trivially (exactly) and e_*(t) acts as the identity class."""
    failures = []
    for w in data.relators:
        if data.is_finite:
            ok = _finite_matrix(data, w) == ExactMatrix.identity(data.pi_ring, data.finite_cosets)
        else:
            ok = transfer_matrix(data, w) == BandedMatrix.identity(data.pi_ring, GradedObject.constant(1))
        if not ok:
            failures.append({"kind": "relator", "word": format_word(w)})
    if not data.is_finite:
        e_t = SuspensionElement(transfer_matrix(data, data.e_t))
        if e_t != SuspensionElement.identity(data.pi_ring, GradedObject.constant(1)):
            failures.append({"kind": "e_t", "word": format_word(data.e_t)})
    for fail in failures:
        logger.warning(f"transfer data inconsistent: {fail['kind']} {fail['word']}")
    return {"valid": not failures, "failures": failures}


def transfer_rho(data: TransferData, x: WordCombination, check: bool = True) -> SuspensionElement:
    """
    ρ(Σ n_i w_i) = Σ n_i [ρ_G(w_i)] in ΣℤΠ; the zero map when G/H is finite.
    """
    if check:
        report = verify_transfer_data(data)
        if not report["valid"]:
            raise SuspensionError(f"cocycle inconsistency: {report['failures']}")
    one = GradedObject.constant(1)
    out = SuspensionElement.zero(data.pi_ring, one, one)
    if data.is_finite:
        return out
    for n, w in x:
        out = out + SuspensionElement(transfer_matrix(data, w).scale(n))
    return out


def check_transfer_homomorphism(data: TransferData, pairs: Sequence[Tuple[Word, Word]]) -> Dict[str, Any]:
    """ρ(uv) = ρ(u)ρ(v) on classes, and exactly on ρ_G for infinite coset spaces."""
    failures = []
    verdict = verify_transfer_data(data)
    if not verdict["valid"]:
        return verdict
    for u, v in pairs:
        lhs = transfer_rho(data, [(1, u + v)], check=False)
        rhs = transfer_rho(data, [(1, u)], check=False) @ transfer_rho(data, [(1, v)], check=False)
        exact = data.is_finite or transfer_matrix(data, u + v) == transfer_matrix(data, u) @ transfer_matrix(data, v)
        if lhs != rhs or not exact:
            failures.append({"u": format_word(u), "v": format_word(v)})
            logger.warning(f"ρ(uv) ≠ ρ(u)ρ(v) for u = {format_word(u)}, v = {format_word(v)}")
    logger.debug(f"transfer homomorphism on {len(pairs)} pairs: {len(failures)} failures")
    return {"valid": not failures, "failures": failures}


def transfer_data_from_dict(data: Dict[str, Any], pi_ring: RingSpec) -> TransferData:
    images = {h: tuple(v) if isinstance(v, list) else v for h, v in (data.get("h_images") or {}).items()}
    return TransferData(tuple(data["generators"]),
                        {g: CosetMove.from_dict(m) for g, m in data["moves"].items()},
                        pi_ring, images,
                        tuple(parse_word(str(w)) for w in data.get("relators", ())),
                        parse_word(str(data.get("e_t", ""))),
                        data.get("finite_cosets"))


# toy data

def integer_line_datum() -> TransferData:
    """G = ℤ = ⟨x⟩, H = {e}, Π trivial: x translates the cosets ℤ by one."""
    return TransferData(("x",), {"x": CosetMove({0: (1, ())}, reach=0, shift=1)})


def plane_datum() -> TransferData:
    """G = ℤ² = ⟨x, y⟩, H = ⟨y⟩ → Π = ℤ = ⟨t⟩ with r_Π(y) = t."""
    y = (("y", 1),)
    return TransferData(("x", "y"),
                        {"x": CosetMove({0: (1, ())}, reach=0, shift=1),
                         "y": CosetMove({0: (0, y)}, reach=0, shift=0, upper=y, lower=y)},
                        RingSpec.laurent(1), {"y": (1,)},
                        (parse_word("x y x^-1 y^-1"),))


def cyclic_datum(order: int = 3) -> TransferData:
    """G = ℤ/order, H = {e}: a finite coset space."""
    return TransferData(("x",), {"x": CosetMove({k: ((k + 1) % order, ()) for k in range(order)})},
                        relators=(parse_word(f"x^{order}"),), finite_cosets=order)


def random_word(rng: random.Random, generators: Sequence[str], max_length: int = 4) -> Word:
    return reduce_word([(rng.choice(list(generators)), rng.choice((1, -1)))
                        for _ in range(rng.randint(0, max_length))])


def random_word_pairs(rng: random.Random, data: TransferData, count: int,
                      max_length: int = 4) -> List[Tuple[Word, Word]]:
    return [(random_word(rng, data.generators, max_length), random_word(rng, data.generators, max_length))
            for _ in range(count)]

# modules/cli/scenario.py
"""
Line-oriented scenario documents.

    # comment
    ring R cyclic 3
    complex S3 boundary 4          # also: cycle N, path N
    complex M facets               # one simplex per line
      0 1 2
      ...
    end
    form E8 degree 0               # rows of an integer matrix
      2 -1 0 ...
    end
    chain C integers               # an integer chain complex
      rank 0 1
      d 1 : 1 0 ; 0 1              # rows separated by ';'
    end
    quadratic Q on C dim 1
      psi 0 0 : 1
    end
    transfer T line                # also: plane, cyclic N
    cover X trivial S3             # also: cyclic N M, split S3 M
    kbased D on S3 covariant       # generators over simplices of S3
      gen a 0 : 0 1                # gen KEY DEGREE : vertices
      gen b 1 : 0
      d a b 1                      # d ROW COL VALUE
    end
    decomposition P product L      # staircase L × [0,1]
    command homology S3 betti=1,0,0,1

Integers are the only literals; a command target is the first argument
without '='.
"""

import os
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from core.config import ROOT, settings
from core.exceptions import ScenarioError, SurgeryKitError
from core.logger import get_surgery_logger
from modules.chain_algebra import ChainComplex, verify_complex
from modules.exact_core import ExactMatrix, RingSpec
from modules.k_based import Generator, KBasedComplex, KeyedMatrix, Variance
from modules.simplicial_geometry import (OrderedComplex, cyclic_cycle_cover, product_interval, split_cover,
                                         trivial_cover)
from modules.structured_forms import QuadraticComplex, form_complex
from modules.suspension_lab import cyclic_datum, integer_line_datum, plane_datum

logger = get_surgery_logger("surgerykit.cli", "CLI")

_TOKEN = re.compile(r"[:;]|[^\s:;]+")

Token = Tuple[str, int]

DEFINITION_KINDS = ("ring", "complex", "form", "chain", "quadratic", "transfer", "cover", "kbased",
                    "decomposition")

# command kind -> (accepted target kinds, target required, accepted parameters)
COMMANDS: Dict[str, Tuple[Tuple[str, ...], bool, Tuple[str, ...]]] = {
    "homology": (("complex", "chain", "kbased"), True, ("betti",)),
    "signature": (("complex", "form"), True, ("expect", "expect_abs", "reverse")),
    "dual_incidence": (("complex",), False, ("max_l",)),
    "verify_complex": (("complex", "chain", "kbased"), True, ()),
    "verify_quadratic": (("quadratic", "form"), True, ()),
    "poincare": (("quadratic", "form"), True, ("expect",)),
    "thickening": (("quadratic", "form"), False, ("count", "seed")),
    "sign_manifest": ((), False, ()),
    "duality_axioms": (("complex", "kbased"), False, ("count", "seed")),
    "partition": (("decomposition",), True, ()),
    "assembly": (("cover",), True, ("count", "seed")),
    "suspension_laws": (("ring",), False, ("count", "seed")),
    "flasque": (("ring",), False, ("count", "seed")),
    "lift": (("ring",), False, ("count", "seed")),
    "domination": (("ring",), False, ("count", "seed")),
    "transfer_laws": (("transfer",), True, ("count", "seed")),
    "local_dual": (("complex",), False, ("count", "seed")),
    "product_pairs": (("decomposition",), True, ("count", "seed")),
    "restrict_to_l": (("decomposition",), True, ("count", "seed")),
    "cylinder": (("decomposition",), True, ("count", "seed")),
    "cover_pair": (("decomposition", "cover"), True, ("count", "seed", "sheets")),
    "partial_assembly": (("cover",), True, ("count", "seed")),
    "infinite_transfer": (("cover",), True, ("count", "seed")),
    "dual_exchange": (("complex",), False, ("count", "seed")),
}

INTEGER_PARAMS = ("count", "seed", "max_l", "expect_abs", "sheets")


@dataclass
class Definition:
    """A named object: header arguments plus the token rows of its block."""
    kind: str
    name: str
    args: Tuple[str, ...] = ()
    body: Tuple[Tuple[str, ...], ...] = ()
    line: int = field(default=0, compare=False)
    body_lines: Tuple[int, ...] = field(default=(), compare=False, repr=False)

    @property
    def is_block(self) -> bool:
        if self.kind == "complex":
            return self.args[:1] == ("facets",)
        return self.kind in ("form", "chain", "quadratic", "kbased")


@dataclass
class Command:
    kind: str
    target: Optional[str] = None
    params: Dict[str, str] = field(default_factory=dict)
    line: int = field(default=0, compare=False)
    target_column: int = field(default=0, compare=False, repr=False)

    def int_param(self, key: str, default: Optional[int] = None) -> Optional[int]:
        return int(self.params[key]) if key in self.params else default

    def flag(self, key: str, default: bool = False) -> bool:
        if key not in self.params:
            return default
        return self.params[key] in ("yes", "true", "1")


@dataclass
class ScenarioDoc:
    definitions: Dict[str, Definition] = field(default_factory=dict)
    commands: List[Command] = field(default_factory=list)
    objects: Dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def kind_of(self, name: str) -> str:
        return self.definitions[name].kind

    def is_empty(self) -> bool:
        return not self.definitions and not self.commands


def _tokens(line: str) -> List[Token]:
    text = line.split("#", 1)[0]
    return [(m.group(), m.start() + 1) for m in _TOKEN.finditer(text)]


def _int(token: Token, line: int) -> int:
    text, col = token
    try:
        return int(text)
    except ValueError:
        raise ScenarioError(f"expected an integer, got '{text}'", line, col) from None


def _matrix(tokens: List[Token], line: int) -> List[List[int]]:
    rows: List[List[int]] = [[]]
    for tok in tokens:
        if tok[0] == ";":
            rows.append([])
        else:
            rows[-1].append(_int(tok, line))
    if any(len(r) != len(rows[0]) for r in rows):
        raise ScenarioError("rows of a matrix literal must have equal length", line, tokens[0][1])
    return [] if rows == [[]] else rows


# syntax

def _parse_command(tokens: List[Token], line: int) -> Command:
    if len(tokens) < 2:
        raise ScenarioError("command needs a kind", line, tokens[0][1])
    kind, kind_col = tokens[1]
    if kind not in COMMANDS:
        raise ScenarioError(f"unknown command '{kind}'", line, kind_col)
    cmd = Command(kind, line=line)
    for text, col in tokens[2:]:
        if "=" in text:
            key, value = text.split("=", 1)
            if key not in COMMANDS[kind][2]:
                raise ScenarioError(f"command '{kind}' takes no parameter '{key}'", line, col)
            if key in INTEGER_PARAMS or (key == "expect" and kind == "signature"):
                _int((value, col + len(key) + 1), line)
            elif key == "betti":
                for piece in value.split(","):
                    _int((piece, col + len(key) + 1), line)
            cmd.params[key] = value
        elif cmd.target is None and not cmd.params:
            cmd.target, cmd.target_column = text, col
        else:
            raise ScenarioError(f"unexpected argument '{text}'", line, col)
    return cmd


def parse_scenario(text: str) -> ScenarioDoc:
    """Parse and load a scenario; every diagnostic carries a line and column."""
    doc = ScenarioDoc()
    lines: Dict[int, List[Token]] = {}
    open_block: Optional[Tuple[Definition, List[Tuple[str, ...]], List[int]]] = None
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokens(raw)
        if not tokens:
            continue
        lines[number] = tokens
        head, col = tokens[0]
        if open_block is not None:
            defn, rows, at = open_block
            if head == "end" and len(tokens) == 1:
                defn.body, defn.body_lines = tuple(rows), tuple(at)
                open_block = None
            else:
                rows.append(tuple(t for t, _ in tokens))
                at.append(number)
            continue
        if head == "command":
            doc.commands.append(_parse_command(tokens, number))
            continue
        if head not in DEFINITION_KINDS:
            raise ScenarioError(f"unknown keyword '{head}'", number, col)
        if len(tokens) < 3:
            raise ScenarioError(f"'{head}' needs a name and a description", number, col)
        name, name_col = tokens[1]
        if name in doc.definitions:
            raise ScenarioError(f"'{name}' is already defined on line {doc.definitions[name].line}",
                                number, name_col)
        defn = Definition(head, name, tuple(t for t, _ in tokens[2:]), (), number)
        doc.definitions[name] = defn
        if defn.is_block:
            open_block = (defn, [], [])
    if open_block is not None:
        defn = open_block[0]
        raise ScenarioError(f"block '{defn.name}' is never closed with 'end'", defn.line, 1)

    for cmd in doc.commands:
        _check_target(doc, cmd)
    doc.objects = _Loader(doc, lines).load()
    logger.debug(f"parsed scenario: {len(doc.definitions)} definitions, {len(doc.commands)} commands")
    return doc


def _check_target(doc: ScenarioDoc, cmd: Command):
    kinds, required, _ = COMMANDS[cmd.kind]
    if cmd.target is None:
        if required:
            raise ScenarioError(f"command '{cmd.kind}' needs a target ({' or '.join(kinds)})", cmd.line, 1)
        return
    if cmd.target not in doc.definitions:
        raise ScenarioError(f"undefined identifier '{cmd.target}'", cmd.line, cmd.target_column)
    if not kinds:
        raise ScenarioError(f"command '{cmd.kind}' takes no target", cmd.line, cmd.target_column)
    found = doc.kind_of(cmd.target)
    if found not in kinds:
        raise ScenarioError(f"'{cmd.target}' is a {found}; '{cmd.kind}' needs a {' or '.join(kinds)}",
                            cmd.line, cmd.target_column)


# loading

class _Loader:
    """Builds the objects in definition order; later definitions may refer to earlier ones."""

    def __init__(self, doc: ScenarioDoc, lines: Dict[int, List[Token]]):
        self.doc = doc
        self.lines = lines
        self.objects: Dict[str, Any] = {}

    def load(self) -> Dict[str, Any]:
        builders: Dict[str, Callable[[Definition, List[Token]], Any]] = {
            "ring": self._ring, "complex": self._complex, "form": self._form, "chain": self._chain,
            "quadratic": self._quadratic, "transfer": self._transfer, "cover": self._cover,
            "kbased": self._kbased, "decomposition": self._decomposition,
        }
        for name, defn in self.doc.definitions.items():
            args = self.lines[defn.line][2:]
            try:
                self.objects[name] = builders[defn.kind](defn, args)
            except ScenarioError:
                raise
            except (SurgeryKitError, ValueError) as e:
                raise ScenarioError(f"'{name}' does not load: {e}", defn.line, args[0][1]) from e
        return self.objects

    def _unreadable(self, defn: Definition, args: List[Token]) -> ScenarioError:
        return ScenarioError(f"cannot read {defn.kind} description '{' '.join(defn.args)}'", defn.line, args[0][1])

    def _rows(self, defn: Definition):
        """(line, tokens) of each body row."""
        return [(n, self.lines[n]) for n in defn.body_lines]

    def _reference(self, defn: Definition, token: Token, kinds: Tuple[str, ...]) -> Any:
        name, col = token
        if name not in self.objects:
            raise ScenarioError(f"undefined identifier '{name}'", defn.line, col)
        if self.doc.kind_of(name) not in kinds:
            raise ScenarioError(f"'{name}' is a {self.doc.kind_of(name)}, expected a {' or '.join(kinds)}",
                                defn.line, col)
        return self.objects[name]

    def _ring(self, defn: Definition, args: List[Token]) -> RingSpec:
        what = args[0][0]
        if what == "integers" and len(args) == 1:
            return RingSpec.integers()
        if what in ("cyclic", "laurent") and len(args) == 2:
            n = _int(args[1], defn.line)
            return RingSpec.cyclic(n) if what == "cyclic" else RingSpec.laurent(n)
        raise self._unreadable(defn, args)

    def _complex(self, defn: Definition, args: List[Token]) -> OrderedComplex:
        what = args[0][0]
        if what in ("boundary", "cycle", "path") and len(args) == 2:
            n = _int(args[1], defn.line)
            return {"boundary": OrderedComplex.simplex_boundary, "cycle": OrderedComplex.cycle,
                    "path": OrderedComplex.path}[what](n)
        if what == "facets" and len(args) == 1:
            return OrderedComplex.from_facets([[_int(t, n) for t in row] for n, row in self._rows(defn)])
        raise self._unreadable(defn, args)

    def _form(self, defn: Definition, args: List[Token]) -> QuadraticComplex:
        if len(args) != 2 or args[0][0] != "degree":
            raise self._unreadable(defn, args)
        degree = _int(args[1], defn.line)
        matrix = [[_int(t, n) for t in row] for n, row in self._rows(defn)]
        for n, row in self._rows(defn):
            if len(row) != len(matrix):
                raise ScenarioError(f"form '{defn.name}' is not a square matrix", n, row[0][1])
        return form_complex(matrix, degree)

    def _block_matrix(self, tokens: List[Token], line: int, shape: Tuple[int, int], what: str) -> ExactMatrix:
        rows = _matrix(tokens, line)
        if (len(rows), len(rows[0]) if rows else shape[1]) != shape:
            raise ScenarioError(f"{what} must be a {shape[0]} x {shape[1]} matrix", line, tokens[0][1])
        return ExactMatrix.from_rows(RingSpec.integers(), rows, cols=shape[1])

    def _chain(self, defn: Definition, args: List[Token]) -> ChainComplex:
        if args[0][0] != "integers" or len(args) != 1:
            raise self._unreadable(defn, args)
        ranks: Dict[int, int] = {}
        pending = []
        for n, row in self._rows(defn):
            words = [t for t, _ in row]
            if words[0] == "rank" and len(row) == 3:
                ranks[_int(row[1], n)] = _int(row[2], n)
            elif words[0] == "d" and len(row) >= 4 and words[2] == ":":
                pending.append((_int(row[1], n), row[3:], n))
            else:
                raise ScenarioError(f"expected 'rank R N' or 'd R : rows', got '{' '.join(words)}'", n, row[0][1])
        diffs = {r: self._block_matrix(tokens, n, (ranks.get(r - 1, 0), ranks.get(r, 0)), f"d_{r}")
                 for r, tokens, n in pending}
        C = ChainComplex.from_data(RingSpec.integers(), ranks, diffs)
        if not verify_complex(C)["valid"]:
            raise ScenarioError(f"chain complex '{defn.name}' fails d∘d = 0", defn.line, args[0][1])
        return C

    def _quadratic(self, defn: Definition, args: List[Token]) -> QuadraticComplex:
        if len(args) != 4 or args[0][0] != "on" or args[2][0] != "dim":
            raise self._unreadable(defn, args)
        C = self._reference(defn, args[1], ("chain",))
        dim = _int(args[3], defn.line)
        psi = {}
        for n, row in self._rows(defn):
            words = [t for t, _ in row]
            if words[0] != "psi" or len(row) < 5 or words[3] != ":":
                raise ScenarioError(f"expected 'psi S P : rows', got '{' '.join(words)}'", n, row[0][1])
            s, p = _int(row[1], n), _int(row[2], n)
            psi[(s, p)] = self._block_matrix(row[4:], n, (C.rank(dim - s - p), C.rank(p)), f"psi_{s}[{p}]")
        return QuadraticComplex(C, dim, psi)

    def _transfer(self, defn: Definition, args: List[Token]):
        what = args[0][0]
        if what == "line" and len(args) == 1:
            return integer_line_datum()
        if what == "plane" and len(args) == 1:
            return plane_datum()
        if what == "cyclic" and len(args) == 2:
            return cyclic_datum(_int(args[1], defn.line))
        raise self._unreadable(defn, args)

    def _cover(self, defn: Definition, args: List[Token]):
        what = args[0][0]
        if what == "trivial" and len(args) == 2:
            return trivial_cover(self._reference(defn, args[1], ("complex",)))
        if what == "cyclic" and len(args) == 3:
            return cyclic_cycle_cover(_int(args[1], defn.line), _int(args[2], defn.line))
        if what == "split" and len(args) == 3:
            return split_cover(self._reference(defn, args[1], ("complex",)), _int(args[2], defn.line))
        raise self._unreadable(defn, args)

    def _kbased(self, defn: Definition, args: List[Token]) -> KBasedComplex:
        if len(args) != 3 or args[0][0] != "on" or args[2][0] not in ("covariant", "contravariant"):
            raise self._unreadable(defn, args)
        host = self._reference(defn, args[1], ("complex",))
        gens, d = [], KeyedMatrix()
        for n, row in self._rows(defn):
            words = [t for t, _ in row]
            if words[0] == "gen" and len(row) >= 5 and words[3] == ":":
                simplex = tuple(sorted(_int(t, n) for t in row[4:]))
                if simplex not in host:
                    raise ScenarioError(f"{simplex} is not a simplex of '{args[1][0]}'", n, row[4][1])
                gens.append(Generator(words[1], simplex, _int(row[2], n)))
            elif words[0] == "d" and len(row) == 4:
                d.add(words[1], words[2], _int(row[3], n))
            else:
                raise ScenarioError(f"expected 'gen KEY P : vertices' or 'd ROW COL V', got '{' '.join(words)}'",
                                    n, row[0][1])
        C = KBasedComplex(host, Variance(args[2][0]), tuple(gens), d)
        report = C.verify()
        if not report["valid"]:
            first = report["failures"][0]
            raise ScenarioError(f"K-based complex '{defn.name}' fails the {first['kind']} check at {first['entry']}",
                                defn.line, args[0][1])
        return C

    def _decomposition(self, defn: Definition, args: List[Token]):
        if len(args) != 2 or args[0][0] != "product":
            raise self._unreadable(defn, args)
        return product_interval(self._reference(defn, args[1], ("complex",)))


# writing

def serialize_scenario(doc: ScenarioDoc) -> str:
    out = []
    for defn in doc.definitions.values():
        out.append(" ".join((defn.kind, defn.name) + defn.args))
        if defn.is_block:
            out.extend("  " + " ".join(row) for row in defn.body)
            out.append("end")
    for cmd in doc.commands:
        parts = ["command", cmd.kind] + ([cmd.target] if cmd.target else [])
        parts += [f"{k}={v}" for k, v in cmd.params.items()]
        out.append(" ".join(parts))
    return "\n".join(out) + ("\n" if out else "")


def resolve_scenario_path(path: str) -> str:
    """The path itself, or the first match in the configured scenario search paths."""
    if os.path.exists(path):
        return path
    ext = settings.scenarios.extension
    names = [path] if path.endswith(ext) else [path, path + ext]
    bases = [b for p in settings.scenarios.search_paths for b in (p, os.path.join(ROOT, p))]
    for base in bases:
        for name in names:
            candidate = os.path.join(base, name)
            if os.path.exists(candidate):
                return candidate
    raise ScenarioError(f"scenario not found: {path}")


def load_scenario(path: str) -> ScenarioDoc:
    resolved = resolve_scenario_path(path)
    with open(resolved, encoding="utf-8") as f:
        text = f.read()
    logger.info(f"Loading scenario {resolved}")
    return parse_scenario(text)

# modules/cli/runner.py

import json
import numbers
import random
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import yaml

from core.config import settings
from core.exceptions import SurgeryKitError
from core.logger import get_surgery_logger
from core.signs import SignManifest
from modules.chain_algebra import ChainComplex, chain_contraction_z, homology_z, verify_complex
from modules.exact_core import ExactMatrix, RingSpec
from modules.k_based import (KBasedComplex, KQuadraticStructure, Variance, band_blocks, check_assembled_upsilon,
                             check_dual_exchange, check_duality_axioms, check_mho_identity, check_pair_relation,
                             check_partial_functor, check_structure_transfer, componentwise_poincare,
                             cover_quadratic_pair, cylinder_ad, hyperbolic_seed, local_dual, local_dual_inverse,
                             mho_sigma, random_k_based_complex, random_k_morphism, relative_delta_poincare,
                             restrict_to_l, structure_band_blocks, transfer_commutes_with_duality,
                             verify_k_quadratic)
from modules.simplicial_geometry import (FiniteGaloisCover, OrderedComplex, SphereEmbedding, UpperClosedSet,
                                         distance_function, dual_cell_data, dual_incidence_exhaustive,
                                         random_ordered_complex, split_cover, trivial_cover)
from modules.structured_forms import (QuadraticComplex, algebraic_thom, boundary_thickening, is_poincare_pair_z,
                                      is_poincare_z, random_quadratic_on_random_complex, reproduces_manifest,
                                      search_thickening_signs, verify_quadratic, verify_quadratic_pair)
from modules.suspension_lab import (BandedMatrix, GradedChainComplex, GradedObject, GradedQuadraticComplex,
                                    SuspensionElement, check_flasque, check_identification_laws, check_reindex_laws,
                                    check_theta_functor, check_transfer_homomorphism, finite_domination,
                                    lift_from_infinity, random_banded, random_block, random_contractible,
                                    random_graded_object, random_word_pairs)

from .scenario import Command, ScenarioDoc
from .signature import form_signature, intersection_signature

logger = get_surgery_logger("surgerykit.cli", "CLI")


@dataclass
class CommandReport:
    index: int
    kind: str
    target: Optional[str]
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)
    failures: List[Any] = field(default_factory=list)
    seconds: Optional[float] = None

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self, max_failures: int) -> Dict[str, Any]:
        out = {"index": self.index, "command": self.kind, "target": self.target, "status": self.status,
               "details": plain(self.details), "failure_count": len(self.failures),
               "failures": plain(self.failures[:max_failures])}
        if self.seconds is not None:
            out["seconds"] = round(self.seconds, 3)
        return out


@dataclass
class ReportDoc:
    seed: int
    count: int
    manifest_version: str
    commands: List[CommandReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.commands)

    def to_dict(self) -> Dict[str, Any]:
        limit = settings.report.max_failures_listed
        return {"manifest_version": self.manifest_version, "seed": self.seed, "count": self.count,
                "status": "pass" if self.passed else "fail",
                "commands": [c.to_dict(limit) for c in self.commands]}

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, allow_unicode=True, default_flow_style=None)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def render(self, fmt: Optional[str] = None) -> str:
        """Machine-readable report in `fmt` (yaml or json, default from config.yaml)."""
        fmt = (fmt or settings.report.machine_format).lower()
        if fmt == "json":
            return self.to_json()
        if fmt != "yaml":
            logger.warning(f"Unknown report format '{fmt}', writing yaml")
        return self.to_yaml()


def plain(value: Any) -> Any:
    """YAML-safe copy: tuples become lists, integers of any kind become int."""
    if isinstance(value, dict):
        return {str(k) if not isinstance(k, (str, int)) else k: plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, ExactMatrix):
        return plain(value.to_list())
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, numbers.Integral):
        return int(value)
    return str(value)


@dataclass
class _Context:
    doc: ScenarioDoc
    command: Command
    rng: random.Random
    count: int

    @property
    def target(self) -> Any:
        return self.doc.objects.get(self.command.target) if self.command.target else None

    @property
    def ring(self) -> RingSpec:
        return self.target if isinstance(self.target, RingSpec) else RingSpec.integers()


Report = Dict[str, Any]


def underlying_chain(target: Any) -> ChainComplex:
    """The ℤ-chain complex behind a simplicial, K-based or plain complex."""
    if isinstance(target, OrderedComplex):
        return target.chain_complex()
    if isinstance(target, KBasedComplex):
        return target.chain_complex()[0]
    return target


# commands on named objects

def _homology(ctx: _Context) -> Report:
    C = underlying_chain(ctx.target)
    groups = homology_z(C)
    failures = []
    if "betti" in ctx.command.params:
        expected = [int(x) for x in ctx.command.params["betti"].split(",")]
        found = [groups[r].free_rank for r in sorted(groups)]
        for r, (e, f) in enumerate(zip(expected + [0] * len(found), found + [0] * len(expected))):
            if e != f:
                failures.append({"degree": C.lo + r, "expected": e, "found": f})
    return {"valid": not failures, "failures": failures,
            "homology": {r: groups[r].describe() for r in sorted(groups)}}


def _signature(ctx: _Context) -> Report:
    target, cmd = ctx.target, ctx.command
    reverse = cmd.flag("reverse")
    if isinstance(target, OrderedComplex):
        report = intersection_signature(target, reverse=reverse)
    else:
        psi = target.block(0, target.n // 2)
        report = form_signature((psi + psi.transpose()).to_int_list())
        report = report.negated() if reverse else report
    failures = []
    if report.degenerate:
        failures.append({"kind": "degenerate", "rank": report.rank, "middle_betti": report.middle_betti})
    expect, expect_abs = cmd.int_param("expect"), cmd.int_param("expect_abs")
    if expect is not None and report.signature != expect:
        failures.append({"kind": "signature", "expected": expect, "found": report.signature})
    if expect_abs is not None and abs(report.signature) != expect_abs:
        failures.append({"kind": "signature", "expected_abs": expect_abs, "found": report.signature})
    return {"valid": not failures, "failures": failures, **report.to_dict()}


def _dual_incidence(ctx: _Context) -> Report:
    if ctx.target is None:
        return dual_incidence_exhaustive(ctx.command.int_param("max_l", 5))
    cells = dual_cell_data(SphereEmbedding.identity(ctx.target))
    report = cells.check_dual_incidence()
    order = cells.check_order_reversal()
    report["failures"] += [dict(f, kind="order_reversal") for f in order["failures"]]
    report["valid"] = report["valid"] and order["valid"]
    report["l"] = cells.l
    return report


def _verify_complex(ctx: _Context) -> Report:
    if isinstance(ctx.target, KBasedComplex):
        return ctx.target.verify()
    return verify_complex(underlying_chain(ctx.target))


def _partition(ctx: _Context) -> Report:
    return ctx.target.check_partition()


def _verify_quadratic(ctx: _Context) -> Report:
    return verify_quadratic(ctx.target)


def _poincare(ctx: _Context) -> Report:
    expected = ctx.command.flag("expect", True)
    result = is_poincare_z(ctx.target)
    failures = []
    if result.is_poincare != expected:
        failures.append(dict(result.to_dict(), expected=expected))
    return {"valid": not failures, "failures": failures, **result.to_dict()}


def _thickening_failures(q: QuadraticComplex) -> List[str]:
    """Boundary thickening is a Poincaré pair; over a Poincaré input its boundary contracts and Thom is valid."""
    pair = boundary_thickening(q)
    found = []
    if not verify_quadratic_pair(pair)["valid"]:
        found.append("pair_relation")
    elif not is_poincare_pair_z(pair).is_poincare:
        found.append("poincare_pair")
    elif is_poincare_z(q).is_poincare:
        if not chain_contraction_z(pair.source).contractible:
            found.append("boundary_contraction")
        elif not verify_quadratic(algebraic_thom(pair))["valid"]:
            found.append("thom")
    return found


def _thickening(ctx: _Context) -> Report:
    if ctx.target is not None:
        battery = [ctx.target]
    else:
        battery = [random_quadratic_on_random_complex(ctx.rng, ctx.rng.randint(0, 3), 0, 2,
                                                     settings.verification.max_rank)
                   for _ in range(ctx.count)]
    failures = [{"instance": i, "kind": kind} for i, q in enumerate(battery) for kind in _thickening_failures(q)]
    return {"valid": not failures, "failures": failures, "checked": len(battery)}


def _sign_manifest(ctx: _Context) -> Report:
    result = search_thickening_signs(size=settings.manifest.battery_size)
    failures = [] if reproduces_manifest(result) else [{"survivors": len(result.survivors),
                                                        "rejected": result.rejected}]
    return {"valid": not failures, "failures": failures, "survivors": len(result.survivors),
            "battery": result.battery_size, "manifest_version": SignManifest.version()}


# randomized suites

def _duality_axioms(ctx: _Context) -> Report:
    if isinstance(ctx.target, KBasedComplex):
        return check_duality_axioms(ctx.target)
    rng, failures = ctx.rng, []
    for i in range(ctx.count):
        host = ctx.target if ctx.target is not None else random_ordered_complex(rng, rng.randint(2, 4), 2,
                                                                                  rng.randint(1, 3))
        variance = rng.choice((Variance.COVARIANT, Variance.CONTRAVARIANT))
        C = random_k_based_complex(rng, host, variance, 0, 1, 1, settings.verification.coefficient_bound)
        failures += [dict(f, instance=i, variance=variance.value) for f in check_duality_axioms(C)["failures"]]
    return {"valid": not failures, "failures": failures, "checked": ctx.count}


def _assembly(ctx: _Context) -> Report:
    cover, failures = ctx.target, []
    for i in range(ctx.count):
        C = random_k_based_complex(ctx.rng, cover.base, Variance.COVARIANT, 0, 1, 1,
                                   settings.verification.coefficient_bound)
        failures += [dict(f, instance=i) for f in check_assembled_upsilon(C, cover)["failures"]]
    return {"valid": not failures, "failures": failures, "checked": ctx.count}


def _suspension_laws(ctx: _Context) -> Report:
    rng, ring, failures = ctx.rng, ctx.ring, []
    bound = settings.verification.coefficient_bound

    def grid(rows: int, cols: int):
        return [[random_banded(rng, ring, bound=bound) for _ in range(cols)] for _ in range(rows)]

    for i in range(ctx.count):
        obj = GradedObject.constant(rng.randint(1, 2))
        f = random_banded(rng, ring, obj, obj, bound=bound)
        g = random_banded(rng, ring, obj, obj, bound=bound)
        checks = {"identification": check_identification_laws(f, g),
                  "reindex": check_reindex_laws(grid(2, 2), grid(2, 1)),
                  "theta": check_theta_functor(*[[[SuspensionElement(m) for m in row] for row in x]
                                                 for x in (grid(2, 2), grid(1, 2), grid(2, 2))])}
        failures += [dict(f, instance=i, family=name) for name, report in checks.items()
                     for f in report["failures"]]
    return {"valid": not failures, "failures": failures, "checked": ctx.count}


def _flasque(ctx: _Context) -> Report:
    rng, ring, failures = ctx.rng, ctx.ring, []
    bound = settings.verification.coefficient_bound
    for i in range(ctx.count):
        M, N = random_graded_object(rng, finite=True), random_graded_object(rng, finite=True)
        entries = {(a, b): random_block(rng, ring, N.rank(a), M.rank(b), bound)
                   for a in range(N.stable_from) for b in range(M.stable_from) if N.rank(a) and M.rank(b)}
        f = BandedMatrix.finite(ring, N, M, entries)
        failures += [dict(x, instance=i) for x in check_flasque(ring, M, N, f)["failures"]]
    return {"valid": not failures, "failures": failures, "checked": ctx.count}


def _random_corner_complex(rng: random.Random, ring: RingSpec) -> GradedQuadraticComplex:
    """C_2 → C_1 → C_0 on underline R with d_2 banded and d_1 finite, so d² vanishes at infinity only."""
    obj = GradedObject.constant(1)
    d2 = random_banded(rng, ring)
    d1 = BandedMatrix.finite(ring, obj, obj, {(rng.randrange(3), rng.randrange(3)): random_block(rng, ring, 1, 1)})
    C = GradedChainComplex(ring, 0, 2, {r: obj for r in range(3)}, {1: d1, 2: d2})
    psi = {(0, 1): BandedMatrix.finite(ring, obj, obj, {(rng.randrange(2), rng.randrange(2)):
                                                         random_block(rng, ring, 1, 1)})}
    return GradedQuadraticComplex(C, 2, psi)


def _lift(ctx: _Context) -> Report:
    failures = []
    for i in range(ctx.count):
        result = lift_from_infinity(_random_corner_complex(ctx.rng, ctx.ring))
        if not result.valid:
            failures += [dict(f, instance=i) for f in result.report["failures"]]
        if not result.report["same_class"]:
            failures.append({"instance": i, "kind": "same_class"})
    return {"valid": not failures, "failures": failures, "checked": ctx.count}


def _domination(ctx: _Context) -> Report:
    failures = []
    for i in range(ctx.count):
        C, T = random_contractible(ctx.rng, ctx.ring)
        failures += [dict(f, instance=i) for f in finite_domination(C, T).report["failures"]]
    return {"valid": not failures, "failures": failures, "checked": ctx.count}


def _transfer_laws(ctx: _Context) -> Report:
    pairs = random_word_pairs(ctx.rng, ctx.target, ctx.count)
    report = check_transfer_homomorphism(ctx.target, pairs)
    report["checked"] = len(pairs)
    return report


# K-based structures: local duals, L⊗[0,1] pairs, covers

LOCAL_DUAL_HOSTS = (OrderedComplex.path(1), OrderedComplex.path(2), OrderedComplex.simplex_boundary(2))


def _seeded_structure(ctx: _Context, host: Any, n: Optional[int] = None) -> KQuadraticStructure:
    """Hyperbolic Poincaré seed over a random covariant complex on `host`."""
    D = random_k_based_complex(ctx.rng, host, Variance.COVARIANT, 0, 1, 1, settings.verification.coefficient_bound)
    return hyperbolic_seed(D, ctx.rng.randint(0, 3) if n is None else n, ctx.rng, top=3)


def _tagged(report: Report, instance: int, check: str) -> List[Dict[str, Any]]:
    return [dict(f, instance=instance, check=check) for f in report["failures"]]


def _local_dual(ctx: _Context) -> Report:
    hosts = (ctx.target,) if ctx.target is not None else LOCAL_DUAL_HOSTS
    failures = []
    for i in range(ctx.count):
        host = ctx.rng.choice(hosts)
        q = _seeded_structure(ctx, host, ctx.rng.randint(1, 3))
        emb = SphereEmbedding.identity(host)
        ld = local_dual(q, emb)
        failures += _tagged(verify_k_quadratic(ld), i, "relation")
        failures += _tagged(componentwise_poincare(ld), i, "poincare")
        back = local_dual_inverse(ld, emb)
        if back.n != q.n or any(back.component(u) != q.component(u) for u in range(q.top + 1)):
            failures.append({"instance": i, "check": "round_trip"})
    return {"valid": not failures, "failures": failures, "checked": ctx.count}


def _product_pairs(ctx: _Context) -> Report:
    decomp, failures = ctx.target, []
    for i in range(ctx.count):
        theta = _seeded_structure(ctx, decomp.product)
        for sigma in decomp.L:
            mho = mho_sigma(theta.complex, decomp, sigma, theta.dual)
            if not mho.is_chain_map():
                failures.append({"instance": i, "simplex": list(sigma), "check": "mho_chain_map"})
            elif not mho.cone_is_acyclic():
                failures.append({"instance": i, "simplex": list(sigma), "check": "mho_cone"})
            for name, report in (("mho_identity", check_mho_identity(theta, decomp, sigma)),
                                 ("pair_relation", check_pair_relation(theta, decomp, sigma)),
                                 ("relative_poincare", relative_delta_poincare(theta, decomp, sigma))):
                failures += [dict(f, simplex=list(sigma)) for f in _tagged(report, i, name)]
    return {"valid": not failures, "failures": failures, "checked": ctx.count}


def _restrict_to_l(ctx: _Context) -> Report:
    decomp, failures = ctx.target, []
    for i in range(ctx.count):
        theta = _seeded_structure(ctx, decomp.product)
        q = restrict_to_l(theta, decomp)
        if q.n != theta.n - 1:
            failures.append({"instance": i, "check": "dimension", "found": q.n})
        failures += _tagged(verify_k_quadratic(q), i, "relation")
        failures += _tagged(componentwise_poincare(q), i, "poincare")
    return {"valid": not failures, "failures": failures, "checked": ctx.count}


def _cylinder(ctx: _Context) -> Report:
    decomp, failures = ctx.target, []
    for i in range(ctx.count):
        theta = _seeded_structure(ctx, decomp.product)
        failures += _tagged(cylinder_ad(theta, decomp).verify(), i, "cells")
    return {"valid": not failures, "failures": failures, "checked": ctx.count}


def _pair_setting(ctx: _Context) -> Tuple[FiniteGaloisCover, UpperClosedSet]:
    """Off L inside the capped product, or the complement of a vertex of a cover's base."""
    if isinstance(ctx.target, FiniteGaloisCover):
        cover = ctx.target
        v = ctx.rng.choice(sorted(cover.base.vertices))
        return cover, UpperClosedSet(cover.base, frozenset(s for s in cover.base if s != (v,)))
    decomp = ctx.target
    K = decomp.capped()
    sheets = ctx.command.int_param("sheets", 1)
    cover = split_cover(K, sheets) if sheets > 1 else trivial_cover(K)
    return cover, UpperClosedSet(K, frozenset(s for s in K if s not in decomp.L))


def _cover_pair(ctx: _Context) -> Report:
    cover, S = _pair_setting(ctx)
    failures = []
    for i in range(ctx.count):
        theta = _seeded_structure(ctx, cover.base)
        failures += _tagged(cover_quadratic_pair(theta, S, cover).verify(), i, "pair")
    return {"valid": not failures, "failures": failures, "checked": ctx.count}


def _partial_assembly(ctx: _Context) -> Report:
    cover, rng, failures = ctx.target, ctx.rng, []
    for i in range(ctx.count):
        C0, C1, C2 = (random_k_based_complex(rng, cover.base, Variance.COVARIANT, 0, 1, 1) for _ in range(3))
        f, g = random_k_morphism(rng, C0, C1), random_k_morphism(rng, C1, C2)
        star = UpperClosedSet.generated_by(cover.base, [(rng.choice(sorted(cover.base.vertices)),)])
        for S in (sorted(star.simplices), list(cover.base)):
            report = check_partial_functor(f, g, C0, C1, C2, S, cover)
            failures += [dict(x, size=len(S)) for x in _tagged(report, i, "functor")]
    return {"valid": not failures, "failures": failures, "checked": ctx.count}


def _infinite_transfer(ctx: _Context) -> Report:
    cover, rng, failures = ctx.target, ctx.rng, []
    F = distance_function(cover.base, [(min(cover.base.vertices),)])
    for i in range(ctx.count):
        variance = rng.choice((Variance.COVARIANT, Variance.CONTRAVARIANT))
        X = random_k_based_complex(rng, cover.base, variance, 0, 1, 1)
        if not transfer_commutes_with_duality(X, cover):
            failures.append({"instance": i, "check": "duality", "variance": variance.value})
        theta = _seeded_structure(ctx, cover.base)
        failures += _tagged(check_structure_transfer(theta, cover), i, "structure")
        D, cutoff = theta.complex, F.max_distance
        if band_blocks(D, F, cutoff, cover).augmented().blocks != band_blocks(D, F, cutoff).blocks:
            failures.append({"instance": i, "check": "band_d"})
        for u in range(theta.top + 1):
            if (structure_band_blocks(theta, u, F, cutoff, cover).augmented().blocks !=
                    structure_band_blocks(theta, u, F, cutoff).blocks):
                failures.append({"instance": i, "check": "band_structure", "u": u})
    return {"valid": not failures, "failures": failures, "checked": ctx.count}


def _dual_exchange(ctx: _Context) -> Report:
    rng, failures = ctx.rng, []
    for i in range(ctx.count):
        host = ctx.target if ctx.target is not None else random_ordered_complex(rng, rng.randint(2, 4), 2,
                                                                                  rng.randint(1, 3))
        theta = _seeded_structure(ctx, host)
        S = UpperClosedSet.generated_by(host, [(rng.choice(sorted(host.vertices)),)])
        failures += _tagged(check_dual_exchange(theta, S), i, "exchange")
    return {"valid": not failures, "failures": failures, "checked": ctx.count}


RUNNERS: Dict[str, Callable[[_Context], Report]] = {
    "homology": _homology,
    "signature": _signature,
    "dual_incidence": _dual_incidence,
    "verify_complex": _verify_complex,
    "partition": _partition,
    "verify_quadratic": _verify_quadratic,
    "poincare": _poincare,
    "thickening": _thickening,
    "sign_manifest": _sign_manifest,
    "duality_axioms": _duality_axioms,
    "assembly": _assembly,
    "suspension_laws": _suspension_laws,
    "flasque": _flasque,
    "lift": _lift,
    "domination": _domination,
    "transfer_laws": _transfer_laws,
    "local_dual": _local_dual,
    "product_pairs": _product_pairs,
    "restrict_to_l": _restrict_to_l,
    "cylinder": _cylinder,
    "cover_pair": _cover_pair,
    "partial_assembly": _partial_assembly,
    "infinite_transfer": _infinite_transfer,
    "dual_exchange": _dual_exchange,
}


def command_seed(seed: int, index: int, command: Command) -> int:
    """Each command draws from its own stream so reports do not depend on neighbouring commands."""
    return command.int_param("seed", seed * 1009 + index)


def run_command(doc: ScenarioDoc, index: int, seed: int, count: int, timing: bool = False) -> CommandReport:
    command = doc.commands[index]
    ctx = _Context(doc, command, random.Random(command_seed(seed, index, command)),
                   command.int_param("count", count))
    started = time.perf_counter()
    try:
        report = dict(RUNNERS[command.kind](ctx))
    except SurgeryKitError as e:
        logger.warning(f"command {index} ({command.kind}) raised {type(e).__name__}: {e}")
        report = {"valid": False, "failures": [{"error": type(e).__name__, "message": str(e)}]}
    passed, failures = report.pop("valid"), report.pop("failures")
    for f in failures[:settings.report.max_failures_listed]:
        logger.warning(f"{command.kind} {command.target or ''}: {f}")
    seconds = time.perf_counter() - started if timing else None
    return CommandReport(index, command.kind, command.target, bool(passed), report, list(failures), seconds)


def run_verification(doc: ScenarioDoc, seed: Optional[int] = None, count: Optional[int] = None,
                     timing: Optional[bool] = None) -> ReportDoc:
    """Run every command in scenario order. Failures are report content, never exceptions."""
    seed = settings.verification.seed if seed is None else seed
    count = settings.verification.count if count is None else count
    timing = settings.report.include_timing if timing is None else timing
    out = ReportDoc(seed, count, SignManifest.version())
    for index in range(len(doc.commands)):
        out.commands.append(run_command(doc, index, seed, count, timing))
    logger.info(f"ran {len(doc.commands)} commands with seed {seed}: "
                f"{sum(c.passed for c in out.commands)} passed")
    return out

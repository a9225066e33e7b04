import argparse
import logging
import sys
import time
from typing import Callable, Dict, List, Optional, Tuple

from pydantic import ValidationError
from pydantic_core import PydanticSerializationError

import loaders
import settings
from coxeter import verify_artin, verify_section4
from errors import InternalError, PreconditionFailed, ToolkitError, UsageError
from permutahedron import constants, diameter_check, sparse_certificate
from realization import (
    algebra_crosscheck,
    build_pairings,
    enumerate_covering,
    pairings_from_images,
    prepare_input,
    verify_certificate,
)
from schemas import Arithmetic, Config, OutputFormat, Report, Status
from simplicial import VertexColoring, pseudo_manifold_report, validate_pseudo_manifold
from small_cover import (
    SimpleCellInput,
    flag_square_predicates,
    induced_domination,
    real_moment_angle,
    small_cover,
    summarize_quotient,
    validate_characteristic,
)
from sphere_maps import FineData, dominate_via_permutahedron, fine_certificate

logger = logging.getLogger(__name__)

Result = Tuple[Status, Dict[str, object]]

EXIT_CODES = {Status.PASS: 0, Status.FAIL: 1, Status.PARTIAL: 2}

# Au-delà, la liste des paires de sommets du permutoèdre devient trop longue
SPARSE_CERTIFICATE_MAX_N = 4


def _require(value, flag: str):
    if value is None:
        raise UsageError(f"{flag} is required for this command")
    return value


def _oriented(loaded: loaders.LoadedComplex, **kwargs):
    return validate_pseudo_manifold(loaded.complex, orientation=loaded.orientation, **kwargs)


# === CHECK ===

def cmd_check(config: Config) -> Result:
    loaded = loaders.load_complex(_require(config.input, "--input"))
    report = pseudo_manifold_report(loaded.complex, orientation=loaded.orientation)
    payload: Dict[str, object] = {
        "dim": loaded.complex.dim,
        "f_vector": list(loaded.complex.f_vector()),
        "pseudo_manifold": report.is_pseudo_manifold,
        "strongly_connected": report.strongly_connected,
        "orientable": report.orientable,
        "bad_ridges": [[list(r), c] for r, c in report.bad_ridges],
    }
    passed = report.is_pseudo_manifold and report.strongly_connected and bool(report.orientable)

    if loaded.coloring is not None:
        coloring = VertexColoring.check(loaded.complex, loaded.coloring)
        payload["regular_coloring"] = coloring.regular
        passed = passed and coloring.regular

    if config.flag_square:
        predicates = flag_square_predicates(loaded.complex)
        payload["flag"] = predicates.is_flag
        payload["empty_square"] = predicates.has_empty_square
        payload["missing_faces"] = [list(f) for f in predicates.missing_faces]
        payload["empty_squares"] = [list(c) for c in predicates.empty_squares]

    if config.lambda_file:
        rank, values = loaders.load_characteristic(config.lambda_file)
        try:
            validate_characteristic(SimpleCellInput.of(loaded.complex), values, rank)
            payload["characteristic"] = {"ok": True}
        except ToolkitError as e:
            payload["characteristic"] = {"ok": False, **e.to_dict()}
            passed = False

    return (Status.PASS if passed else Status.FAIL), payload


# === REALIZE ===

def cmd_realize(config: Config) -> Result:
    loaded = loaders.load_complex(_require(config.input, "--input"))
    z = _oriented(loaded)
    inp = prepare_input(z, colors=loaded.coloring, auto_subdivide=config.auto_subdivide)
    if config.pairings:
        family = pairings_from_images(inp, loaders.load_pairings(config.pairings))
    else:
        family = build_pairings(inp, seed=config.seed)

    atlas = enumerate_covering(inp, family, budget=config.budget)
    certificate = verify_certificate(atlas, inp)
    payload = certificate.model_dump()
    payload["n"] = inp.n
    payload["subdivided"] = inp.subdivided
    if not certificate.passed:
        return Status.FAIL, payload
    if not atlas.complete:
        return Status.PARTIAL, payload
    return Status.PASS, payload


# === CONSTANTS ===

def cmd_constants(config: Config) -> Result:
    n = _require(config.n, "--n")
    payload = constants(n).as_dict()
    diameter_ok, equality = diameter_check(n)
    payload["diameter_ok"] = diameter_ok
    payload["diameter_equality"] = equality
    passed = diameter_ok
    if n <= SPARSE_CERTIFICATE_MAX_N:
        sparse = sparse_certificate(n, samples=50, seed=config.seed)
        payload["sparse"] = sparse.model_dump()
        passed = passed and sparse.ok
    return (Status.PASS if passed else Status.FAIL), payload


# === DOMINATE ===

def cmd_dominate(config: Config) -> Result:
    if config.map_file:
        loaded = loaders.load_map(config.map_file)
        z1 = _oriented(loaded.source)
        z2 = _oriented(loaded.target)
        result = induced_domination(loaded.map, z1, z2)
        payload = {
            "m1": result.m1,
            "m2": result.m2,
            "map_degree": result.map_degree,
            "degree": result.degree,
            "expected": result.expected,
        }
        return Status.PASS, payload

    placement = loaders.load_placement(_require(config.input, "--input or --map"))
    z = _oriented(placement.complex)
    n = placement.vectors.shape[1]
    if config.n is not None and config.n != n:
        raise PreconditionFailed(f"placement lives in R^{n}, --n says {config.n}")
    eps = config.eps if config.eps is not None else float(constants(n).eps)
    fine = FineData(z=z, placement=placement.vectors, eps=eps, exact_placement=_exact(config, placement))
    report = dominate_via_permutahedron(fine, seed=config.seed, tolerance=config.tolerance)
    return Status.PASS, report.as_dict()


# === COVERS ===

def cmd_covers(config: Config) -> Result:
    loaded = loaders.load_complex(_require(config.input, "--input"))
    cell = SimpleCellInput.of(loaded.complex)
    if config.real_moment_angle:
        q = real_moment_angle(cell)
    else:
        rank, values = loaders.load_characteristic(_require(config.lambda_file, "--lambda or --real-moment-angle"))
        if rank != cell.n:
            raise PreconditionFailed(f"characteristic rank {rank} differs from n = {cell.n}")
        validate_characteristic(cell, values, rank)
        q = small_cover(cell, values)
    summary = summarize_quotient(q)
    passed = summary.local_ok and summary.pseudo_manifold
    return (Status.PASS if passed else Status.FAIL), summary.as_dict()


# === CERTIFY-FINE ===

def _exact(config: Config, placement: loaders.LoadedPlacement):
    return placement.exact if config.arithmetic == Arithmetic.EXACT else None


def cmd_certify_fine(config: Config) -> Result:
    placement = loaders.load_placement(_require(config.input, "--input"))
    z = _oriented(placement.complex)
    fine = FineData(
        z=z,
        placement=placement.vectors,
        eps=_require(config.eps, "--eps"),
        exact_placement=_exact(config, placement),
    )
    certificate = fine_certificate(fine, seed=config.seed, tolerance=config.tolerance)
    payload = certificate._asdict()
    payload["worst_simplex"] = list(certificate.worst_simplex)
    payload["eps"] = fine.eps
    return (Status.PASS if certificate.passed else Status.FAIL), payload


# === ALGEBRA ===

def cmd_algebra(config: Config) -> Result:
    path = _require(config.input, "--input")
    if loaders.file_kind(path) == "poset":
        poset = loaders.load_poset(path)
        section = verify_section4(poset, trials=config.trials, max_len=config.max_len, seed=config.seed)
        artin = verify_artin(poset, seed=config.seed)
        payload = {"semidirect": section.model_dump(), "artin": artin.model_dump()}
        passed = section.ok and artin.ok
    else:
        loaded = loaders.load_complex(path)
        inp = prepare_input(_oriented(loaded), colors=loaded.coloring, auto_subdivide=config.auto_subdivide)
        family = build_pairings(inp, seed=config.seed)
        crosscheck = algebra_crosscheck(
            inp, family, trials=config.trials, max_len=config.max_len, seed=config.seed, budget=config.budget,
        )
        payload = {"crosscheck": crosscheck.model_dump()}
        passed = crosscheck.ok
    return (Status.PASS if passed else Status.FAIL), payload


COMMANDS: Dict[str, Callable[[Config], Result]] = {
    "check": cmd_check,
    "realize": cmd_realize,
    "constants": cmd_constants,
    "dominate": cmd_dominate,
    "covers": cmd_covers,
    "certify-fine": cmd_certify_fine,
    "algebra": cmd_algebra,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cycleforge", description="Pseudo-manifold realization and domination toolkit")
    parser.add_argument("--version", action="version", version=f"cycleforge {settings.VERSION}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--input")
    common.add_argument("--budget", type=int, default=settings.DEFAULT_BUDGET)
    common.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    arithmetic = common.add_mutually_exclusive_group()
    arithmetic.add_argument("--exact", dest="arithmetic", action="store_const", const="exact")
    arithmetic.add_argument("--float", dest="arithmetic", action="store_const", const="float")
    common.add_argument("--tolerance", type=float, default=settings.DEFAULT_TOLERANCE)
    output = common.add_mutually_exclusive_group()
    output.add_argument("--json", dest="output", action="store_const", const="json")
    output.add_argument("--text", dest="output", action="store_const", const="text")
    common.set_defaults(arithmetic="exact", output="json")

    check = sub.add_parser("check", parents=[common], help="validate a complex")
    check.add_argument("--flag-square", action="store_true")
    check.add_argument("--lambda", dest="lambda_file")

    realize = sub.add_parser("realize", parents=[common], help="build the finite covering of a colored cycle")
    realize.add_argument("--pairings")
    realize.add_argument("--auto-subdivide", action="store_true")

    sub.add_parser("constants", parents=[common], help="permutahedron constants").add_argument("--n", type=int)

    dominate = sub.add_parser("dominate", parents=[common], help="domination of real moment-angle complexes")
    dominate.add_argument("--map", dest="map_file")
    dominate.add_argument("--n", type=int)
    dominate.add_argument("--eps", type=float)

    covers = sub.add_parser("covers", parents=[common], help="small covers and real moment-angle complexes")
    covers.add_argument("--lambda", dest="lambda_file")
    covers.add_argument("--real-moment-angle", action="store_true")

    sub.add_parser("certify-fine", parents=[common], help="certify an eps-fine placement").add_argument("--eps", type=float)

    algebra = sub.add_parser("algebra", parents=[common], help="randomized group-theoretic checks")
    algebra.add_argument("--trials", type=int, default=200)
    algebra.add_argument("--max-len", type=int, default=12)
    algebra.add_argument("--auto-subdivide", action="store_true")
    return parser


def parse_config(argv: Optional[List[str]] = None) -> Config:
    args = vars(build_parser().parse_args(argv))
    try:
        return Config(**{k: v for k, v in args.items() if v is not None})
    except ValidationError as e:
        raise UsageError("; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()))


def _failed(config: Config, error: ToolkitError, start: float) -> Report:
    logger.error(f"{type(error).__name__}: {error.detail}")
    return Report(command=config.command, status=Status.FAIL, payload=error.to_dict(), timing=time.perf_counter() - start)


def run(config: Config) -> Tuple[Report, int]:
    start = time.perf_counter()
    try:
        status, payload = COMMANDS[config.command](config)
        report = Report(command=config.command, status=status, payload=payload, timing=time.perf_counter() - start)
        return report, EXIT_CODES[status]
    except ToolkitError as e:
        return _failed(config, e, start), e.exit_code
    except (ValidationError, PydanticSerializationError) as e:
        error = InternalError(f"{type(e).__name__}: {e}")
        return _failed(config, error, start), error.exit_code


def render(config: Config, report: Report, code: int) -> Tuple[str, int]:
    output = OutputFormat(config.output)
    try:
        return loaders.dump_report(report, output), code
    except PydanticSerializationError as e:
        error = InternalError(f"report payload is not serializable: {e}")
        logger.error(f"InternalError: {error.detail}")
        fallback = Report(command=report.command, status=Status.FAIL, payload=error.to_dict(), timing=report.timing)
        return loaders.dump_report(fallback, output), error.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=settings.LOG_LEVEL, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = parse_config(argv)
    except UsageError as e:
        print(f"usage error: {e.detail}", file=sys.stderr)
        return e.exit_code
    text, code = render(config, *run(config))
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

import json
import logging
import random
import sys
from functools import wraps
from pathlib import Path
from typing import Optional

import click
import sentry_sdk
from colorama import Fore, Style
from colorama import init as colorama_init

from chow import chow_ring, minkowski_weights
from clemens_schmid import clemens_schmid_sequences, mapping_cone_check, random_lefschetz_triple, tropical_clemens_schmid
from config import CONVENTIONS, VERSION, Settings
from exceptions import (
    ChaseFailureException,
    DegeneratePairingException,
    DegreeMismatchException,
    GluingConflictException,
    HLFailureException,
    IncompatibleClassException,
    MalformedInputException,
    NotAFanException,
    NotASubspaceException,
    NotBergmanException,
    NotCodimOneException,
    NotSimpleException,
    NotUnimodularException,
    RankDeficientException,
    VerificationFailedException,
    ZigzagInconsistentException,
)
from fixtures import ALL_FIXTURES, fixture_json, write_fixtures
from hodge_cycles import (
    cycle_to_json,
    hodge_class_from_json,
    hodge_class_to_json,
    hodge_locus_basis,
    hodge_to_cycle,
    mw_pairing,
    numerical_vs_homological,
    steenbrink_mw_pairing,
    verify_class,
    zigzag_choice_independent,
    zigzag_representative,
)
from matroid import bergman_fan, matroid_from_json
from polyhedral import Fan, FaceComplex, compactify, complex_from_json, fan_complex, fan_from_json
from steenbrink import (
    build_steenbrink,
    check_psi_identities,
    commutes_with_monodromy,
    primitive_parts,
    squares_to_zero,
    steenbrink_cohomology,
    surviving_relative,
    verify_hl,
)
from trop_cohomology import cellular_complex, check_poincare_duality, hodge_diamond
from utils import format_rational

logger = logging.getLogger(__name__)

INPUT_ERRORS = (
    MalformedInputException,
    NotAFanException,
    NotUnimodularException,
    NotSimpleException,
    NotBergmanException,
    NotCodimOneException,
)
VERIFICATION_ERRORS = (
    VerificationFailedException,
    HLFailureException,
    DegeneratePairingException,
    ChaseFailureException,
    IncompatibleClassException,
    GluingConflictException,
    ZigzagInconsistentException,
    RankDeficientException,
    NotASubspaceException,
    DegreeMismatchException,
)
RANDOM_TRIPLES = 20


def handle_errors(func):
    """
    Коды выхода: 2 - некорректный вход (JSON с нарушенным правилом), 1 - проверка не прошла
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (click.exceptions.Exit, click.ClickException, SystemExit):
            raise
        except INPUT_ERRORS as e:
            click.echo(json.dumps({"error": str(e), "rule": type(e).__name__}, sort_keys=True))
            sys.exit(2)
        except VERIFICATION_ERRORS as e:
            logger.warning(f"Verification failed: {e}")
            click.echo(json.dumps({"error": str(e), "check": type(e).__name__}, sort_keys=True))
            sys.exit(1)
        except Exception as e:
            sentry_sdk.capture_exception(e)
            logger.exception(f"Unexpected failure: {e}")
            sys.exit(1)
    return wrapper


def _load_json(path: Path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise MalformedInputException(f"Cannot read {path}: {e}")
    except json.JSONDecodeError as e:
        raise MalformedInputException(f"{path} is not valid JSON: {e}")


def _is_matroid(data) -> bool:
    return isinstance(data, dict) and "type" in data


def _load_fan(path: Path) -> Fan:
    """Веер из JSON веера или веер Бергмана матроида (документ с ключом type)"""
    data = _load_json(path)
    if _is_matroid(data):
        return bergman_fan(matroid_from_json(data))
    return fan_from_json(data)


def _load_complex(path: Path) -> FaceComplex:
    data = _load_json(path)
    if _is_matroid(data):
        return fan_complex(bergman_fan(matroid_from_json(data)))
    return complex_from_json(data)


def _load_source(source: str) -> dict:
    if source in ALL_FIXTURES and not Path(source).exists():
        return fixture_json(source)
    return _load_json(Path(source))


def _flatten(value, prefix: str = ""):
    if isinstance(value, dict):
        for key, item in value.items():
            yield from _flatten(item, f"{prefix}.{key}" if prefix else str(key))
    elif isinstance(value, list) and value and isinstance(value[0], (dict, list)):
        for i, item in enumerate(value):
            yield from _flatten(item, f"{prefix}[{i}]")
    else:
        yield prefix, value


def _paint(value) -> str:
    if value is True:
        return f"{Fore.GREEN}pass{Style.RESET_ALL}"
    if value is False:
        return f"{Fore.RED}FAIL{Style.RESET_ALL}"
    if isinstance(value, list):
        return " ".join(str(v) for v in value)
    return str(value)


def render_table(report: dict) -> str:
    lines = [f"trophodge {report['version']} | {report['command']}"]
    rows = list(_flatten(report["result"]))
    width = max((len(key) for key, _ in rows), default=0)
    for key, value in rows:
        lines.append(f"  {key:<{width}}  {_paint(value)}")
    lines.append(f"  {'status':<{width}}  {_paint(report['ok'])}")
    return "\n".join(lines)


def emit(ctx: click.Context, command: str, result: dict, ok: bool = True) -> None:
    report = {
        "version": VERSION,
        "conventions": CONVENTIONS,
        "command": command,
        "ok": ok,
        "result": result,
    }
    if ctx.obj["format"] == "json":
        click.echo(json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        click.echo(render_table(report))
    if not ok:
        sys.exit(1)


def _parse_int(value: str, name: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise MalformedInputException(f"{name} must be an integer, got {value!r}")


@click.group()
@click.option("--format", "output_format", type=click.Choice(["json", "table"]), default=None)
@click.option("--seed", type=int, default=None)
@click.version_option(VERSION, prog_name="trophodge")
@click.pass_context
def cli(ctx: click.Context, output_format: Optional[str], seed: Optional[int]):
    settings = Settings()
    logging.basicConfig(
        level=settings.log_level,
        format="%(filename)s:%(lineno)d #%(levelname)-8s "
               "[%(asctime)s] - %(name)s - %(message)s",
    )
    if settings.sentry_enabled:
        sentry_sdk.init(settings.sentry_dsn)
    colorama_init()
    default_format = settings.output_format if settings.output_format in ("json", "table") else "table"
    ctx.obj = {
        "format": output_format or default_format,
        "seed": settings.seed if seed is None else seed,
    }


@cli.command()
@click.argument("fan_path", type=click.Path(path_type=Path))
@click.option("--degrees", default="all", help="all или степень p")
@click.pass_context
@handle_errors
def chow(ctx: click.Context, fan_path: Path, degrees: str):
    """Размерности A^p(Σ) веера или веера Бергмана матроида"""
    ring = chow_ring(_load_fan(fan_path))
    wanted = range(ring.dim + 1) if degrees == "all" else [_parse_int(degrees, "--degrees")]
    emit(ctx, "chow", {str(p): ring.dim_of(p) for p in wanted})


@cli.command()
@click.argument("complex_path", type=click.Path(path_type=Path))
@click.option("-k", "k", type=int, required=True)
@click.pass_context
@handle_errors
def mw(ctx: click.Context, complex_path: Path, k: int):
    """Базис весов Минковского размерности k (комплекс или матроид)"""
    x = _load_complex(complex_path)
    basis = minkowski_weights(x, k)
    result = {
        "k": k,
        "faces": {str(f.index): f.label() for f in x.faces if f.dim == k and not f.sedentarity},
        "basis": [{str(i): format_rational(v) for i, v in zip(w.faces, w.weights)} for w in basis],
    }
    emit(ctx, "mw", result)


@cli.command()
@click.argument("complex_path", type=click.Path(path_type=Path))
@click.pass_context
@handle_errors
def cohomology(ctx: click.Context, complex_path: Path):
    """Ромб Ходжа h^{p,q} компактификации"""
    x = compactify(complex_from_json(_load_json(complex_path)))
    diamond = hodge_diamond(x)
    rows = {str(p): [diamond[(p, q)] for q in range(x.dim + 1)] for p in range(x.dim + 1)}
    emit(ctx, "cohomology", {"dim": x.dim, "h": rows})


@cli.command()
@click.argument("complex_path", type=click.Path(path_type=Path))
@click.pass_context
@handle_errors
def steenbrink(ctx: click.Context, complex_path: Path):
    """Блоки ST_1, когомологии строк, HL, H_s и H_rel"""
    st = build_steenbrink(compactify(complex_from_json(_load_json(complex_path))))
    d = st.dim
    hl = verify_hl(st)
    result = {
        "dim": d,
        "blocks": {f"{a},{b},{s}": n for (a, b, s), n in st.block_dims().items()},
        "rows": {str(b): {str(a): n for a, n in steenbrink_cohomology(st, b).items()} for b in range(0, 2 * d + 1, 2)},
        "squares_to_zero": squares_to_zero(st),
        "commutes_with_monodromy": commutes_with_monodromy(st),
        "hl": {f"{k},{b}": hl.page[(k, b)] and hl.cohomology[(k, b)] for (k, b) in hl.page},
        "surviving_relative": {
            f"{p},{q}": list(surviving_relative(st, p, q)) for p in range(d + 1) for q in range(d + 1)
        },
    }
    ok = result["squares_to_zero"] and result["commutes_with_monodromy"] and hl.ok
    emit(ctx, "steenbrink", result, ok)


def _random_triples_ok(seed: int, n: int) -> bool:
    rng = random.Random(seed)
    for _ in range(n):
        if not clemens_schmid_sequences(random_lefschetz_triple(rng)).ok:
            return False
    return True


@cli.command("cs-check")
@click.argument("complex_path", type=click.Path(path_type=Path))
@click.option("--random", "random_count", type=int, default=0, help="число случайных троек Лефшеца")
@click.pass_context
@handle_errors
def cs_check(ctx: click.Context, complex_path: Path, random_count: int):
    """Точность тропической последовательности Клеменса-Шмида по стыкам"""
    st = build_steenbrink(compactify(complex_from_json(_load_json(complex_path))))
    report = tropical_clemens_schmid(st)
    cones = {str(b): mapping_cone_check(st, b).ok for b in range(0, 2 * st.dim + 1, 2)}
    result = {
        "junctions": [
            {
                "label": j.label,
                "dim": j.dim,
                "incoming_rank": j.incoming_rank,
                "outgoing_kernel": j.outgoing_kernel,
                "ok": j.ok,
            }
            for j in report.junctions
        ],
        "comparisons": [
            {"label": c.label, "expected": c.expected, "found": c.found, "ok": c.ok}
            for c in report.comparisons
        ],
        "mapping_cone": cones,
    }
    ok = report.ok and all(cones.values())
    if random_count:
        result["random_triples"] = _random_triples_ok(ctx.obj["seed"], random_count)
        ok = ok and result["random_triples"]
    emit(ctx, "cs-check", result, ok)


@cli.command("hodge-cycle")
@click.argument("complex_path", type=click.Path(path_type=Path))
@click.option("--p", "p", type=int, default=None)
@click.option("--class", "class_path", type=click.Path(path_type=Path), default=None)
@click.pass_context
@handle_errors
def hodge_cycle(ctx: click.Context, complex_path: Path, p: Optional[int], class_path: Optional[Path]):
    """Циклы, представляющие классы Ходжа"""
    st = build_steenbrink(compactify(complex_from_json(_load_json(complex_path))))
    if class_path is not None:
        alpha = hodge_class_from_json(st, _load_json(class_path))
        if p is not None and p != alpha.p:
            raise MalformedInputException(f"--p {p} does not match the class degree {alpha.p}")
        p = alpha.p
        classes = [alpha]
    elif p is None:
        raise MalformedInputException("Either --p or --class is required")
    else:
        classes = hodge_locus_basis(st, p)
    entries = []
    for alpha in classes:
        cyc = hodge_to_cycle(st, alpha)
        entries.append({
            "class": hodge_class_to_json(st, alpha),
            "cycle": cycle_to_json(cyc),
            "closure": list(cyc.closure(st)),
            "verified": verify_class(st, alpha, cyc),
        })
    emit(ctx, "hodge-cycle", {"p": p, "classes": entries}, all(e["verified"] for e in entries))


def _guarded(check) -> bool:
    try:
        return bool(check())
    except VERIFICATION_ERRORS as e:
        logger.warning(f"{type(e).__name__}: {e}")
        return False


def _comparison(x, st, diamond) -> bool:
    return all(
        st.cohomology(q - p, 2 * p).dim == diamond[(p, q)]
        for p in range(x.dim + 1)
        for q in range(x.dim + 1)
    )


def _hodge_round_trip(st) -> bool:
    for p in range(st.dim + 1):
        for alpha in hodge_locus_basis(st, p):
            if not verify_class(st, alpha, hodge_to_cycle(st, alpha)):
                return False
    return True


def _zigzag_pairs_with_weights(st, rng: random.Random) -> bool:
    x = st.complex
    for p in range(st.dim + 1):
        cc = cellular_complex(x, p)
        weights = minkowski_weights(x, p)
        for alpha in hodge_locus_basis(st, p):
            cochain = zigzag_representative(st, alpha, cc)
            for w in weights:
                if mw_pairing(cc, cochain, w) != steenbrink_mw_pairing(st, alpha, w):
                    return False
            if not zigzag_choice_independent(st, alpha, rng, cc):
                return False
    return True


@cli.command("check-all")
@click.argument("source")
@click.pass_context
@handle_errors
def check_all(ctx: click.Context, source: str):
    """Полный набор проверок на фикстуре (по имени) или на файле комплекса"""
    seed = ctx.obj["seed"]
    rng = random.Random(seed)
    x = compactify(complex_from_json(_load_source(source)))
    diamond = hodge_diamond(x)
    st = build_steenbrink(x)
    d = st.dim
    checks = {
        "poincare_duality": lambda: all(check_poincare_duality(x).values()),
        "steenbrink_comparison": lambda: _comparison(x, st, diamond),
        "squares_to_zero": lambda: squares_to_zero(st),
        "commutes_with_monodromy": lambda: commutes_with_monodromy(st),
        "psi_identities": lambda: check_psi_identities(st, rng, 100).ok,
        "hard_lefschetz": lambda: verify_hl(st).ok,
        "primitive_decomposition": lambda: primitive_parts(st).ok,
        "clemens_schmid": lambda: tropical_clemens_schmid(st).ok,
        "mapping_cone": lambda: all(mapping_cone_check(st, b).ok for b in range(0, 2 * d + 1, 2)),
        "random_triples": lambda: _random_triples_ok(seed, RANDOM_TRIPLES),
        "hodge_cycles": lambda: _hodge_round_trip(st),
        "numerical_equivalence": lambda: all(numerical_vs_homological(st, p).ok for p in range(d + 1)),
        "zigzag_pairing": lambda: _zigzag_pairs_with_weights(st, rng),
    }
    result = {name: _guarded(check) for name, check in checks.items()}
    logger.info(f"check-all on {source}: {sum(result.values())}/{len(result)} passed")
    emit(ctx, "check-all", {"source": source, "seed": seed, "checks": result}, all(result.values()))


@cli.command()
@click.option("--out", "out", type=click.Path(path_type=Path), default=Path("fixtures_json"))
@click.pass_context
@handle_errors
def fixtures(ctx: click.Context, out: Path):
    """Записывает FIX-A ... FIX-F в каталог"""
    written = write_fixtures(out)
    emit(ctx, "fixtures", {"out": str(out), "files": [path.name for path in written]})


if __name__ == "__main__":
    cli()

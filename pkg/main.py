import argparse
import json
import logging
import sys
from typing import Any, Callable, Dict, List, Optional

from pydantic import ValidationError

from src.algsplit import SubtreeSequence
from src.chain import ChainComplex
from src.config import config
from src.cwsplit import PartCertificate, SvKSplitting, plus_construction
from src.deps import get_session, get_transversality
from src.errors import (
    CertificateNotFoundError,
    ContainmentError,
    RealizationError,
    SessionError,
    TransversalityError,
    WitnessError,
)
from src.groupring import GroupRing
from src.models.schemas import CommandReport, SplittingDoc, SubtreeDoc, Verdict, VerificationReport
from src.session import Session, kernel_specs, refine_maps

logging.basicConfig(level=getattr(logging, config.log_level, logging.INFO), stream=sys.stderr)
logger = logging.getLogger(__name__)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _subtrees(p, U: SubtreeSequence) -> List[Dict[str, Any]]:
    docs = [SubtreeDoc(vertices=sorted(p.format_key(v) for v in s.vertices), edges=sorted(p.format_key(e) for e in s.edges)) for s in U.subtrees]
    return [d.model_dump() for d in docs]


def _verdict(v: Verdict) -> Dict[str, Any]:
    return v.model_dump()


def _certificate(p, cert: PartCertificate) -> Dict[str, Any]:
    return {
        "kind": cert.kind.value,
        "nodes": [f"{p.format_key(c)}/{a}" for c, a in cert.nodes],
        "edges": [f"{p.format_key(c)}/{b}" for _, _, _, (c, b) in cert.edges],
        "spanning": cert.spanning,
        "loops": [p.format(g) for g in cert.loops],
        "components": cert.components,
        "generates": cert.generates,
        "euler": cert.euler,
    }


def _window(args) -> int:
    return args.window if args.window is not None else config.window


# commands


def cmd_realize(session: Session, args) -> CommandReport:
    comb = get_transversality(session.path)
    C = session.complex(args.complex)
    U = comb.alg.realize(C, session.seed(args.seed))
    report = VerificationReport()
    for r, v, w in comb.alg.realization_violations(C, U):
        report.add("realization", f"{comb.p.format_key(v)} reaches {comb.p.format_key(w)}", r)
    data = {
        "complex": session.complex_name(C),
        "subtrees": _subtrees(comb.p, U),
        "sizes": [[len(s.vertices), len(s.edges)] for s in U.subtrees],
    }
    return CommandReport(command="realize", session=session.document.name, passed=report.passed, data=data, violations=report.violations)


def cmd_split(session: Session, args) -> CommandReport:
    comb = get_transversality(session.path)
    alg = comb.alg
    C = session.complex(args.complex)
    U = alg.realize(C, session.seed(args.seed))
    S = alg.build_splitting(C, U)
    report = alg.verify_splitting(S)
    data = {
        "complex": session.complex_name(C),
        "ranks": [list(alg.degree_sequence_ranks(S, r)) for r in range(C.top + 1)],
        "splitting": alg.to_doc(S, session.complex_name(C)).model_dump(mode="json"),
    }
    return CommandReport(command="split", session=session.document.name, passed=report.passed, data=data, violations=report.violations)


def _read_splitting(path: str) -> SplittingDoc:
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SessionError("--splitting", f"cannot read {path}: {e}")
    if isinstance(raw, dict) and "data" in raw and "splitting" in raw.get("data", {}):
        raw = raw["data"]["splitting"]
    try:
        return SplittingDoc.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        raise SessionError("--splitting", f"{'.'.join(str(x) for x in first['loc'])}: {first['msg']}")


def cmd_verify(session: Session, args) -> CommandReport:
    if not args.splitting:
        raise SessionError("--splitting", "verify needs a splitting file")
    comb = get_transversality(session.path)
    doc = _read_splitting(args.splitting)
    C = session.complex(doc.complex)
    try:
        S = comb.alg.from_doc(doc, C)
        report = comb.alg.verify_splitting(S)
    except TransversalityError as e:
        report = VerificationReport()
        report.add("complex", f"splitting does not re-read: {e}")
    return CommandReport(command="verify", session=session.document.name, passed=report.passed,
                         data={"complex": doc.complex, "splitting": args.splitting}, violations=report.violations)


def cmd_cw_realize(session: Session, args) -> CommandReport:
    comb = get_transversality(session.path)
    W = session.cw_complex(args.cw)
    domain = comb.cw_realize(W, session.seed(args.seed))
    checks = {part: comb.verify_certificate(W, cert) for part, cert in domain.certificates.items()}
    data = {
        "cw": W.name,
        "subtrees": _subtrees(comb.p, domain.U),
        "certificates": {part: _certificate(comb.p, cert) for part, cert in domain.certificates.items()},
        "certificates_verified": checks,
        "repairs": domain.repairs,
        "fundamental": domain.fundamental,
    }
    return CommandReport(command="cw-realize", session=session.document.name, passed=all(checks.values()), data=data)


def _svk(session: Session, cw: Optional[str], seed: Optional[str], window: int) -> SvKSplitting:
    comb = get_transversality(session.path)
    W = session.cw_complex(cw)
    domain = comb.cw_realize(W, session.seed(seed))
    return comb.build_svk(W, domain, window)


def cmd_cw_split(session: Session, args) -> CommandReport:
    comb = get_transversality(session.path)
    S = _svk(session, args.cw, args.seed, _window(args))
    report = VerificationReport()
    report.extend(S.splitting_report)
    report.extend(S.projection_report)
    data = {
        "cw": S.cw.name,
        "quotient_cells": {part: [list(cells) for cells in dims] for part, dims in S.quotient_cells.items()},
        "euler": S.euler,
        "cylinder_ranks": list(S.cylinder.ranks),
        "ranks": [list(comb.alg.degree_sequence_ranks(S.splitting, r)) for r in range(S.cw.top + 1)],
        "cell_count_identity": comb.cell_count_identity(S.cw, S.domain),
        "fundamental": S.domain.fundamental,
        "verdict": _verdict(S.verdict),
    }
    passed = report.passed and S.verdict.verdict != "not_acyclic"
    return CommandReport(command="cw-split", session=session.document.name, passed=passed, data=data, violations=report.violations)


def _entry(items: Dict[str, Any], name: Optional[str], what: str):
    if not items:
        raise SessionError(f"$.{what}", f"no {what} entries")
    if name is None:
        return next(iter(items.values()))
    if name not in items:
        raise SessionError(f"$.{what}", f"undeclared entry {name!r}")
    return items[name]


def cmd_plus(session: Session, args) -> CommandReport:
    spec = _entry(session.plus, args.name, "plus")
    data_in = session.kernel_data(spec)
    if spec.complex is not None:
        K = session.complexes[spec.complex]
    else:
        K = ChainComplex(GroupRing(data_in.hom.source).tag, (1,), ())
    result = plus_construction(K, data_in, _window(args))
    data = {
        "name": spec.name,
        "kernel": list(result.kernel),
        "source_ranks": list(result.source.ranks),
        "plus_ranks": list(result.plus.ranks),
        "relative_ranks": list(result.relative.ranks),
        "relative_factors": list(result.relative_factors),
        "witnesses_verified": result.witnesses_verified,
        "attaching_cycles": [[list(map(list, entry)) for entry in cycle] for cycle in result.attaching_cycles] if result.attaching_cycles else None,
        "verdict": _verdict(result.verdict),
    }
    return CommandReport(command="plus", session=session.document.name, passed=result.verdict.verdict == "acyclic", data=data)


def cmd_refine(session: Session, args) -> CommandReport:
    spec = _entry(session.refinements, args.name, "refinements")
    comb = get_transversality(session.path)
    S = _svk(session, spec.cw, args.seed, _window(args))
    refined = comb.injective_refine(S, kernel_specs(session, spec), refine_maps(session, spec), _window(args))
    pieces = {
        name: {
            "kernel": list(piece.kernel),
            "plus_ranks": list(piece.plus.ranks),
            "relative_ranks": list(piece.relative.ranks),
            "verdict": _verdict(piece.verdict),
        }
        for name, piece in refined.pieces.items()
    }
    passed = refined.report.passed and refined.verdict.verdict == "acyclic" and all(
        piece.verdict.verdict == "acyclic" for piece in refined.pieces.values()
    )
    data = {"name": spec.name, "pieces": pieces, "ranks": list(refined.complex.ranks), "verdict": _verdict(refined.verdict)}
    return CommandReport(command="refine", session=session.document.name, passed=passed, data=data, violations=refined.report.violations)


def cmd_export_dot(session: Session, args) -> str:
    comb = get_transversality(session.path)
    C = session.complex(args.complex)
    U = comb.alg.realize(C, session.seed(args.seed))
    degree = args.degree if args.degree is not None else 0
    if not 0 <= degree <= U.top:
        raise SessionError("--degree", f"degree {degree} outside 0..{U.top}")
    return comb.tree.export_dot(U[degree], f"U{degree}", config.dot_rankdir)


COMMANDS: Dict[str, Callable] = {
    "realize": cmd_realize,
    "split": cmd_split,
    "verify": cmd_verify,
    "cw-realize": cmd_cw_realize,
    "cw-split": cmd_cw_split,
    "plus": cmd_plus,
    "refine": cmd_refine,
    "export-dot": cmd_export_dot,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="transversality", description="Exact Mayer–Vietoris and Seifert–van Kampen splittings")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--session", required=True, help="session JSON file")
    parser.add_argument("--seed", help="'default' or items vertex:G1:<word>, vertex:G2:<word>, edge:<word>")
    parser.add_argument("--window", type=int, help="truncation window for cone acyclicity")
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--complex", help="complex name (default: first complex over Z[G])")
    parser.add_argument("--cw", help="CW complex name")
    parser.add_argument("--splitting", help="splitting report or document to verify")
    parser.add_argument("--degree", type=int, help="degree of the subtree to export")
    parser.add_argument("--name", help="plus or refinement entry")
    return parser


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.window is not None and args.window < 0:
        logger.error("Window must be nonnegative")
        return EXIT_USAGE
    try:
        session = get_session(args.session)
        result = COMMANDS[args.command](session, args)
    except SessionError as e:
        logger.error(f"Session error: {e}")
        return EXIT_USAGE
    except (CertificateNotFoundError, WitnessError, ContainmentError, RealizationError) as e:
        logger.error(f"{args.command} failed: {e}")
        failure = CommandReport(command=args.command, session=args.session, passed=False, data={"error": str(e)})
        _emit(json.dumps(failure.model_dump(mode="json"), sort_keys=True, indent=2), args.out)
        return EXIT_FAIL
    except TransversalityError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_USAGE

    if isinstance(result, str):
        _emit(result, args.out)
        return EXIT_PASS
    _emit(json.dumps(result.model_dump(mode="json"), sort_keys=True, indent=2), args.out)
    if not result.passed:
        logger.warning(f"{args.command}: {len(result.violations)} violations")
    return EXIT_PASS if result.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(run())

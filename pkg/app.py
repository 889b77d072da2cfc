"""
Co-prime Matrix Toolkit - Command Line
Construct pairwise co-prime integer matrix families, check their divisibility
structure, enumerate fundamental parallelepipeds, solve the matrix CRT and
simulate multi-dimensional undersampling.
"""

import argparse
import logging
import os
import random
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from utils.config import OUTPUT_FORMATS, Settings, load_scene_config, load_settings
from utils.errors import CoprimeToolkitError, InternalMismatchError
from utils.exact_core import determinant
from utils.family_builder import (
    FEASIBLE_KINDS,
    ConstructedMatrix,
    apply_sign_flips,
    commutation_report,
    construct_diagonal_family,
    construct_family,
    generate_feasible_set,
    random_sign_mask,
)
from utils.lattice_fpd import FPD_METHODS, axis_profile, fpd_enumerate, mod_reduce, spread_ratios
from utils.matrix_divisibility import (
    coprimality_sweep,
    gcld,
    is_left_coprime,
    lcrm_family,
    lcrm_pair,
    minors_gcd,
    verify_family_lcrm,
)
from utils.matrix_io import (
    parse_vector_text,
    read_document,
    read_feasible_sets,
    residue_document,
    serialize_family,
)
from utils.md_crt import crt_brute_force, crt_solve
from utils.normal_forms import smith_decompose
from utils.reporting import format_report
from utils.sampling_sim import HarmonicScene, estimate_frequency, run_noise_trials
from utils.svg_render import RenderOptions, render_fpd_panel

logger = logging.getLogger("coprime")

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2


class CommandResult:
    """A report plus the exit status it implies."""

    def __init__(self, report: Dict[str, Any], passed: bool = True):
        self.report = report
        self.passed = passed


def _int_list(text: str) -> List[int]:
    return list(parse_vector_text(text))


def _build_family(dim: int, qs: Sequence[int], kind: str, perms_file: Optional[str], set_name: Optional[str]):
    perms = None
    if kind == "explicit":
        if not perms_file:
            raise CoprimeToolkitError("--kind explicit needs --perms-file")
        entries = read_feasible_sets(perms_file)
        if set_name:
            entries = [entry for entry in entries if entry["name"] == set_name]
        entries = [entry for entry in entries if entry["dim"] == dim]
        if not entries:
            raise CoprimeToolkitError(f"No feasible set for D={dim} in {perms_file}")
        perms = entries[0]["perms"]
    return construct_family(qs, generate_feasible_set(dim, kind, perms))


def _member_rows(members: Sequence[ConstructedMatrix]) -> List[Dict[str, Any]]:
    return [
        {"label": m.label, "q": m.q, "perm": list(m.perm), "det": determinant(m.matrix), "matrix": str(m.matrix.to_rows())}
        for m in members
    ]


def cmd_construct(args: argparse.Namespace, settings: Settings) -> CommandResult:
    family = _build_family(args.dim, args.qs, args.kind, args.perms_file, args.set_name)
    if args.random_signs:
        rng = random.Random(settings.seed)
        family = [apply_sign_flips(member, random_sign_mask(member.dim, rng)) for member in family]

    if args.output:
        Path(args.output).write_bytes(serialize_family(family, args.qs, args.kind))
        logger.info(f"Wrote family file {args.output}")

    return CommandResult({"dim": args.dim, "qs": args.qs, "kind": args.kind, "members": _member_rows(family)})


def cmd_coprime(args: argparse.Namespace, settings: Settings) -> CommandResult:
    m, n = read_document(args.matrices[0]), read_document(args.matrices[1])
    decomposition = smith_decompose(m.hstack(n))
    report = {
        "coprime": is_left_coprime(m, n, cross_check=settings.oracle),
        "smith_diagonal": list(decomposition.diagonal),
        "smith_form": decomposition.S,
    }
    if settings.oracle:
        report["minors_gcd"] = minors_gcd(m, n)
    return CommandResult(report)


def cmd_lcrm(args: argparse.Namespace, settings: Settings) -> CommandResult:
    matrices = [read_document(path) for path in args.matrices]
    report: Dict[str, Any] = {}
    if len(matrices) == 2:
        result = lcrm_pair(*matrices)
        report["raw"] = result.raw
    canonical = lcrm_family(matrices)
    report["lcrm"] = canonical
    report["abs_det"] = abs(determinant(canonical))
    return CommandResult(report)


def cmd_gcld(args: argparse.Namespace, settings: Settings) -> CommandResult:
    m, n = read_document(args.matrices[0]), read_document(args.matrices[1])
    divisor = gcld(m, n)
    return CommandResult({"gcld": divisor, "abs_det": abs(determinant(divisor))})


def cmd_fpd(args: argparse.Namespace, settings: Settings) -> CommandResult:
    moduli = [read_document(path) for path in args.matrices]
    fpds = [fpd_enumerate(modulus, method=args.method) for modulus in moduli]

    if settings.oracle:
        for modulus, fpd in zip(moduli, fpds):
            other = fpd_enumerate(modulus, method="bbox" if args.method == "smith" else "smith")
            if other.points != fpd.points:
                raise InternalMismatchError("Smith and bounding-box enumerations disagree")

    if args.svg:
        options = RenderOptions(scale=args.scale or settings.svg_scale)
        labels = [Path(path).stem for path in args.matrices] if len(fpds) > 1 else None
        Path(args.svg).write_text(render_fpd_panel(fpds, options, labels), encoding="utf-8")
        logger.info(f"Wrote {args.svg}")

    entries = []
    for path, modulus, fpd in zip(args.matrices, moduli, fpds):
        profiles = [axis_profile(modulus, axis, fpd) for axis in range(modulus.rows)]
        entries.append(
            {
                "source": path,
                "abs_det": abs(determinant(modulus)),
                "size": len(fpd),
                "points": [list(p) for p in fpd.points],
                "axis_distinct_counts": [profile.distinct_count for profile in profiles],
            }
        )
    return CommandResult(entries[0] if len(entries) == 1 else {"fpds": entries})


def _read_vector(args: argparse.Namespace) -> Tuple[int, ...]:
    if args.vector:
        return parse_vector_text(args.vector)
    if args.vector_file:
        return read_document(args.vector_file, "vector")
    raise CoprimeToolkitError("Give --vector or --vector-file")


def cmd_reduce(args: argparse.Namespace, settings: Settings) -> CommandResult:
    modulus = read_document(args.modulus)
    n, residue = mod_reduce(_read_vector(args), modulus)
    return CommandResult({"n": list(n), "r": list(residue.r), "residue": residue_document(residue)})


def cmd_crt(args: argparse.Namespace, settings: Settings) -> CommandResult:
    residues = [read_document(path, "residue") for path in args.residues]
    solution = crt_solve(residues)
    report = {"solution": list(solution.r), "lcrm": solution.modulus, "dynamic_range": abs(determinant(solution.modulus))}
    passed = True
    if settings.oracle:
        brute = crt_brute_force(residues, solution.modulus)
        report["brute_force"] = list(brute) if brute is not None else None
        passed = brute == solution.r
    return CommandResult(report, passed)


def _scene_family(config) -> List[ConstructedMatrix]:
    perms = config.perms if config.kind == "explicit" else None
    return construct_family(config.qs, generate_feasible_set(config.dim, config.kind, perms))


def cmd_simulate(args: argparse.Namespace, settings: Settings) -> CommandResult:
    config = load_scene_config(args.scene)
    seed = settings.seed if settings.seed is not None else config.seed
    scene = HarmonicScene(config.amplitude, config.frequency, config.noise_sigma, seed)
    estimate = estimate_frequency(
        scene,
        _scene_family(config),
        threshold_ratio=settings.threshold_ratio,
        known_amplitude=args.known_amplitude,
    )
    report = estimate.to_dict()
    report["frequency"] = list(scene.frequency)
    report["recovered"] = estimate.f_hat == scene.frequency
    # noiseless in-range scenes must be recovered exactly
    passed = report["recovered"] or scene.noise_sigma > 0 or not estimate.in_range
    return CommandResult(report, passed)


def cmd_noise(args: argparse.Namespace, settings: Settings) -> CommandResult:
    config = load_scene_config(args.scene)
    seed = settings.seed if settings.seed is not None else config.seed
    scene = HarmonicScene(config.amplitude, config.frequency, config.noise_sigma, seed)
    trials = args.trials if args.trials is not None else max(config.trials, 1)
    frame, summary = run_noise_trials(scene, _scene_family(config), trials, noise_sigma=args.sigma)
    if args.csv:
        frame.to_csv(args.csv, index=False)
        logger.info(f"Wrote per-trial results to {args.csv}")
    report: Dict[str, Any] = {"summary": summary}
    if args.show_trials:
        report["trials"] = frame
    return CommandResult(report)


def cmd_verify_family(args: argparse.Namespace, settings: Settings) -> CommandResult:
    family_doc = read_document(args.family, "family")
    members = list(family_doc.members)

    coprimality = coprimality_sweep(members, oracle=settings.oracle)
    determinant_failures = [m.label for m in members if abs(determinant(m.matrix)) != m.q ** m.dim]
    commutation = commutation_report(members)
    lcrm_report = verify_family_lcrm(members, check_minimality=not args.skip_minimality)

    checks = {
        "pairwise_coprime": coprimality.passed,
        "determinants": not determinant_failures,
        "commutation": commutation.passed,
        **lcrm_report.checks,
    }
    report = {
        "dim": family_doc.dim,
        "qs": list(lcrm_report.qs),
        "checks": checks,
        "coprime_failures": [f"{a} / {b}" for a, b in coprimality.failures],
        "determinant_failures": determinant_failures,
        "non_commuting_witness": list(commutation.witness) if commutation.witness else None,
        "lcrm": lcrm_report.lcrm,
        "dynamic_range": lcrm_report.dynamic_range,
    }
    return CommandResult(report, all(checks.values()))


def cmd_spread(args: argparse.Namespace, settings: Settings) -> CommandResult:
    ratios = spread_ratios(read_document(args.matrix))
    return CommandResult({"peak_over_mean": ratios.peak_over_mean, "peak_over_min_nonzero": ratios.peak_over_min_nonzero})


def _profile_rows(members: Sequence[ConstructedMatrix], kind: str) -> List[Dict[str, Any]]:
    rows = []
    for member in members:
        fpd = fpd_enumerate(member.matrix)
        counts = [axis_profile(member.matrix, axis, fpd).distinct_count for axis in range(member.dim)]
        ratios = spread_ratios(member.matrix)
        rows.append(
            {
                "family": kind,
                "label": member.label,
                "det": determinant(member.matrix),
                "max_axis_distinct": max(counts),
                "peak_over_mean": str(ratios.peak_over_mean),
                "peak_over_min_nonzero": str(ratios.peak_over_min_nonzero),
            }
        )
    return rows


def cmd_compare(args: argparse.Namespace, settings: Settings) -> CommandResult:
    nonseparable = construct_family(args.qs, generate_feasible_set(args.dim, "cyclic"))
    separable = construct_diagonal_family(args.qs, args.dim)
    report = {
        "dim": args.dim,
        "qs": args.qs,
        "members": _profile_rows(nonseparable, "nonseparable") + _profile_rows(separable, "separable"),
        "dynamic_range": {
            "nonseparable": abs(determinant(lcrm_family([m.matrix for m in nonseparable]))),
            "separable": abs(determinant(lcrm_family([m.matrix for m in separable]))),
        },
    }
    return CommandResult(report)


COMMANDS: Dict[str, Callable[[argparse.Namespace, Settings], CommandResult]] = {
    "construct": cmd_construct,
    "coprime": cmd_coprime,
    "lcrm": cmd_lcrm,
    "gcld": cmd_gcld,
    "fpd": cmd_fpd,
    "reduce": cmd_reduce,
    "crt": cmd_crt,
    "simulate": cmd_simulate,
    "noise": cmd_noise,
    "verify-family": cmd_verify_family,
    "spread": cmd_spread,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coprime", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (overrides COPRIME_SEED and scene seeds)")
    parser.add_argument("--format", choices=OUTPUT_FORMATS, default=None, help="Report format")
    parser.add_argument("--oracle", action="store_true", help="Enable brute-force cross-checks")
    parser.add_argument("--log-level", default=None, help="Logging level (overrides COPRIME_LOG_LEVEL)")
    parser.add_argument("--env-file", default=None, help="Load settings from this .env file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="Build a pairwise co-prime family")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--qs", type=_int_list, required=True, help="Comma-separated, e.g. 2,3")
    p.add_argument("--kind", choices=FEASIBLE_KINDS, default="cyclic")
    p.add_argument("--perms-file", help="JSON list of named feasible sets for --kind explicit")
    p.add_argument("--set-name", help="Entry of --perms-file to use")
    p.add_argument("--random-signs", action="store_true", help="Apply a random sign mask to every member")
    p.add_argument("--output", "-o", help="Write the family file here")

    for name, help_text in (("coprime", "Left coprimality test"), ("gcld", "Greatest common left divisor")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("matrices", nargs=2)

    p = sub.add_parser("lcrm", help="Canonical least common right multiple")
    p.add_argument("matrices", nargs="+")

    p = sub.add_parser("fpd", help="Enumerate (and optionally draw) FPDs")
    p.add_argument("matrices", nargs="+")
    p.add_argument("--method", choices=FPD_METHODS, default="smith")
    p.add_argument("--svg", help="Write an SVG drawing (2-D only)")
    p.add_argument("--scale", type=int, default=None, help="Pixels per lattice unit")

    p = sub.add_parser("reduce", help="Division with remainder modulo a matrix")
    p.add_argument("modulus")
    p.add_argument("--vector", help="Inline vector, e.g. 5,7")
    p.add_argument("--vector-file")

    p = sub.add_parser("crt", help="Solve the matrix CRT from residue files")
    p.add_argument("residues", nargs="+")

    for name, help_text in (("simulate", "Estimate a frequency end to end"), ("noise", "Monte Carlo noise trials")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("scene", help="YAML or JSON scenario file")
        if name == "simulate":
            p.add_argument("--known-amplitude", action="store_true", help="Gate peaks on the detection threshold")
        else:
            p.add_argument("--trials", type=int, default=None)
            p.add_argument("--sigma", type=float, default=None, help="Override the scene noise level")
            p.add_argument("--csv", help="Write per-trial rows as CSV")
            p.add_argument("--show-trials", action="store_true")

    p = sub.add_parser("verify-family", help="Check coprimality, determinants and the lcrm of a family file")
    p.add_argument("family")
    p.add_argument("--skip-minimality", action="store_true")

    p = sub.add_parser("spread", help="Entry spread ratios of a matrix")
    p.add_argument("matrix")

    p = sub.add_parser("compare", help="Non-separable versus separable family")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--qs", type=_int_list, required=True)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main application function."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    try:
        settings = load_settings(args.env_file)
    except CoprimeToolkitError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code

    level = (args.log_level or settings.log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")

    settings = Settings(
        log_level=level,
        seed=args.seed if args.seed is not None else settings.seed,
        output_format=args.format or settings.output_format,
        oracle=args.oracle or settings.oracle,
        threshold_ratio=settings.threshold_ratio,
        svg_scale=settings.svg_scale,
    )

    try:
        result = COMMANDS[args.command](args, settings)
    except CoprimeToolkitError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code

    print(format_report(result.report, settings.output_format))
    if not result.passed:
        logger.warning(f"{args.command}: verification failed")
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end.

One pipeline per invocation: parse the model file, run the requested
stage, print (or write) a canonical JSON report, and exit with 0 on
Yes/success, 1 on No, 2 on Inconclusive or an unstabilized result, and
3 or more on errors.  Reports embed the engine configuration and seed
so a report can be reproduced from its own header.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import __version__
from . import holonomy as holonomy_mod
from .config import EngineConfig
from .connection import (
    GlValuedForm,
    curvature_direct,
    curvature_global_basis,
    flatten,
    iota_gl,
    modified_curvature,
    vertical_connection,
)
from .decide import (
    INCONCLUSIVE,
    NO,
    YES,
    Verdict,
    one_dim_criterion,
    principal_structure_exists,
    tg_metric_exists,
)
from .distribution import Flag, classify_point, compute_flag
from .errors import HKError, NotStabilized, OracleUnavailable, StepTooCoarse
from .modelfile import LoadedModel, load_model, write_report
from .selector import Selector, build_selector, verify_selector

EXIT_YES = 0
EXIT_NO = 1
EXIT_INCONCLUSIVE = 2
EXIT_ERROR = 3
EXIT_UNEXPECTED = 4


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hk",
        description=(
            "Exact horizontal-holonomy toolkit: flags, selectors, modified "
            "curvature, holonomy spans, and foliation decision procedures."
        ),
    )
    parser.add_argument("--version", action="version", version=f"hk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("file", help="model file (.toml chart or .json algebra)")
        p.add_argument("--seed", type=int, default=None, help="override RNG seed")
        p.add_argument(
            "--depth", type=int, default=None, help="holonomy word depth bound"
        )
        p.add_argument(
            "--out", default=None, help="write the JSON report to this path"
        )

    common(sub.add_parser("flag", help="growth vector and regularity report"))
    common(sub.add_parser("selector", help="build and verify a selector"))
    common(sub.add_parser("curvature", help="curvature, twisted curvature, flatten"))
    hol = sub.add_parser("holonomy", help="holonomy span at the base point")
    common(hol)
    hol.add_argument(
        "--oracle",
        action="store_true",
        help="cross-check the span dimension by numeric loop transport",
    )
    dec = sub.add_parser("decide", help="run a decision procedure")
    dec.add_argument("mode", choices=("tg", "principal", "onedim"))
    common(dec)
    return parser


def _effective_config(loaded: LoadedModel, args) -> EngineConfig:
    config = loaded.config
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if getattr(args, "depth", None) is not None:
        config = replace(config, depth_bound=args.depth)
    return config


def _model_header(loaded: LoadedModel, config: EngineConfig) -> dict:
    model = loaded.model
    return {
        "file": loaded.path,
        "backend": loaded.backend,
        "config": config.to_jsonable(),
        "model": {
            "dimension": model.n,
            "coordinates": list(model.coords),
            "D": [i + 1 for i in model.D_indices],
            "V": [i + 1 for i in model.V_indices],
            "base_point": list(model.base_point),
        },
    }


def _flag_report(flag: Flag, loaded: LoadedModel, config: EngineConfig) -> dict:
    report = _model_header(loaded, config)
    adapted = (
        [i + 1 for i in flag.adapted_order] if flag.adapted_order is not None else None
    )
    point_class = classify_point(
        loaded.model,
        loaded.model.base_point,
        samples=config.sample_count,
        seed=config.seed,
    )
    report.update(
        {
            "command": "flag",
            "growth_vector": list(flag.growth_vector),
            "step": flag.step,
            "bracket_generating": flag.bracket_generating,
            "equiregular": flag.equiregular,
            "adapted_frame": adapted,
            "base_point_class": point_class.name,
            "evidence": flag.evidence,
        }
    )
    return report


def _selector_jsonable(selector: Selector) -> dict:
    columns = {}
    for m, column in sorted(selector.columns.items()):
        entries = [
            {"pair": [a + 1, b + 1], "coefficient": str(poly)}
            for (a, b), poly in sorted(column.coeffs.items())
        ]
        columns[str(m + 1)] = entries
    return columns


def _gl_form_jsonable(form: GlValuedForm) -> list:
    out = []
    for idx in sorted(form.coeffs.keys()):
        mat = form.coeffs[idx]
        entries = [
            [r + 1, c + 1, str(poly)]
            for (r, c), poly in sorted(mat.entries.items())
        ]
        out.append({"args": [a + 1 for a in idx], "entries": entries})
    return out


def _verdict_jsonable(verdict: Verdict, config: EngineConfig) -> dict:
    return {
        "kind": verdict.kind,
        "certificate": verdict.certificate,
        "witness": verdict.witness,
        "assumptions": verdict.assumptions,
        "details": verdict.details,
        "seeds": {"seed": config.seed},
        "budgets": {
            "pd_restart_budget": config.pd_restart_budget,
            "depth_bound": config.depth_bound,
            "stability_margin": config.stability_margin,
        },
    }


def _verdict_exit(verdict: Verdict) -> int:
    if verdict.kind == YES:
        return EXIT_YES
    if verdict.kind == NO:
        return EXIT_NO
    return EXIT_INCONCLUSIVE


def _run(args) -> int:
    loaded = load_model(args.file)
    config = _effective_config(loaded, args)
    model = loaded.model
    flag = compute_flag(
        model,
        seed=config.seed,
        sample_count=config.sample_count,
        max_step=config.max_flag_step,
    )

    if args.command == "flag":
        report = _flag_report(flag, loaded, config)
        sys.stdout.write(write_report(report, args.out))
        return EXIT_YES

    selector = build_selector(flag)
    if args.command == "selector":
        verification = verify_selector(selector)
        report = _model_header(loaded, config)
        report.update(
            {
                "command": "selector",
                "columns": _selector_jsonable(selector),
                "verification": verification,
            }
        )
        sys.stdout.write(write_report(report, args.out))
        return EXIT_YES if verification["ok"] else EXIT_ERROR

    conn = vertical_connection(model)
    if args.command == "curvature":
        direct = curvature_direct(conn)
        global_route, _ = curvature_global_basis(model)
        twisted = modified_curvature(conn, selector)
        shifted, alpha = flatten(conn, selector)
        residual = iota_gl(selector, curvature_direct(shifted))
        report = _model_header(loaded, config)
        report.update(
            {
                "command": "curvature",
                "curvature": _gl_form_jsonable(direct),
                "curvature_global_basis_equal": direct == global_route,
                "twisted_curvature": _gl_form_jsonable(twisted),
                "flatten_correction": _gl_form_jsonable(alpha),
                "flattened_contraction_zero": residual.is_zero(),
            }
        )
        sys.stdout.write(write_report(report, args.out))
        return EXIT_YES

    algebra = holonomy_mod.ozeki_algebra(
        conn,
        selector,
        depth_bound=config.depth_bound,
        stability_margin=config.stability_margin,
    )
    if args.command == "holonomy":
        report = _model_header(loaded, config)
        report.update(
            {
                "command": "holonomy",
                "dimension": algebra.dim,
                "stabilized": algebra.stabilized,
                "reason": algebra.reason,
                "depth_used": algebra.depth_used,
                "rank_history": algebra.rank_history,
                "words_kept": algebra.words_kept,
                "basis": algebra.basis,
            }
        )
        if args.oracle:
            report["oracle"] = _oracle_section(conn, selector, algebra, config)
        sys.stdout.write(write_report(report, args.out))
        return EXIT_YES if algebra.stabilized else EXIT_INCONCLUSIVE

    # decide
    if args.mode == "tg":
        verdict = tg_metric_exists(
            algebra,
            budget=config.pd_restart_budget,
            seed=config.seed,
            bracket_generating=flag.bracket_generating,
        )
    elif args.mode == "principal":
        verdict = principal_structure_exists(algebra)
    else:
        if len(model.V_indices) != 1:
            raise HKError(
                "the one-dimensional criterion needs exactly one complement "
                f"direction, model has {len(model.V_indices)}"
            )
        m = model.V_indices[0]
        tau = model.coframe_form(m)
        z_field = model.frame_field(m)
        obstruction, verdict = one_dim_criterion(model, tau, z_field, selector)
        verdict.details["obstruction"] = {
            str(tuple(a + 1 for a in idx)): str(poly)
            for idx, poly in sorted(obstruction.coeffs.items())
        }
    report = _model_header(loaded, config)
    report.update(
        {
            "command": "decide",
            "mode": args.mode,
            "holonomy_dimension": algebra.dim,
            "holonomy_stabilized": algebra.stabilized,
            "verdict": _verdict_jsonable(verdict, config),
        }
    )
    sys.stdout.write(write_report(report, args.out))
    return _verdict_exit(verdict)


def _oracle_section(conn, selector, algebra, config: EngineConfig) -> dict:
    try:
        shifted, _ = flatten(conn, selector)
        result = holonomy_mod.numeric_transport_oracle(
            shifted,
            eps=config.oracle_eps,
            steps=config.oracle_steps_per_loop,
            seed=config.seed,
        )
    except (OracleUnavailable, StepTooCoarse) as exc:
        return {"available": False, "error": str(exc)}
    return {
        "available": True,
        "eps": result.eps,
        "steps_per_loop": result.steps_per_loop,
        "loops": [[a + 1, b + 1] for (a, b) in result.loops],
        "rank": result.rank,
        "matches_symbolic_dimension": result.rank == algebra.dim,
    }


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _run(args)
    except NotStabilized as exc:
        sys.stderr.write(f"hk: {type(exc).__module__}.{type(exc).__name__}: {exc}\n")
        return EXIT_INCONCLUSIVE
    except HKError as exc:
        sys.stderr.write(f"hk: {type(exc).__module__}.{type(exc).__name__}: {exc}\n")
        return EXIT_ERROR
    except Exception as exc:  # pragma: no cover - defensive
        sys.stderr.write(f"hk: {type(exc).__module__}.{type(exc).__name__}: {exc}\n")
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())

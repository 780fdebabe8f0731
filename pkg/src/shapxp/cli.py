"""Command-line surface tying the attribution and explanation machinery
together.

Subcommands: validate, relevancy, axp, cxp, enumerate, shap, compare.
Exit codes: 0 on success, 2 on validation errors (bad files, bad flags,
out-of-domain instances), 3 on computation errors (size guards, numeric
requirements, failed preconditions).
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from fractions import Fraction

from . import cgt as cgt_mod
from .errors import DomainError, ShapxpError, ValidationError
from .explanations import (
    MODEL_AWARE,
    ModelAgnostic,
    agnostic_support,
    axps_from_cxps,
    enumerate_cxps,
    extract_axp,
    extract_cxp,
    relevant_features,
)
from .games import (
    EXPECTED_VALUE,
    WAXP_BASED,
    check_compliance,
    expected_game,
    shapley_exact,
    waxp_game,
)
from .models import BoxPiecewiseModel, make_instance, space_size
from .modelio import (
    RunReport,
    format_value,
    load_model,
    load_sample,
    parse_rational,
    parse_value,
    rational_str,
)
from .ranking import compare_scores, rank_features, summarize_comparisons
from .similarity import ExplanationProblem, SimilarityConfig

SIGMA_COMMANDS = {"relevancy", "axp", "cxp", "enumerate", "compare"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shapxp",
        description="Feature attribution scores and formal explanations for small models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_instance=True):
        p.add_argument("--model", required=True, help="JSON model file")
        if with_instance:
            p.add_argument("--instance", action="append", default=None,
                           help="comma-separated feature values of the target point")
            p.add_argument("--delta", default=None,
                           help="output tolerance for threshold similarity (rational)")
            p.add_argument("--agnostic", action="store_true",
                           help="quantify over a sample instead of the feature space")
        p.add_argument("--sample", default=None, help="delimiter-separated sample file")
        p.add_argument("--output", choices=("table", "json"), default="table")
        p.add_argument("--with-timing", action="store_true",
                       help="include timing in JSON output (breaks byte-stability)")

    common(sub.add_parser("validate", help="check a model (and optional sample) file"),
           with_instance=False)
    common(sub.add_parser("relevancy", help="features occurring in some explanation"))
    common(p_axp := sub.add_parser("axp", help="one minimal abductive explanation"))
    common(p_cxp := sub.add_parser("cxp", help="one minimal contrastive explanation"))
    for p in (p_axp, p_cxp):
        p.add_argument("--from", dest="seed_features", default=None,
                       help="comma-separated feature ids to shrink (default: all)")
    p_enum = sub.add_parser("enumerate", help="all minimal explanations of one kind")
    common(p_enum)
    p_enum.add_argument("--kind", choices=("axp", "cxp"), required=True)
    p_shap = sub.add_parser("shap", help="per-feature attribution scores")
    common(p_shap)
    p_shap.add_argument("--game", choices=(EXPECTED_VALUE, WAXP_BASED), required=True)
    p_shap.add_argument("--method", choices=("exact", "cgt"), default="exact")
    p_shap.add_argument("--epsilon", default="1/20", help="cgt additive error bound")
    p_shap.add_argument("--alpha", default="1/20", help="cgt failure probability")
    p_shap.add_argument("--seed", type=int, default=0, help="cgt RNG seed")
    p_cmp = sub.add_parser("compare",
                           help="rank-overlap of expected-value vs sufficiency scores")
    common(p_cmp)
    p_cmp.add_argument("--persistence", default="1/2", help="top-weighting parameter in (0,1)")
    p_cmp.add_argument("--depth", type=int, default=5, help="evaluation depth")
    p_cmp.add_argument("--abs", action="store_true",
                       help="table output shows only the absolute-value variant")
    return parser


def run_cli(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = _dispatch(args)
    except (ValidationError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ShapxpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    if args.output == "json":
        sys.stdout.write(report.to_json(include_timing=args.with_timing))
    else:
        _print_table(report)
    return 0


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def _dispatch(args) -> RunReport:
    started = time.perf_counter()
    model = load_model(args.model)
    model_info = {
        "path": str(args.model),
        "kind": type(model).__name__,
        "value_kind": model.value_kind,
        "m": model.space.m,
        "features": [f.name for f in model.space.features],
    }
    if args.command == "validate":
        results = {"ok": True}
        if model.space.all_discrete():
            results["points"] = space_size(model.space)
        else:
            results["cells"] = len(model.cells)
        if args.sample:
            results["sample_rows"] = len(load_sample(args.sample, model))
        return _finish(RunReport("validate", model_info, None, None, None, results),
                       started)

    instances = _parse_instances(args, model)
    similarity = _similarity_for(args, model)
    universe, universe_info = _universe_for(args, model)

    if args.command == "compare":
        return _finish(_run_compare(args, model, model_info, instances, similarity,
                                    universe, universe_info), started)

    if len(instances) != 1:
        raise ValidationError(f"'{args.command}' takes exactly one --instance")
    problem = ExplanationProblem(model, instances[0], similarity)
    instance_info = {
        "point": [format_value(x) for x in problem.instance.point],
        "prediction": format_value(problem.instance.prediction),
    }
    sim_info = {"mode": similarity.mode}
    if similarity.delta is not None:
        sim_info["delta"] = rational_str(similarity.delta)

    if args.command == "relevancy":
        relevant = relevant_features(problem, universe)
        results = {
            "relevant": list(relevant),
            "per_feature": [{"feature": i, "relevant": i in relevant}
                            for i in problem.feature_ids],
        }
    elif args.command in ("axp", "cxp"):
        seed = _parse_feature_ids(args.seed_features, model) \
            if args.seed_features else None
        if args.command == "axp":
            found = extract_axp(problem, seed, universe)
        else:
            found = extract_cxp(problem, seed, universe)
        results = {args.command: list(found)}
        if isinstance(universe, ModelAgnostic) and args.command == "axp":
            support = agnostic_support(problem, universe.sample, found)
            results["sample_support"] = support
            results["vacuous"] = support == 0
    elif args.command == "enumerate":
        cxps = enumerate_cxps(problem, universe)
        sets = axps_from_cxps(cxps) if args.kind == "axp" else cxps
        results = {"kind": args.kind, "sets": [list(s) for s in sets]}
    elif args.command == "shap":
        results, diagnostics = _run_shap(args, problem, universe)
        report = RunReport("shap", model_info, instance_info, sim_info,
                           universe_info, results, diagnostics)
        return _finish(report, started)
    else:  # pragma: no cover - argparse restricts the choices
        raise ValidationError(f"unknown subcommand {args.command!r}")

    return _finish(RunReport(args.command, model_info, instance_info, sim_info,
                             universe_info, results), started)


def _run_shap(args, problem, universe):
    if args.game == EXPECTED_VALUE:
        game = expected_game(problem)
    else:
        game = waxp_game(problem, universe)
    diagnostics = None
    compliance = None
    if args.method == "exact":
        vector = shapley_exact(game)
        # Zero-vs-nonzero compliance is only meaningful for exact scores,
        # and needs a usable similarity predicate (delta on box models).
        if not (isinstance(problem.model, BoxPiecewiseModel)
                and problem.similarity.delta is None):
            report = check_compliance(problem, vector, universe)
            compliance = {
                "violations": list(report.violations),
                "compliant": report.compliant,
                "per_feature": [
                    {"feature": e.feature, "relevant": e.relevant,
                     "score": rational_str(e.score), "misleading": e.misleading}
                    for e in report.entries
                ],
            }
    else:
        config = cgt_mod.CgtConfig(
            epsilon=parse_rational(args.epsilon, "--epsilon"),
            alpha=parse_rational(args.alpha, "--alpha"),
            seed=args.seed,
            workers=_default_workers(),
        )
        vector, diag = cgt_mod.cgt_estimate(game, config)
        diagnostics = {
            "permutations": diag.permutations,
            "marginal_bound": rational_str(diag.marginal_bound),
            "epsilon": rational_str(diag.epsilon),
            "alpha": rational_str(diag.alpha),
            "seed": diag.seed,
        }
    names = [f.name for f in problem.model.space.features]
    results = {
        "game": vector.game,
        "method": vector.method,
        "scores": [
            {"feature": i, "name": names[i - 1], "score": rational_str(vector.score(i))}
            for i in problem.feature_ids
        ],
        "sum": rational_str(vector.total()),
        "ranking_signed": list(rank_features(vector, "signed").order),
        "ranking_absolute": list(rank_features(vector, "absolute").order),
    }
    if compliance is not None:
        results["compliance"] = compliance
    return results, diagnostics


def _run_compare(args, model, model_info, instances, similarity,
                 universe, universe_info) -> RunReport:
    persistence = parse_rational(args.persistence, "--persistence")
    reports = []
    per_instance = []
    for instance in instances:
        problem = ExplanationProblem(model, instance, similarity)
        vectors = {
            "expected:exact": shapley_exact(expected_game(problem)),
            "waxp:exact": shapley_exact(waxp_game(problem, universe)),
        }
        comparison = compare_scores(vectors, persistence, args.depth)
        reports.append(comparison)
        per_instance.append({
            "point": [format_value(x) for x in instance.point],
            "prediction": format_value(instance.prediction),
            "scores": {name: [rational_str(s) for s in vec.scores]
                       for name, vec in vectors.items()},
            "rankings": {name: {mode: list(order) for mode, order in modes.items()}
                         for name, modes in comparison.rankings.items()},
            "rbo": [
                {"a": pair.method_a, "b": pair.method_b,
                 "signed": rational_str(pair.signed),
                 "absolute": rational_str(pair.absolute)}
                for pair in comparison.pairs
            ],
        })
    summary = summarize_comparisons(reports)
    sim_info = {"mode": similarity.mode}
    if similarity.delta is not None:
        sim_info["delta"] = rational_str(similarity.delta)
    results = {
        "persistence": rational_str(persistence),
        "depth": args.depth,
        "max_rbo": rational_str(1 - Fraction(persistence) ** args.depth),
        "instances": per_instance,
        "summary": [
            {"a": row.method_a, "b": row.method_b, "mode": row.mode,
             "min": rational_str(row.minimum), "max": rational_str(row.maximum),
             "mean": rational_str(row.mean)}
            for row in summary
        ],
        "absolute_only": bool(args.abs),
    }
    return RunReport("compare", model_info, None, sim_info, universe_info, results)


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------

def _parse_instances(args, model):
    if not args.instance:
        raise ValidationError(f"'{args.command}' needs --instance")
    instances = []
    for text in args.instance:
        tokens = [t.strip() for t in text.split(",")]
        if len(tokens) != model.space.m:
            raise ValidationError(
                f"--instance {text!r}: expected {model.space.m} values")
        point = tuple(parse_value(t, "--instance") for t in tokens)
        instances.append(make_instance(model, point))
    return instances


def _similarity_for(args, model) -> SimilarityConfig:
    if args.delta is not None:
        return SimilarityConfig.threshold(parse_rational(args.delta, "--delta"))
    needs_sigma = args.command in SIGMA_COMMANDS or (
        args.command == "shap" and args.game == WAXP_BASED)
    if needs_sigma and isinstance(model, BoxPiecewiseModel):
        raise ValidationError(
            "regression problems over interval domains need --delta")
    return SimilarityConfig.class_equality()


def _universe_for(args, model):
    if not getattr(args, "agnostic", False):
        return MODEL_AWARE, {"kind": "model_aware"}
    if not args.sample:
        raise ValidationError("--agnostic needs --sample")
    sample = load_sample(args.sample, model)
    info = {"kind": "model_agnostic", "sample": str(args.sample), "rows": len(sample)}
    return ModelAgnostic(sample), info


def _parse_feature_ids(text, model):
    ids = []
    for token in text.split(","):
        token = token.strip()
        if not token.isdigit() or int(token) not in model.space.ids:
            raise ValidationError(f"--from: {token!r} is not a feature id")
        ids.append(int(token))
    return ids


def _default_workers() -> int:
    raw = os.environ.get("SHAPXP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _finish(report: RunReport, started: float) -> RunReport:
    from dataclasses import replace
    return replace(report, timing_ms=round((time.perf_counter() - started) * 1000.0, 3))


# ---------------------------------------------------------------------------
# Table rendering
# ---------------------------------------------------------------------------

def _decimal(text: str) -> str:
    return f"{float(Fraction(text)):.6f}"


def _print_table(report: RunReport) -> None:
    out = sys.stdout
    res = report.results
    print(f"model: {report.model['path']} "
          f"({report.model['kind']}, {report.model['value_kind']}, "
          f"m={report.model['m']})", file=out)
    if report.instance:
        point = ",".join(str(x) for x in report.instance["point"])
        print(f"instance: ({point}) -> {report.instance['prediction']}", file=out)
    if report.universe and report.universe["kind"] == "model_agnostic":
        print(f"universe: sample {report.universe['sample']} "
              f"({report.universe['rows']} rows)", file=out)
    if report.command == "validate":
        size = res.get("points", res.get("cells"))
        unit = "points" if "points" in res else "cells"
        print(f"ok: model valid ({size} {unit})", file=out)
        if "sample_rows" in res:
            print(f"ok: sample valid ({res['sample_rows']} rows)", file=out)
    elif report.command == "relevancy":
        for row in res["per_feature"]:
            mark = "relevant" if row["relevant"] else "irrelevant"
            print(f"  feature {row['feature']}: {mark}", file=out)
        print(f"relevant set: {set(res['relevant']) or '{}'}", file=out)
    elif report.command in ("axp", "cxp"):
        label = "abductive" if report.command == "axp" else "contrastive"
        print(f"{label} explanation: {set(res[report.command])}", file=out)
        if res.get("vacuous"):
            print("warning: no sample row matches the fixed features; the check "
                  "is vacuous", file=out)
    elif report.command == "enumerate":
        print(f"minimal {res['kind']} sets ({len(res['sets'])}):", file=out)
        for s in res["sets"]:
            print(f"  {set(s)}", file=out)
    elif report.command == "shap":
        print(f"game: {res['game']}   method: {res['method']}", file=out)
        print("feature  name        score         (exact)", file=out)
        for row in res["scores"]:
            print(f"{row['feature']:>7}  {row['name']:<10}  "
                  f"{_decimal(row['score']):>12}  {row['score']}", file=out)
        print(f"sum: {_decimal(res['sum'])} ({res['sum']})", file=out)
        print(f"ranking (signed):   {res['ranking_signed']}", file=out)
        print(f"ranking (absolute): {res['ranking_absolute']}", file=out)
        if "compliance" in res:
            comp = res["compliance"]
            if comp["compliant"]:
                print("compliance: scores are zero exactly on irrelevant features",
                      file=out)
            else:
                print(f"compliance: MISLEADING on features {comp['violations']}",
                      file=out)
        if report.diagnostics:
            d = report.diagnostics
            print(f"cgt: {d['permutations']} permutations, bound {d['marginal_bound']}, "
                  f"epsilon {d['epsilon']}, alpha {d['alpha']}, seed {d['seed']}", file=out)
    elif report.command == "compare":
        print(f"persistence {res['persistence']}, depth {res['depth']}, "
              f"max attainable rbo {_decimal(res['max_rbo'])}", file=out)
        modes = ("absolute",) if res["absolute_only"] else ("signed", "absolute")
        for entry in res["instances"]:
            point = ",".join(str(x) for x in entry["point"])
            print(f"instance ({point}):", file=out)
            for name, ranking in entry["rankings"].items():
                print(f"  {name:<16} signed {ranking['signed']}  "
                      f"absolute {ranking['absolute']}", file=out)
            for pair in entry["rbo"]:
                for mode in modes:
                    print(f"  rbo[{mode}] {pair['a']} vs {pair['b']}: "
                          f"{_decimal(pair[mode])} ({pair[mode]})", file=out)
        print("summary over batch:", file=out)
        for row in res["summary"]:
            if row["mode"] in modes:
                print(f"  {row['a']} vs {row['b']} [{row['mode']}]: "
                      f"min {_decimal(row['min'])}  max {_decimal(row['max'])}  "
                      f"mean {_decimal(row['mean'])}", file=out)
    if report.timing_ms is not None:
        print(f"time: {report.timing_ms:.1f} ms", file=out)

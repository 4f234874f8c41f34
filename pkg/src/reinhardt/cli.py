"""Command-line interface.

Exit codes::

    0  success (classify: the domain is a member)
    1  input or validation error (a JSON error record is printed)
    2  a verification harness reported a failure
    3  classify: the domain is not a member
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, List, Optional, Sequence

import jsonschema
import numpy as np

from . import coeureloeb, stehle
from .autgroup import affine_from_json, classify_aut_structure, noncompactness_witness, preservation_report
from .convexlog import (
    HyperbolicModel,
    LogDomainModel,
    Model4,
    Model5,
    Model6,
    ParabolicModel,
    axis_count,
    is_hyperbolic_domain,
    model_from_json,
)
from .errors import ReinhardtError, SchemaError
from .serreclass import CaseLabel, classify_serre

DEFAULT_SEED = 0xC0EFFEE
EXIT_OK, EXIT_ERROR, EXIT_CHECK_FAILED, EXIT_NON_MEMBER = 0, 1, 2, 3

EXHAUSTIONS = ("U4", "U5", "U5Literal", "U6", "UParabolic", "NegSquare")
FUNCTIONS = EXHAUSTIONS + ("UTilde6", "RhoUTilde6")


@dataclass
class RunConfig:
    command: str
    input: Optional[str]
    seed: int
    entry_bound: int
    samples: int
    fmt: str
    output: Optional[str]


# ---------------------------------------------------------------------------
# io helpers


def _schema(name: str) -> dict:
    return json.loads(resources.files("reinhardt").joinpath("schemas", f"{name}.schema.json").read_text())


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("reinhardt").joinpath("data", f"{name}.json")))


def bundled_names() -> List[str]:
    return sorted(p.name[:-5] for p in resources.files("reinhardt").joinpath("data").iterdir() if p.name.endswith(".json"))


def read_json(path: str, schema: Optional[str] = None) -> Any:
    p = Path(path)
    if not p.exists() and (path.startswith("bundled:") or bundled_path(path.removeprefix("bundled:")).exists()):
        p = bundled_path(path.removeprefix("bundled:"))
    try:
        data = json.loads(p.read_text())
    except FileNotFoundError as exc:
        raise SchemaError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON in {path}: {exc}") from exc
    if schema is not None:
        try:
            jsonschema.validate(data, _schema(schema))
        except jsonschema.ValidationError as exc:
            raise SchemaError(f"{path} does not match the {schema} schema: {exc.message}") from exc
    return data


def load_model(path: str) -> LogDomainModel:
    data = read_json(path, "model")
    try:
        return model_from_json(data)
    except (KeyError, TypeError, ZeroDivisionError) as exc:
        raise SchemaError(f"cannot build a model from {path}: {exc!r}") from exc


def _plain(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (tuple, set)):
        return list(obj)
    return str(obj)


def dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, default=_plain) + "\n"


def write_atomic(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(text: str, output: Optional[str]) -> None:
    if output:
        write_atomic(output, text)
    else:
        sys.stdout.write(text)


def resolve_seed(arg: Optional[str]) -> int:
    if arg is not None:
        return int(arg, 0)
    env = os.environ.get("REINHARDT_SEED")
    if env:
        return int(env, 0)
    return DEFAULT_SEED


# ---------------------------------------------------------------------------
# commands


def cmd_classify(cfg: RunConfig, args) -> int:
    model = load_model(cfg.input)
    verdict = classify_serre(model, entry_bound=cfg.entry_bound, seed=cfg.seed, stehle_check=not args.no_stehle)
    out = verdict.to_json()
    jsonschema.validate(out, _schema("verdict"))
    emit(dumps(out), cfg.output)
    return EXIT_OK if verdict.member else EXIT_NON_MEMBER


def cmd_cone(cfg: RunConfig, args) -> int:
    model = load_model(cfg.input)
    cone = model.cone()
    out = {
        "cone": cone.to_json(),
        "line_free": cone.line_free,
        "hyperbolic": is_hyperbolic_domain(model),
        "axis_count": axis_count(model),
        "met_axes": list(model.met_axes()),
    }
    emit(dumps(out), cfg.output)
    return EXIT_OK


def cmd_aut(cfg: RunConfig, args) -> int:
    model = load_model(cfg.input)
    out: dict = {}
    if axis_count(model) == 0:
        structure = classify_aut_structure(model, cfg.entry_bound)
        out["structure"] = structure.to_json()
        witness = noncompactness_witness(model)
        out["witness"] = None if witness is None else witness.to_json()
    else:
        out["structure"] = None
        out["note"] = "structure classification covers domains missing both axes"
    if args.aut:
        aff = affine_from_json(read_json(args.aut, "automorphism"))
        out["preservation"] = preservation_report(model, aff, n_samples=cfg.samples, seed=cfg.seed).to_json()
    emit(dumps(out), cfg.output)
    if args.aut and not out["preservation"]["preserved"]:
        return EXIT_CHECK_FAILED
    return EXIT_OK


def default_function(model: LogDomainModel) -> str:
    if isinstance(model, Model4):
        return "U4"
    if isinstance(model, Model5):
        return "U5"
    if isinstance(model, Model6):
        return "U6"
    if isinstance(model, ParabolicModel):
        return "UParabolic"
    raise SchemaError(f"no exhaustion function is attached to {type(model).__name__} models")


_COMPATIBLE = {
    "U4": (Model4,),
    "U5": (Model5,),
    "U5Literal": (Model5,),
    "U6": (Model6,),
    "UTilde6": (Model6,),
    "RhoUTilde6": (Model6,),
    "UParabolic": (ParabolicModel,),
    "NegSquare": (Model4, Model5, Model6, ParabolicModel, HyperbolicModel),
}


def build_function(name: str, model: LogDomainModel) -> stehle.ExhaustionFn:
    if name not in _COMPATIBLE:
        raise SchemaError(f"unknown function {name!r}; choose from {', '.join(FUNCTIONS)}")
    if not isinstance(model, _COMPATIBLE[name]):
        raise SchemaError(f"{name} does not live on {type(model).__name__} models")
    if name == "U4":
        return stehle.u4(model.r)
    if name == "U5":
        return stehle.u5(model.p)
    if name == "U5Literal":
        return stehle.u5_literal(model.p)
    if name == "UParabolic":
        return stehle.u_parabolic(model)
    return stehle.exhaustion_for(name)


def _complex(d) -> complex:
    return complex(d["re"], d["im"]) if isinstance(d, dict) else complex(d)


def load_automorphisms(path: str, fn: stehle.ExhaustionFn) -> List[stehle.Automorphism]:
    """Automorphism list: monomial maps or members of the model families."""
    data = read_json(path)
    if not isinstance(data, list):
        raise SchemaError("the automorphism file must hold a JSON list")
    auts = []
    for i, item in enumerate(data):
        fam = item.get("family", "monomial")
        name = item.get("name", f"{fam}{i}")
        if fam == "monomial":
            jsonschema.validate({k: v for k, v in item.items() if k != "family"}, _schema("automorphism"))
            aff = affine_from_json(item)
            phases = tuple(np.exp(1j * float(t)) for t in item.get("phases", (0.0, 0.0)))
            auts.append(stehle.monomial_automorphism(aff, phases, name))
        elif fam == "model4":
            auts.append(stehle.model4_automorphism(_complex(item["alpha"]), _complex(item["beta"]), _complex(item["rot"]),
                                                   bool(item.get("invert", False)), float(fn.params.get("r", 0))))
        elif fam == "model5":
            auts.append(stehle.model5_automorphism(_complex(item["alpha"]), _complex(item["beta"]), _complex(item["gamma"]),
                                                   fn.params.get("p", 1)))
        elif fam == "model6":
            auts.append(stehle.model6_automorphism(_complex(item["alpha"]), _complex(item["beta"]), _complex(item["gamma"])))
        else:
            raise SchemaError(f"unknown automorphism family {fam!r}")
    return auts


def cmd_stehle(cfg: RunConfig, args) -> int:
    model = load_model(cfg.input)
    name = args.fn or default_function(model)
    fn = build_function(name, model)
    auts = load_automorphisms(args.aut_file, fn) if args.aut_file else None
    top = max(cfg.samples, 100)
    sizes = (max(top // 100, 10), max(top // 10, 10), top)
    report = stehle.run_suite(fn, seed=cfg.seed, sizes=sizes, n_auts=args.n_auts, auts=auts,
                              exhaustion=name in EXHAUSTIONS)
    emit(dumps(report.to_json()), cfg.output)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _r_list(text: Optional[str]) -> Sequence[float]:
    if not text:
        return coeureloeb.DEFAULT_R_LIST
    return tuple(float(x) for x in text.split(","))


def cmd_counterexample(cfg: RunConfig, args) -> int:
    model = load_model(cfg.input)
    if not isinstance(model, HyperbolicModel):
        verdict = classify_serre(model, entry_bound=cfg.entry_bound, stehle_check=False)
        if verdict.case_label is not CaseLabel.T0_HYPERBOLIC:
            raise SchemaError("the counterexample harness needs a hyperbolic-type model")
        raise SchemaError("give the hyperbolic-type model in hyperbolic_model form")
    sign = None if args.sign is None else (1 if args.sign == "+" else -1)
    params = coeureloeb.CLParams.from_model(model, sign)
    try:
        table = coeureloeb.blowup_table(params, _r_list(args.R_list), args.N)
    except coeureloeb.ResolutionTooLow as exc:
        emit(dumps({"error": "ResolutionTooLow", "message": str(exc), "passed": False}), cfg.output)
        return EXIT_CHECK_FAILED
    summary = table.summary()
    if args.csv:
        write_atomic(args.csv, table.to_csv())
    if args.svg:
        write_atomic(args.svg, table.to_svg())
    if cfg.fmt == "csv":
        emit(table.to_csv(), cfg.output)
    elif cfg.fmt == "svg":
        emit(table.to_svg(), cfg.output)
    else:
        emit(dumps(summary), cfg.output)
    return EXIT_OK if table.passed else EXIT_CHECK_FAILED


SELFTEST = {
    "coeure_loeb": (False, "T0Hyperbolic"),
    "coeure_loeb_minus": (False, "T0Hyperbolic"),
    "coeure_loeb_wedge": (False, "T0Hyperbolic"),
    "model4": (True, "T1Model4"),
    "model5": (True, "T1Model5"),
    "model6": (True, "T1Model6"),
    "parabolic_k1": (True, "T0Parabolic"),
    "parabolic_k2": (True, "T0Parabolic"),
    "parabolic_k3": (True, "T0Parabolic"),
    "bounded_origin": (True, "T2"),
    "polyhedral_triangle": (True, "T0Compact"),
    "polyhedral_t1": (True, "T1Compact"),
}


def cmd_selftest(cfg: RunConfig, args) -> int:
    results = {}
    ok = True
    for name, (member, label) in SELFTEST.items():
        verdict = classify_serre(load_model(str(bundled_path(name))), entry_bound=cfg.entry_bound,
                                 seed=cfg.seed, stehle_check=False)
        good = verdict.member == member and verdict.case_label.value == label
        ok &= good
        results[name] = {"member": verdict.member, "case_label": verdict.case_label.value, "expected": label, "ok": good}
    emit(dumps({"passed": ok, "results": results}), cfg.output)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


COMMANDS = {
    "classify": cmd_classify,
    "cone": cmd_cone,
    "aut": cmd_aut,
    "stehle": cmd_stehle,
    "counterexample": cmd_counterexample,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", default=None,
                        help=f"RNG seed (default: $REINHARDT_SEED or {DEFAULT_SEED:#x})")
    common.add_argument("--entry-bound", type=int, default=50,
                        help="entry bound for the hyperbolic matrix search (default: 50)")
    common.add_argument("--samples", type=int, default=10**5,
                        help="largest random sample size (default: 100000)")
    common.add_argument("--format", dest="fmt", choices=("json", "csv", "svg"), default="json",
                        help="output format (default: json; csv/svg only for counterexample)")
    common.add_argument("-o", "--output", default=None, help="output file (written atomically; default: stdout)")

    parser = argparse.ArgumentParser(
        prog="reinhardt",
        description="Membership of hyperbolic Reinhardt domains in C^2 in the class of fibers "
        "with Stein bundles, with certificates and numerical checks.",
        epilog="exit codes: 0 ok/member, 1 error, 2 check failed, 3 non-member",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="classify a model domain")
    p.add_argument("input", help="model JSON (path or bundled name)")
    p.add_argument("--no-stehle", action="store_true", help="skip the numerical suite in member certificates")

    p = sub.add_parser("cone", parents=[common], help="recession cone, axis count and hyperbolicity")
    p.add_argument("input")

    p = sub.add_parser("aut", parents=[common], help="automorphism structure and optional preservation check")
    p.add_argument("input")
    p.add_argument("--aut", default=None, help="automorphism JSON to check for preservation")

    p = sub.add_parser("stehle", parents=[common], help="run the Stehle criterion checks")
    p.add_argument("input")
    p.add_argument("--fn", choices=FUNCTIONS, default=None, help="function (default: the one attached to the model)")
    p.add_argument("--aut-file", default=None, help="JSON list of automorphisms (default: random family)")
    p.add_argument("--n-auts", type=int, default=10, help="random automorphisms when no file is given (default: 10)")

    p = sub.add_parser("counterexample", parents=[common], help="disc-family harness for hyperbolic-type models")
    p.add_argument("input", help="hyperbolic model JSON")
    p.add_argument("--R-list", default=None, help="comma-separated R values, decreasing (default: 1.5,1.1,1.01,1.001)")
    p.add_argument("--N", type=int, default=None, help="boundary samples (power of two; default: chosen from R)")
    p.add_argument("--sign", choices=("+", "-"), default=None, help="branch (default: the model's t_sign)")
    p.add_argument("--csv", default=None, help="also write the boundary CSV here")
    p.add_argument("--svg", default=None, help="also write the blow-up SVG here")

    sub.add_parser("selftest", parents=[common], help="classify the bundled models against their expected verdicts")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            input=getattr(args, "input", None),
            seed=resolve_seed(args.seed),
            entry_bound=args.entry_bound,
            samples=args.samples,
            fmt=args.fmt,
            output=args.output,
        )
        return COMMANDS[args.command](cfg, args)
    except (ReinhardtError, ValueError, jsonschema.ValidationError) as exc:
        sys.stdout.write(dumps({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

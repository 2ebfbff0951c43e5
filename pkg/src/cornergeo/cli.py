"""Command-line interface: check / classify / twin / deform / scan.

Reads a scene (a preset name, a family triple, or raw component expressions),
samples the chart domain with a recorded seed, runs the requested residual
suites, and emits a deterministic JSON report (stable key order, no
timestamps).  Exit codes: 0 all suites passed, 1 at least one suite failed,
2 configuration or domain error (bad expressions, singular metric,
degenerate frame, non-positive deformation factor, unknown preset).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import acms, construct, corner, family
from .conventions import CONVENTION_BANNER, SCHEMA_VERSION
from .corner import CornerFields, DegenerateCornerError
from .expr import EvalDomainError, ParseError
from .fields import ChartDomain, SingularMetricError
from .tensor import d_oneform_matrix

__all__ = ["ConfigError", "SceneConfig", "run", "scan_sigma", "main"]

DEFAULT_SUITES = ("axioms", "corner", "frame", "forms", "classify")
ALL_SUITES = ("axioms", "corner", "frame", "forms", "classify", "twins", "deform")

# fixed per-suite stream ids so adding a suite does not shift another's draws
_SUITE_RNG_IDS = {name: i for i, name in enumerate(ALL_SUITES)}

DEFAULT_TOLERANCES = {
    "kernel": 1e-8,
    "classification": 1e-6,
    "failure_floor": 1e-3,
}


class ConfigError(ValueError):
    """Invalid scene configuration."""


@dataclass
class SceneConfig:
    """Everything a run needs; CLI flags override config-file entries."""

    preset: str | None = None
    family: dict | None = None
    structure: dict | None = None
    box: tuple = ((0.1, 1.0), (0.1, 1.0), (0.1, 1.0))
    samples: int = 100
    seed: int = 0
    suites: tuple = DEFAULT_SUITES
    f: str = "1"
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    twin_kind: str = "both"
    draws: int = 0

    @classmethod
    def load(cls, args) -> "SceneConfig":
        data: dict = {}
        if getattr(args, "config", None):
            try:
                with open(args.config, "r", encoding="utf-8") as fh:
                    data = json.load(fh)
            except OSError as err:
                raise ConfigError(f"cannot read config file: {err}") from None
            except json.JSONDecodeError as err:
                raise ConfigError(f"config file is not valid JSON: {err}") from None
            if not isinstance(data, dict):
                raise ConfigError("config file must hold a JSON object")

        cfg = cls()
        cfg.preset = data.get("preset")
        cfg.family = data.get("family")
        cfg.structure = data.get("structure")
        if "box" in data:
            cfg.box = tuple(tuple(b) for b in data["box"])
        cfg.samples = data.get("samples", cfg.samples)
        cfg.seed = data.get("seed", cfg.seed)
        if "suites" in data:
            cfg.suites = tuple(data["suites"])
        cfg.f = data.get("f", cfg.f)
        if "tolerances" in data:
            tols = dict(DEFAULT_TOLERANCES)
            tols.update(data["tolerances"])
            cfg.tolerances = tols

        if getattr(args, "preset", None):
            cfg.preset = args.preset
        if getattr(args, "samples", None) is not None:
            cfg.samples = args.samples
        if getattr(args, "seed", None) is not None:
            cfg.seed = args.seed
        if getattr(args, "suites", None):
            cfg.suites = tuple(p.strip() for p in args.suites.split(",") if p.strip())
        if getattr(args, "f", None):
            cfg.f = args.f
        if getattr(args, "kind", None):
            cfg.twin_kind = args.kind
        if getattr(args, "draws", None) is not None:
            cfg.draws = args.draws

        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.samples < 1:
            raise ConfigError(f"samples must be >= 1, got {self.samples}")
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        sources = [x is not None for x in (self.preset, self.family, self.structure)]
        if sum(sources) > 1:
            raise ConfigError("give only one of preset / family / structure")
        for name, value in self.tolerances.items():
            if name not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance {name!r}")
            if not (isinstance(value, (int, float)) and value > 0.0):
                raise ConfigError(f"tolerance {name!r} must be positive")
        unknown = [s for s in self.suites if s not in ALL_SUITES]
        if unknown:
            raise ConfigError(
                f"unknown suites {unknown}; available: {', '.join(ALL_SUITES)}"
            )
        try:
            ChartDomain(self.box)
        except ValueError as err:
            raise ConfigError(str(err)) from None

    def domain(self) -> ChartDomain:
        return ChartDomain(self.box)

    def echo(self) -> dict:
        return {
            "preset": self.preset,
            "family": self.family,
            "structure": "inline" if self.structure is not None else None,
            "box": [list(b) for b in self.box],
            "samples": self.samples,
            "seed": self.seed,
            "suites": list(self.suites),
            "f": self.f,
            "tolerances": dict(self.tolerances),
        }


def _build_structure(cfg: SceneConfig):
    """Returns (structure, preset-or-None). Raises ConfigError when no source."""
    if cfg.preset is not None:
        try:
            pre = family.preset(cfg.preset)
        except KeyError as err:
            raise ConfigError(str(err.args[0])) from None
        params = family.FamilyParams(
            tau=pre.params.tau,
            kappa=pre.params.kappa,
            mu=pre.params.mu,
            domain=cfg.domain(),
        )
        return family.build_family(params), pre
    if cfg.family is not None:
        for key in ("tau", "kappa", "mu"):
            if key not in cfg.family:
                raise ConfigError(f"family config needs {key!r}")
        params = family.FamilyParams.of(
            cfg.family["tau"], cfg.family["kappa"], cfg.family["mu"], domain=cfg.domain()
        )
        return family.build_family(params), None
    if cfg.structure is not None:
        for key in ("phi", "xi", "eta", "g"):
            if key not in cfg.structure:
                raise ConfigError(f"structure config needs {key!r}")
        s = acms.AcmStructure.from_expressions(
            cfg.structure["phi"],
            cfg.structure["xi"],
            cfg.structure["eta"],
            cfg.structure["g"],
            domain=cfg.domain(),
        )
        return s, None
    raise ConfigError("no structure source: give --preset, or family/structure in --config")


def _rng(cfg: SceneConfig, suite: str) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, _SUITE_RNG_IDS[suite]])


def _suite_axioms(s, pts, cfg, pre) -> dict:
    return acms.check_axioms(s, pts, tol=cfg.tolerances["kernel"]).to_dict()


def _suite_corner(s, pts, cfg, pre) -> dict:
    kernel = cfg.tolerances["kernel"]
    floor = cfg.tolerances["failure_floor"]
    rep = corner.corner_residual(s, pts, rng=_rng(cfg, "corner"), tol=kernel)
    forms = corner.corner_residual_forms(s, pts, tol=kernel * 10.0)
    closed = corner.closed_omega_check(
        s, pts, closed_tol=kernel, sigma_tol=cfg.tolerances["classification"]
    )
    out = rep.to_dict()
    out["forms"] = forms.to_dict()
    out["closed_omega"] = closed.to_dict()
    out["passed"] = rep.passed and forms.passed and closed.passed
    out["details"]["clearly_violated"] = rep.worst() > floor
    return out


def _suite_frame(s, pts, cfg, pre) -> dict:
    kernel = cfg.tolerances["kernel"]
    frame = corner.frame_residuals(s, pts, tol=kernel / 10.0, grad_tol=kernel * 10.0)
    table = corner.connection_table_residuals(
        s, pts, rng=_rng(cfg, "frame"), tol=kernel
    )
    out = frame.to_dict()
    out["connection_table"] = table.to_dict()
    out["passed"] = frame.passed and table.passed
    return out


def _suite_forms(s, pts, cfg, pre) -> dict:
    return corner.form_identities_residuals(
        s, pts, tol=cfg.tolerances["kernel"]
    ).to_dict()


def _suite_classify(s, pts, cfg, pre) -> dict:
    cls_tol = cfg.tolerances["classification"]
    rep = acms.classify(s, points=pts, zero_tol=cls_tol, const_tol=cls_tol)
    out = {"suite": "classify", "classification": rep.to_dict()}
    expected = pre.expected.get("base_verdict") if pre is not None else None
    out["expected_verdict"] = expected
    out["passed"] = True if expected is None else rep.verdict == expected
    return out


def _suite_twins(s, pts, cfg, pre) -> dict:
    cls_tol = cfg.tolerances["classification"]
    kernel = cfg.tolerances["kernel"]
    cf = CornerFields(s)
    out: dict = {"suite": "twins"}
    passed = True
    if cfg.twin_kind in ("v", "both"):
        verdict = construct.thken_check(s, pts, tol=cls_tol, fields=cf)
        t = construct.twin(s, construct.TwinKind.V, fields=cf)
        ax = acms.check_axioms(t, pts, tol=kernel)
        out["v_twin"] = {"theorem": verdict.to_dict(), "axioms": ax.to_dict()}
        passed = passed and verdict.routes_agree and ax.passed
    if cfg.twin_kind in ("phi_v", "both"):
        verdict = construct.thcos_check(s, pts, tol=cls_tol, fields=cf)
        t = construct.twin(s, construct.TwinKind.PHI_V, fields=cf)
        ax = acms.check_axioms(t, pts, tol=kernel)
        out["phi_v_twin"] = {"theorem": verdict.to_dict(), "axioms": ax.to_dict()}
        passed = passed and verdict.routes_agree and ax.passed
    out["passed"] = passed
    return out


def _suite_deform(s, pts, cfg, pre) -> dict:
    kernel = cfg.tolerances["kernel"]
    cls_tol = cfg.tolerances["classification"]
    try:
        params = construct.DeformationParams.of(cfg.f)
    except ParseError as err:
        raise ConfigError(f"bad deformation factor: {err}") from None
    cf = CornerFields(s)
    deformed = construct.deform(s, params, fields=cf)

    ax = acms.check_axioms(deformed, pts, tol=kernel)
    typ = construct.deformed_type(
        s, params, pts, kernel_tol=kernel, gate_tol=cls_tol, fields=cf
    )
    ntilde = construct.ntilde_identity_residual(
        s, params, pts, rng=_rng(cfg, "deform"), tol=kernel * 10.0, fields=cf
    )
    gate = construct.corollary_gate(s, params, pts, tol=cls_tol, fields=cf)
    cls = acms.classify(deformed, points=pts, zero_tol=cls_tol, const_tol=cls_tol)

    return {
        "suite": "deform",
        "f": cfg.f,
        "axioms": ax.to_dict(),
        "type": typ.to_dict(),
        "ntilde": ntilde.to_dict(),
        "corollary": gate.to_dict(),
        "classification": cls.to_dict(),
        "passed": ax.passed and typ.residuals.passed and ntilde.passed,
    }


_SUITE_RUNNERS = {
    "axioms": _suite_axioms,
    "corner": _suite_corner,
    "frame": _suite_frame,
    "forms": _suite_forms,
    "classify": _suite_classify,
    "twins": _suite_twins,
    "deform": _suite_deform,
}


def run(cfg: SceneConfig, command: str) -> tuple[dict, int]:
    """Execute one subcommand; returns (report payload, exit code)."""
    payload: dict = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "conventions": CONVENTION_BANNER,
        "config": cfg.echo(),
    }

    if command == "scan":
        diagnostics = _scan_command(cfg)
        payload["scan"] = diagnostics
        payload["passed"] = True
        payload["exit_code"] = 0
        return payload, 0

    s, pre = _build_structure(cfg)
    pts = cfg.domain().sample(cfg.samples, cfg.seed)

    if command == "check":
        suites = cfg.suites
    elif command == "classify":
        suites = ("classify",)
    elif command == "twin":
        suites = ("twins",)
    elif command == "deform":
        suites = ("deform",)
    else:
        raise ConfigError(f"unknown command {command!r}")

    results = {}
    for name in suites:
        results[name] = _SUITE_RUNNERS[name](s, pts, cfg, pre)
    payload["suites"] = results
    passed = all(r.get("passed", True) for r in results.values())
    payload["passed"] = passed
    code = 0 if passed else 1
    payload["exit_code"] = code
    return payload, code


def scan_sigma(params_list, samples: int = 100, seed: int = 0) -> dict:
    """Sigma diagnostics across family members.

    For each member: the worst |d omega|, the worst |sigma|, and how close
    sigma ever gets to e^rho (the deformation-normality gate).  Members whose
    frame degenerates at a sample point report the count of skipped points.
    """
    draws = []
    overall_gap = None
    for i, params in enumerate(params_list):
        s = family.build_family(params)
        pts = params.domain.sample(samples, np.random.default_rng([seed, i]))
        cf = CornerFields(s)
        max_domega = max_sigma = 0.0
        min_gap = None
        degenerate = 0
        for p in pts:
            try:
                f = cf.frame(p)
            except DegenerateCornerError:
                degenerate += 1
                continue
            max_domega = max(max_domega, float(np.max(np.abs(d_oneform_matrix(cf.omega, p)))))
            max_sigma = max(max_sigma, abs(f.sigma))
            gap = abs(f.sigma - f.e_rho)
            min_gap = gap if min_gap is None else min(min_gap, gap)
        entry = {
            "tau": str(params.tau),
            "kappa": str(params.kappa),
            "mu": str(params.mu),
            "max_d_omega": max_domega,
            "max_sigma": max_sigma,
            "min_sigma_gap": min_gap,
            "degenerate_points": degenerate,
        }
        draws.append(entry)
        if min_gap is not None:
            overall_gap = min_gap if overall_gap is None else min(overall_gap, min_gap)
    return {"entries": draws, "min_sigma_gap": overall_gap}


def _scan_command(cfg: SceneConfig) -> dict:
    params_list = []
    if cfg.preset is None and cfg.family is None and cfg.structure is None:
        # no explicit member: sweep every bundled preset
        for name in family.PRESET_NAMES:
            pre = family.preset(name)
            params_list.append(
                family.FamilyParams(
                    tau=pre.params.tau,
                    kappa=pre.params.kappa,
                    mu=pre.params.mu,
                    domain=cfg.domain(),
                )
            )
    if cfg.preset is not None:
        try:
            pre = family.preset(cfg.preset)
        except KeyError as err:
            raise ConfigError(str(err.args[0])) from None
        params_list.append(
            family.FamilyParams(
                tau=pre.params.tau,
                kappa=pre.params.kappa,
                mu=pre.params.mu,
                domain=cfg.domain(),
            )
        )
    if cfg.family is not None:
        params_list.append(
            family.FamilyParams.of(
                cfg.family["tau"], cfg.family["kappa"], cfg.family["mu"],
                domain=cfg.domain(),
            )
        )
    rng = np.random.default_rng([cfg.seed, 10_000])
    for _ in range(cfg.draws):
        params_list.append(family.random_family(rng, corner=True, domain=cfg.domain()))
    return scan_sigma(params_list, samples=cfg.samples, seed=cfg.seed)


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cornergeo",
        description="Verify, classify and deform almost contact metric "
        "structures of corner type on 3-d charts.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", help="named structure, e.g. family:B")
    common.add_argument("--config", help="JSON scene configuration file")
    common.add_argument("--samples", type=int, help="sample-point count (default 100)")
    common.add_argument("--seed", type=int, help="sampling seed (default 0)")
    common.add_argument("--out", help="write the JSON report to this file")

    sub = parser.add_subparsers(dest="command", required=True)
    check = sub.add_parser("check", parents=[common], help="run residual suites")
    check.add_argument(
        "--suites",
        help=f"comma-separated subset of: {', '.join(ALL_SUITES)} "
        f"(default: {','.join(DEFAULT_SUITES)})",
    )
    sub.add_parser("classify", parents=[common], help="taxonomy verdict only")
    tw = sub.add_parser("twin", parents=[common], help="twin-structure theorems")
    tw.add_argument("--kind", choices=["v", "phi_v", "both"], default="both")
    df = sub.add_parser("deform", parents=[common], help="deformation identities")
    df.add_argument("--f", help="deformation factor expression (default 1)")
    sc = sub.add_parser("scan", parents=[common], help="sigma diagnostics")
    sc.add_argument("--draws", type=int, default=0, help="random family draws")
    return parser


def main(argv=None) -> int:
    args = _make_parser().parse_args(argv)
    try:
        cfg = SceneConfig.load(args)
        payload, code = run(cfg, args.command)
    except (
        ConfigError,
        ParseError,
        EvalDomainError,
        SingularMetricError,
        DegenerateCornerError,
        construct.NonPositiveFError,
        ValueError,
    ) as err:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": args.command,
            "error": {"type": type(err).__name__, "message": str(err)},
            "exit_code": 2,
        }
        code = 2

    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

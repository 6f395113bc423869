"""Batch front end: declarative metric configs, checks, report emission.

Exit codes: 0 = verdict yes, 1 = verdict no, 2 = inconclusive,
3 = usage or configuration error, 4 = domain/geometry error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

import numpy as np

from . import __version__
from .errors import (
    ConfigurationError,
    DomainError,
    FinslerLabError,
    GeometryError,
    PreconditionError,
)
from .riemann import (
    Box,
    conformal_metric,
    constant_form,
    covariant_package,
    euclidean_metric,
)
from .alphabeta import (
    AlphaBetaMetric,
    KropinaPlus,
    MKropina,
    PowerSeries,
    SqrtMixed,
    SqrtPure,
    metric_value,
    spray_full,
    spray_generic,
)
from .classify import (
    CONDITION_TAGS,
    DEFAULT_TOLERANCES,
    ClassificationReport,
    check_condition,
    douglas_residual,
    douglas_residual_direct,
    flag_curvature_projective,
    hamel_residual,
    hamel_residual_direct,
    make_probe_set,
    verdict_of,
)
from .constructions import (
    UField,
    conformal_pair_from_u,
    deform,
    eta_affine_x1,
    eta_constant,
    eta_exp_x1,
    eta_one_plus_norm2,
    example_ufield,
    generic_nonclosed_form,
    local_structure_flag_curvature,
    pde_residual,
    scaled_form,
    scaled_metric,
)

EXIT_BY_VERDICT = {"yes": 0, "no": 1, "inconclusive": 2}
EXIT_USAGE = 3
EXIT_DOMAIN = 4

COMMANDS = (
    "spray",
    "check-douglas",
    "check-projflat",
    "check-condition",
    "deform",
    "example",
    "curvature",
    "report",
)


def _box(lo, hi):
    return {"lo": list(lo), "hi": list(hi)}


_KILLING_EXAMPLE = {"kind": "killing-conformal", "lam": 1.0, "t": 1.0, "f": [1.0, 0.0, 0.0]}
_ETA_NORM2 = {"profile": "one-plus-norm2"}
_ETA_X1 = {"profile": "affine-x1", "a0": 0.0, "a1": 1.0}
_SMOOTH_GEOMETRY = {
    "alpha": {"kind": "conformal", "direction": [0.3, 0.1, 0.0]},
    "beta": {
        "kind": "eta-scaled",
        "base": {"kind": "constant", "coeffs": [0.8, 0.1, 0.0]},
        "eta": _ETA_NORM2,
    },
    "chart": _box([-0.5] * 3, [0.5] * 3),
    "probes": {"count": 120, "seed": 7, "margin": 0.05},
}

PRESETS = {
    "minkowski-trivial": {
        "label": "minkowski-trivial",
        "phi": {"family": "m-kropina", "m": 2.0},
        "alpha": {"kind": "euclidean"},
        "beta": {"kind": "constant", "coeffs": [0.7, 0.0, 0.0]},
        "chart": _box([-1.0] * 3, [1.0] * 3),
        "probes": {"count": 80, "seed": 11, "margin": 0.05},
    },
    "example-s7": {
        "label": "example-s7",
        "phi": {"family": "m-kropina", "m": 2.0},
        "alpha": dict(_KILLING_EXAMPLE),
        "beta": dict(_KILLING_EXAMPLE),
        "chart": _box([-0.25] * 3, [0.25] * 3),
        "probes": {"count": 120, "seed": 7, "margin": 0.05},
    },
    "example-s7-scaled": {
        "label": "example-s7-scaled",
        "phi": {"family": "m-kropina", "m": 2.0},
        "alpha": {
            "kind": "eta-scaled",
            "base": dict(_KILLING_EXAMPLE),
            "eta": _ETA_NORM2,
            "m": 2.0,
        },
        "beta": {
            "kind": "eta-scaled",
            "base": dict(_KILLING_EXAMPLE),
            "eta": _ETA_NORM2,
        },
        "chart": _box([-0.25] * 3, [0.25] * 3),
        "probes": {"count": 120, "seed": 7, "margin": 0.05},
    },
    "case2-eta-linear": {
        "label": "case2-eta-linear",
        "phi": {"family": "sqrt-mixed", "k1": 1.0, "m": 2.0, "k2": 0.0},
        "alpha": {
            "kind": "eta-scaled",
            "base": {"kind": "euclidean"},
            "eta": _ETA_X1,
            "m": 2.0,
        },
        "beta": {
            "kind": "eta-scaled",
            "base": {"kind": "constant", "coeffs": [1.0, 0.0, 0.0]},
            "eta": _ETA_X1,
        },
        "chart": _box([0.6, -0.4, -0.4], [1.4, 0.4, 0.4]),
        "at": [1.0, 0.0, 0.0],
        "direction": [1.0, 1.0, 0.0],
        "closed_form": "local-structure",
        "probes": {"count": 120, "seed": 7, "margin": 0.05},
    },
    "kropina-plus": {
        "label": "kropina-plus",
        "phi": {"family": "kropina-plus", "c": 1.0},
        "alpha": {"kind": "euclidean"},
        "beta": {
            "kind": "eta-scaled",
            "base": {"kind": "constant", "coeffs": [1.0, 0.0, 0.0]},
            "eta": _ETA_NORM2,
        },
        "chart": _box([-0.5] * 3, [0.5] * 3),
        "probes": {"count": 120, "seed": 7, "margin": 0.05},
    },
    "kropina-plus-c0": {
        "label": "kropina-plus-c0",
        "phi": {"family": "kropina-plus", "c": 0.0},
        "alpha": {"kind": "euclidean"},
        "beta": {
            "kind": "eta-scaled",
            "base": {"kind": "constant", "coeffs": [1.0, 0.0, 0.0]},
            "eta": _ETA_NORM2,
        },
        "chart": _box([-0.5] * 3, [0.5] * 3),
        "probes": {"count": 120, "seed": 7, "margin": 0.05},
    },
    "sqrt-pure": dict(
        {"label": "sqrt-pure", "phi": {"family": "sqrt-pure", "m": 2.0, "k": 1.0}},
        **_SMOOTH_GEOMETRY,
    ),
    "sqrt-mixed": dict(
        {
            "label": "sqrt-mixed",
            "phi": {"family": "sqrt-mixed", "k1": 0.7, "m": 2.0, "k2": 1.0},
        },
        **_SMOOTH_GEOMETRY,
    ),
    "power-series": dict(
        {
            "label": "power-series",
            "phi": {
                "family": "power-series",
                "c": 0.5,
                "m": 2.0,
                "coeffs": [0.1, -0.05, 0.02, 0.0],
            },
        },
        **_SMOOTH_GEOMETRY,
    ),
    "negative-control": {
        "label": "negative-control",
        "phi": {"family": "m-kropina", "m": 2.0},
        "alpha": {"kind": "euclidean"},
        "beta": {"kind": "generic-nonclosed"},
        "chart": _box([-0.5] * 3, [0.5] * 3),
        "probes": {"count": 120, "seed": 7, "margin": 0.05},
    },
    "mkropina-constant-b": {
        "label": "mkropina-constant-b",
        "phi": {"family": "m-kropina", "m": 2.0},
        "alpha": {"kind": "euclidean"},
        "beta": {"kind": "constant", "coeffs": [0.5, 0.0, 0.0]},
        "chart": _box([-1.0] * 3, [1.0] * 3),
        "probes": {"count": 80, "seed": 11, "margin": 0.05},
    },
}


# -- config assembly -------------------------------------------------------------


def canonical_config(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_config(cfg).encode("utf-8")).hexdigest()


def build_eta(spec, n=3):
    profile = spec.get("profile")
    if profile == "constant":
        return eta_constant(float(spec.get("value", 1.0)), n=n)
    if profile == "affine-x1":
        return eta_affine_x1(float(spec.get("a0", 0.0)), float(spec.get("a1", 1.0)), n=n)
    if profile == "one-plus-norm2":
        return eta_one_plus_norm2(n=n)
    if profile == "exp-x1":
        return eta_exp_x1(n=n)
    raise ConfigurationError(f"unknown eta profile {profile!r}")


def _killing_pair(spec, chart):
    u = example_ufield(float(spec["lam"]), float(spec["t"]), spec["f"])
    return conformal_pair_from_u(u, chart=chart)


def build_alpha(spec, chart, n=3):
    kind = spec.get("kind")
    if kind == "euclidean":
        return euclidean_metric(n, chart=chart)
    if kind == "conformal":
        return conformal_metric(n, spec["direction"], chart=chart)
    if kind == "space-form":
        from .constructions import space_form

        return space_form(float(spec["mu"]), n=n, chart=chart)
    if kind == "killing-conformal":
        return _killing_pair(spec, chart)[0]
    if kind == "eta-scaled":
        base = build_alpha(spec["base"], chart, n=n)
        eta = build_eta(spec["eta"], n=n)
        m = float(spec["m"])
        if m == 1.0:
            raise ConfigurationError("alpha.m = 1 excluded")
        return scaled_metric(base, eta, 2.0 * m / (m - 1.0), chart=chart)
    raise ConfigurationError(f"unknown alpha.kind {kind!r}")


def build_beta(spec, chart, n=3):
    kind = spec.get("kind")
    if kind == "constant":
        return constant_form(spec["coeffs"], chart=chart)
    if kind == "killing-conformal":
        return _killing_pair(spec, chart)[1]
    if kind == "eta-scaled":
        base = build_beta(spec["base"], chart, n=n)
        eta = build_eta(spec["eta"], n=n)
        return scaled_form(base, eta, chart=chart)
    if kind == "space-form-conformal":
        from .constructions import conformal_form_on_space_form

        return conformal_form_on_space_form(
            float(spec["mu"]), float(spec["k"]), spec["e"], chart=chart
        )
    if kind == "generic-nonclosed":
        return generic_nonclosed_form(n=n, chart=chart)
    raise ConfigurationError(f"unknown beta.kind {kind!r}")


def build_phi(spec):
    family = spec.get("family")
    if family == "m-kropina":
        return MKropina(float(spec["m"]))
    if family == "kropina-plus":
        return KropinaPlus(float(spec.get("c", 0.0)))
    if family == "sqrt-mixed":
        return SqrtMixed(float(spec["k1"]), float(spec["m"]), float(spec["k2"]))
    if family == "sqrt-pure":
        return SqrtPure(float(spec["m"]), float(spec["k"]))
    if family == "power-series":
        return PowerSeries(
            float(spec.get("c", 0.0)), float(spec["m"]), tuple(spec.get("coeffs", (0, 0, 0, 0)))
        )
    raise ConfigurationError(f"unknown phi.family {family!r}")


class Workspace:
    """Everything a command needs, assembled from one effective config."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.label = cfg.get("label", "unnamed")
        chart_spec = cfg.get("chart")
        if chart_spec is None:
            raise ConfigurationError("config field 'chart' is required")
        self.chart = Box(tuple(chart_spec["lo"]), tuple(chart_spec["hi"]))
        n = self.chart.n
        self.n = n
        self.phi = build_phi(cfg.get("phi", {}))
        self.alpha = build_alpha(cfg.get("alpha", {}), self.chart, n=n)
        self.beta = build_beta(cfg.get("beta", {}), self.chart, n=n)
        self.metric = AlphaBetaMetric(self.alpha, self.beta, self.phi, label=self.label)
        probes = cfg.get("probes", {})
        self.probe_count = int(probes.get("count", 120))
        self.probe_seed = int(probes.get("seed", 7))
        self.probe_margin = float(probes.get("margin", 0.05))
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(cfg.get("tolerances", {}))
        self.tolerances = {k: float(v) for k, v in tol.items()}
        self.at = np.asarray(cfg.get("at", self.chart.center()), dtype=float)
        default_dir = [1.0, 0.5, 0.25][:n]
        self.direction = np.asarray(cfg.get("direction", default_dir), dtype=float)

    def probe_set(self):
        return make_probe_set(
            self.metric,
            self.at,
            self.probe_count,
            self.probe_seed,
            margin=self.probe_margin,
        )

    def report(self, command, residuals, fitted, verdicts, verdict):
        return ClassificationReport(
            label=self.label,
            command=command,
            x=tuple(float(v) for v in self.at),
            residuals=residuals,
            fitted=fitted,
            verdicts=verdicts,
            tolerances=self.tolerances,
            probe_count=self.probe_count,
            probe_seed=self.probe_seed,
            probe_margin=self.probe_margin,
            verdict=verdict,
        )


# -- commands ---------------------------------------------------------------------


def _relative_error(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    scale = max(float(np.linalg.norm(u)), float(np.linalg.norm(v)))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(u - v)) / scale


def cmd_spray(ws: Workspace) -> ClassificationReport:
    probes = ws.probe_set()
    cov = covariant_package(ws.alpha, ws.beta, ws.at)
    worst = 0.0
    for y in probes.ys:
        gf = spray_full(ws.metric, ws.at, y, cov=cov)
        gg = spray_generic(ws.metric, ws.at, y)
        worst = max(worst, _relative_error(gf, gg))
    tol = ws.tolerances["spray_crossval"]
    verdict = verdict_of(worst, tol)
    g_at = spray_full(ws.metric, ws.at, ws.direction, cov=cov)
    return ws.report(
        "spray",
        residuals={"spray_crossval": worst},
        fitted={"spray_at_direction": [float(v) for v in g_at]},
        verdicts={"spray_crossval": verdict},
        verdict=verdict,
    )


def cmd_check_douglas(ws: Workspace) -> ClassificationReport:
    probes = ws.probe_set()
    res = douglas_residual(ws.metric, probes)
    res_direct = douglas_residual_direct(ws.metric, probes)
    tol = ws.tolerances["douglas"]
    verdict = verdict_of(res, tol)
    return ws.report(
        "check-douglas",
        residuals={"douglas": res, "douglas_direct": res_direct},
        fitted={},
        verdicts={"douglas": verdict, "douglas_direct": verdict_of(res_direct, tol)},
        verdict=verdict,
    )


def cmd_check_projflat(ws: Workspace) -> ClassificationReport:
    probes = ws.probe_set()
    res = hamel_residual(ws.metric, probes)
    res_direct = hamel_residual_direct(ws.metric, probes)
    tol = ws.tolerances["hamel"]
    verdict = verdict_of(res, tol)
    return ws.report(
        "check-projflat",
        residuals={"hamel": res, "hamel_direct": res_direct},
        fitted={},
        verdicts={"hamel": verdict, "hamel_direct": verdict_of(res_direct, tol)},
        verdict=verdict,
    )


def cmd_check_condition(ws: Workspace, condition: str) -> ClassificationReport:
    probes = ws.probe_set()
    rep = check_condition(
        ws.metric, condition, ws.at, probes=probes, tol=ws.tolerances["condition"]
    )
    fitted = {f"{condition}.{k}": v for k, v in rep.fitted.items()}
    return ws.report(
        "check-condition",
        residuals={condition: rep.residual},
        fitted=fitted,
        verdicts={condition: rep.verdict},
        verdict=rep.verdict,
    )


def cmd_deform(ws: Workspace) -> ClassificationReport:
    m = ws.phi.exponent
    da, db = deform(ws.alpha, ws.beta, m)
    rng = np.random.default_rng(ws.probe_seed)
    pts = np.vstack([ws.at, ws.chart.sample(rng, 12)])
    unit_dev = 0.0
    for p in pts:
        at = da.matrix(p)
        bt = db.covector(p)
        norm2 = float(bt @ np.linalg.solve(at, bt))
        unit_dev = max(unit_dev, abs(norm2 - 1.0))
    residuals = {"unit_length": unit_dev}
    invariance = None
    if isinstance(ws.phi, MKropina):
        deformed = AlphaBetaMetric(da, db, ws.phi, label=ws.label + "~")
        probes = ws.probe_set()
        invariance = 0.0
        for y in probes.ys[:20]:
            f0 = metric_value(ws.metric, ws.at, y)
            f1 = metric_value(deformed, ws.at, y)
            invariance = max(invariance, abs(f0 - f1) / max(1.0, abs(f0)))
        residuals["metric_invariance"] = invariance
    tol = 1e-12
    worst = max(residuals.values())
    verdict = verdict_of(worst, tol)
    verdicts = {k: verdict_of(v, tol) for k, v in residuals.items()}
    rep = ws.report("deform", residuals, {}, verdicts, verdict)
    rep.tolerances = dict(rep.tolerances)
    rep.tolerances["deform"] = tol
    return rep


def cmd_example(ws: Workspace) -> ClassificationReport:
    spec = ws.cfg.get("alpha", {})
    if spec.get("kind") == "eta-scaled":
        spec = spec.get("base", {})
    if spec.get("kind") != "killing-conformal":
        raise ConfigurationError(
            "the 'example' command needs a killing-conformal geometry"
        )
    u = example_ufield(float(spec["lam"]), float(spec["t"]), spec["f"])
    alpha_t, beta_t = conformal_pair_from_u(u, chart=ws.chart)
    rng = np.random.default_rng(ws.probe_seed)
    pts = np.vstack([ws.at, ws.chart.sample(rng, 12)])
    pde = 0.0
    killing = 0.0
    closed = 0.0
    parallel = 0.0
    unit = 0.0
    for p in pts:
        pde = max(pde, pde_residual(u, p))
        cov = covariant_package(alpha_t, beta_t, p)
        killing = max(killing, float(np.linalg.norm(cov.r)))
        closed = max(closed, float(np.linalg.norm(cov.s)))
        parallel = max(parallel, float(np.linalg.norm(cov.nabla)))
        unit = max(unit, abs(cov.b2 - 1.0))
    residuals = {
        "pde": pde,
        "killing_r": killing,
        "closed_s": closed,
        "parallel_nabla": parallel,
        "unit_length": unit,
    }
    tol = ws.tolerances["condition"]
    verdicts = {k: verdict_of(v, tol) for k, v in residuals.items()}
    worst = max(residuals.values())
    return ws.report("example", residuals, {}, verdicts, verdict_of(worst, tol))


def cmd_curvature(ws: Workspace) -> ClassificationReport:
    probes = ws.probe_set()
    K = flag_curvature_projective(
        ws.metric, ws.at, ws.direction, probes=probes, hamel_tol=1e-6
    )
    residuals = {}
    fitted = {"flag_curvature": K}
    verdicts = {}
    verdict = "yes"
    if ws.cfg.get("closed_form") == "local-structure":
        c = ws.phi.linear_coefficient
        m = ws.phi.exponent
        eta = build_eta(ws.cfg["alpha"]["eta"], n=ws.n)
        K_star = local_structure_flag_curvature(c, m, eta, ws.at, ws.direction)
        dev = abs(K - K_star) / max(1.0, abs(K_star))
        residuals["curvature_closed_form"] = dev
        fitted["flag_curvature_closed_form"] = K_star
        verdict = verdict_of(dev, 1e-8)
        verdicts["curvature_closed_form"] = verdict
    return ws.report("curvature", residuals, fitted, verdicts, verdict)


def cmd_report(ws: Workspace) -> ClassificationReport:
    probes = ws.probe_set()
    residuals = {}
    fitted = {}
    verdicts = {}
    res = douglas_residual(ws.metric, probes)
    residuals["douglas"] = res
    verdicts["douglas"] = verdict_of(res, ws.tolerances["douglas"])
    res = hamel_residual(ws.metric, probes)
    residuals["hamel"] = res
    verdicts["hamel"] = verdict_of(res, ws.tolerances["hamel"])
    for tag in CONDITION_TAGS:
        rep = check_condition(
            ws.metric, tag, ws.at, probes=probes, tol=ws.tolerances["condition"]
        )
        residuals[tag] = rep.residual
        verdicts[tag] = rep.verdict
        for k, v in rep.fitted.items():
            fitted[f"{tag}.{k}"] = v
    # the report is conclusive when every component check reached a verdict
    overall = "inconclusive" if "inconclusive" in verdicts.values() else "yes"
    return ws.report("report", residuals, fitted, verdicts, overall)


# -- output -----------------------------------------------------------------------


def machine_document(ws: Workspace, report: ClassificationReport) -> dict:
    def fmt(v):
        return f"{float(v):.15g}"

    fitted = {}
    for name in sorted(report.fitted):
        val = report.fitted[name]
        if isinstance(val, (list, tuple)):
            fitted[name] = [fmt(v) for v in val]
        else:
            fitted[name] = fmt(val)
    return {
        "version": __version__,
        "config_hash": config_hash(ws.cfg),
        "command": report.command,
        "label": report.label,
        "verdict": report.verdict,
        "x": [fmt(v) for v in report.x],
        "residuals": {k: fmt(v) for k, v in sorted(report.residuals.items())},
        "fitted": fitted,
        "verdicts": dict(sorted(report.verdicts.items())),
        "tolerances": {k: fmt(v) for k, v in sorted(report.tolerances.items())},
        "probes": {"count": report.probe_count, "seed": report.probe_seed},
    }


def human_table(ws: Workspace, report: ClassificationReport) -> str:
    lines = [
        f"{'metric':<28}{report.label}",
        f"{'command':<28}{report.command}",
        f"{'base point':<28}({', '.join(f'{v:g}' for v in report.x)})",
        f"{'probes':<28}count={report.probe_count} seed={report.probe_seed}",
    ]
    for name in sorted(report.residuals):
        v = report.residuals[name]
        tol = report.tolerances.get(name, report.tolerances.get("condition", 0.0))
        vd = report.verdicts.get(name, "")
        lines.append(f"{'residual/' + name:<28}{v:.5e}  verdict: {vd}")
        del tol
    for name in sorted(report.fitted):
        val = report.fitted[name]
        if isinstance(val, (list, tuple)):
            body = " ".join(f"{float(v):.5e}" for v in val)
        else:
            body = f"{float(val):.5e}"
        lines.append(f"{'fitted/' + name:<28}{body}")
    if report.command == "deform":
        dev = report.residuals.get("unit_length", 0.0)
        lines.append(f"{'||beta~||_alpha~':<28}{1.0 + dev:.12f}")
    lines.append(f"{'verdict':<28}{report.verdict}")
    return "\n".join(lines)


# -- entry point --------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def _build_parser():
    p = _Parser(prog="finslerlab", description=__doc__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="path to a JSON metric config")
    p.add_argument("--preset", choices=sorted(PRESETS), help="built-in named config")
    p.add_argument("--condition", choices=CONDITION_TAGS, help="tag for check-condition")
    p.add_argument("--probes", type=int, help="override probe count")
    p.add_argument("--seed", type=int, help="override probe seed")
    p.add_argument("--tol-douglas", type=float, help="override the Douglas tolerance")
    p.add_argument("--tol-hamel", type=float, help="override the Hamel tolerance")
    p.add_argument("--out", help="write the machine report to this path")
    p.add_argument("--format", choices=("table", "machine"), default="table")
    return p


def effective_config(args) -> dict:
    if args.config and args.preset:
        raise ConfigurationError("give either --config or --preset, not both")
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigurationError(f"cannot read config {args.config}: {err}")
    elif args.preset:
        cfg = json.loads(json.dumps(PRESETS[args.preset]))
    else:
        raise ConfigurationError("one of --config / --preset is required")
    if args.probes is not None:
        cfg.setdefault("probes", {})["count"] = int(args.probes)
    if args.seed is not None:
        cfg.setdefault("probes", {})["seed"] = int(args.seed)
    tol = cfg.setdefault("tolerances", {})
    if args.tol_douglas is not None:
        tol["douglas"] = float(args.tol_douglas)
    if args.tol_hamel is not None:
        tol["hamel"] = float(args.tol_hamel)
    return cfg


def run_command(argv) -> int:
    """Parse argv, run the command, emit reports; returns the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = effective_config(args)
        ws = Workspace(cfg)
        if args.command == "spray":
            report = cmd_spray(ws)
        elif args.command == "check-douglas":
            report = cmd_check_douglas(ws)
        elif args.command == "check-projflat":
            report = cmd_check_projflat(ws)
        elif args.command == "check-condition":
            if not args.condition:
                raise ConfigurationError("check-condition requires --condition TAG")
            report = cmd_check_condition(ws, args.condition)
        elif args.command == "deform":
            report = cmd_deform(ws)
        elif args.command == "example":
            report = cmd_example(ws)
        elif args.command == "curvature":
            report = cmd_curvature(ws)
        else:
            report = cmd_report(ws)
    except ConfigurationError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, GeometryError, PreconditionError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DOMAIN
    doc = machine_document(ws, report)
    if args.format == "machine":
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(human_table(ws, report))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_BY_VERDICT[report.verdict]


def main(argv=None) -> int:
    try:
        return run_command(sys.argv[1:] if argv is None else argv)
    except FinslerLabError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())

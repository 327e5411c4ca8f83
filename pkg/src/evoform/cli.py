"""``evoform`` command-line front end.

Every subcommand writes one JSON report (sorted keys) to stdout or ``--out``.
Exit status: 0 on success, 1 for bad input, 2 when the analysis itself fails.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

from . import expr as ex
from .closure import ClosureError, classify_form, find_potential
from .evolution import (EXAMPLES, DegeneracyFunctional, EvolutionError, RestrictionNotClosedError,
                        build_relation, extract_identical_relation, find_degeneracy_loci,
                        integration_cascade, nonidentity_norm, run_example)
from .forms import FormError, exterior_derivative, wedge
from .geometry import Chart, GeometryError, connection_commutator, hodge_star
from .io import (SchemaError, chart_from_doc, dumps, form_from_doc, form_to_doc, pseudo_from_doc, pseudo_to_doc,
                 read_json, relation_from_doc)
from .selftest import run_selftest

SUBCOMMANDS = ("derive", "wedge", "hodge", "commutator", "classify", "potential", "evolve", "loci",
               "extract", "cascade", "example", "selftest")


class InputError(ValueError):
    """Bad arguments or documents (exit 1)."""


class AnalysisFailure(RuntimeError):
    """The computation ran but the requested property does not hold (exit 2)."""


@dataclass
class RunConfig:
    subcommand: str
    form: str | None = None
    form2: str | None = None
    chart: str | None = None
    relation: str | None = None
    pseudo: list = field(default_factory=list)
    functional: str | None = None
    name: str | None = None
    tol: float = ex.DEFAULT_TOL
    trials: int = ex.DEFAULT_TRIALS
    seed: int = ex.DEFAULT_SEED
    grid: int = 64
    out: str | None = None

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise InputError(f"unknown subcommand {self.subcommand!r}")
        if not self.tol > 0:
            raise InputError("--tol must be positive")
        if self.trials < 1:
            raise InputError("--trials must be at least 1")
        if self.grid < 2:
            raise InputError("--grid must be at least 2")


def build_parser():
    p = argparse.ArgumentParser(prog="evoform", description="Symbolic exterior-form toolkit.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("name", nargs="?", help="example name (for `example`)")
    p.add_argument("--form")
    p.add_argument("--form2")
    p.add_argument("--chart")
    p.add_argument("--relation")
    p.add_argument("--pseudo", action="append", default=[],
                   help="pseudostructure document; repeat to give a cascade chain")
    p.add_argument("--functional", help="degeneracy functional document for `loci`")
    p.add_argument("--tol", type=float, default=ex.DEFAULT_TOL)
    p.add_argument("--trials", type=int, default=ex.DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--out")
    return p


def config_from_args(ns, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    seed = ns.seed
    if seed is None:
        raw = environ.get("EVOFORM_SEED")
        try:
            seed = int(raw) if raw not in (None, "") else ex.DEFAULT_SEED
        except ValueError:
            raise InputError(f"EVOFORM_SEED must be an integer, got {raw!r}") from None
    return RunConfig(ns.subcommand, ns.form, ns.form2, ns.chart, ns.relation, list(ns.pseudo), ns.functional,
                     ns.name, ns.tol, ns.trials, seed, ns.grid, ns.out)


# -- document helpers ---------------------------------------------------------

def _need(cfg, attr):
    val = getattr(cfg, attr)
    if not val:
        raise InputError(f"`{cfg.subcommand}` needs --{attr}")
    return val


def _chart(cfg, coords=None, required=False):
    if cfg.chart:
        c = chart_from_doc(read_json(cfg.chart))
        if coords is not None and tuple(coords) != c.coords:
            raise InputError(f"chart coordinates {c.coords} do not match the form's {tuple(coords)}")
        return c
    if required:
        raise InputError(f"`{cfg.subcommand}` needs --chart")
    return Chart(coords) if coords is not None else None


def _form(cfg, attr="form"):
    chart = chart_from_doc(read_json(cfg.chart)) if cfg.chart else None
    return form_from_doc(read_json(_need(cfg, attr)), None if chart is None else chart.coords)


def _relation(cfg):
    return relation_from_doc(read_json(_need(cfg, "relation")))


def _pseudos(cfg, chart):
    """Load the pseudostructure chain; stage j lives on stage j-1's parameter chart."""
    out = []
    for path in cfg.pseudo:
        ps = pseudo_from_doc(read_json(path), chart)
        out.append(ps)
        if ps.has_parametrization:
            chart = ps.param_chart()
    return out


def _functional(cfg, chart):
    if cfg.functional:
        doc = read_json(cfg.functional)
        kind = doc.get("kind", "raw") if isinstance(doc, dict) else None
        try:
            if kind == "raw":
                return DegeneracyFunctional.raw(ex.parse_expr(doc["expr"], chart.coords))
            if kind == "determinant":
                return DegeneracyFunctional.determinant(doc["matrix"], chart.coords)
            if kind == "jacobian_det":
                return DegeneracyFunctional.jacobian_det(doc["map"], chart.coords)
            if kind == "poisson_bracket":
                return DegeneracyFunctional.poisson_bracket(doc["f"], doc["g"], [tuple(p) for p in doc["pairs"]],
                                                            chart.coords)
        except KeyError as err:
            raise SchemaError(f"/{err.args[0]}", "missing required key") from None
        raise SchemaError("/kind", f"unknown functional kind {kind!r}")
    t = _form(cfg)
    if t.degree != 0:
        raise InputError("a functional given via --form must be a 0-form")
    return DegeneracyFunctional.raw(t.coeff(()))


# -- subcommands ----------------------------------------------------------------

def cmd_derive(cfg):
    return form_to_doc(exterior_derivative(_form(cfg)))


def cmd_wedge(cfg):
    return form_to_doc(wedge(_form(cfg), _form(cfg, "form2")))


def cmd_hodge(cfg):
    t = _form(cfg)
    return form_to_doc(hodge_star(t, _chart(cfg, t.coords, required=True)))


def cmd_commutator(cfg):
    t = _form(cfg)
    return connection_commutator(t, _chart(cfg, t.coords, required=True), seed=cfg.seed).to_dict()


def cmd_classify(cfg):
    t = _form(cfg)
    chart = _chart(cfg, t.coords)
    ps = _pseudos(cfg, chart)[0] if cfg.pseudo else None
    return classify_form(t, ps, chart, cfg.trials, cfg.tol, cfg.seed).to_dict()


def cmd_potential(cfg):
    t = _form(cfg)
    chart = _chart(cfg, t.coords)
    pot = find_potential(t, chart.sample_box, cfg.trials, cfg.tol, cfg.seed, star_shaped=chart.star_shaped)
    return {"potential": form_to_doc(pot), "form": form_to_doc(t)}


def cmd_evolve(cfg):
    rel = build_relation(_relation(cfg), cfg.trials, cfg.tol, cfg.seed)
    d = rel.to_dict()
    d["nonidentity_norm"] = nonidentity_norm(rel, seed=cfg.seed)
    return d


def cmd_loci(cfg):
    if cfg.functional:
        chart = _chart(cfg, required=True)
    else:
        chart = _chart(cfg, _form(cfg).coords)
    loci = find_degeneracy_loci(_functional(cfg, chart), chart, cfg.grid, tol=min(cfg.tol, 1e-10))
    comps = []
    for ps in loci:
        comps.append({"constraint": pseudo_to_doc(ps)["constraints"], "count": len(ps.points),
                      "points": ps.points.tolist(), "max_residual": float(ps.residuals.max())})
    return {"grid": cfg.grid, "grid_spacing": loci[0].grid_spacing if loci else None,
            "components": len(loci), "loci": comps}


def cmd_extract(cfg):
    rel = build_relation(_relation(cfg), cfg.trials, cfg.tol, cfg.seed)
    if not cfg.pseudo:
        raise InputError("`extract` needs --pseudo")
    ps = _pseudos(cfg, rel.chart)[0]
    ir = extract_identical_relation(rel, ps, cfg.tol, cfg.trials, cfg.seed)
    d = ir.to_dict()
    d["pseudostructure"] = pseudo_to_doc(ps)
    return d


def cmd_cascade(cfg):
    rel = build_relation(_relation(cfg), cfg.trials, cfg.tol, cfg.seed)
    report = integration_cascade(rel, _pseudos(cfg, rel.chart), cfg.tol, cfg.trials, cfg.seed)
    return report.to_dict()


def cmd_example(cfg):
    if cfg.name not in EXAMPLES:
        raise InputError(f"`example` needs one of: {', '.join(EXAMPLES)}")
    kw = {"eikonal": {"grid": cfg.grid},
          "maxwell": {"trials": cfg.trials, "tol": cfg.tol, "seed": cfg.seed}}.get(cfg.name, {"seed": cfg.seed})
    rep = run_example(cfg.name, **kw)
    checks = {"hamiltonian": ("match",), "maxwell": ("closed", "dual_closed"),
              "eikonal": ("within_2h",), "entropy_gas": ("identical",)}[cfg.name]
    rep["ok"] = all(bool(rep[k]) for k in checks)
    return rep


def cmd_selftest(cfg):
    return run_selftest(cfg.seed, cfg.trials, cfg.tol)


COMMANDS = {name: globals()["cmd_" + name] for name in SUBCOMMANDS}


def _failed(sub, report):
    if sub == "selftest":
        return not report["passed"]
    if sub == "example":
        return not report["ok"]
    if sub == "cascade":
        # an empty chain is a valid "nothing realized" answer; a broken chain is not
        return not report["completed"] and report["message"].startswith("stopped")
    return False


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as err:
        return 0 if err.code == 0 else 1
    try:
        cfg = config_from_args(ns)
        report = COMMANDS[cfg.subcommand](cfg)
    except (RestrictionNotClosedError, ClosureError, AnalysisFailure, ex.SamplingError) as err:
        print(f"evoform: analysis failed: {err}", file=sys.stderr)
        return 2
    except SchemaError as err:
        print(f"evoform: invalid document at {err}", file=sys.stderr)
        return 1
    except (InputError, FormError, GeometryError, EvolutionError, ex.ExprError, ValueError, OSError) as err:
        print(f"evoform: {err}", file=sys.stderr)
        return 1
    _emit(dumps(report), cfg.out)
    return 2 if _failed(cfg.subcommand, report) else 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Every subcommand accepts ``--config FILE`` with the keys of
:class:`limitcones.io.RunConfig`; explicit flags override the file. Results
go to stdout (or ``--output``) as JSON. Exit codes: 0 success, 1 invalid
input, 2 budget exceeded, 3 infeasible construction. Errors are reported on
stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import config
from .cartan import LinearForm, cartan_projection, jordan_projection, normalize_theta
from .cones import SampledCone, construct_admissible_cone
from .deformation import (
    FoldedNeighbourhood,
    anchor_direction,
    build_section7_family,
    build_sym3_family,
    run_continuity_experiment,
    run_growth_continuity,
)
from .errors import InvalidInputError, LimitConeError
from .invariants import (
    anosov_certificate,
    estimate_critical_exponent,
    estimate_growth_indicator,
    estimate_limit_cone,
)
from .io import (
    RunConfig,
    ball_rows,
    load_cone,
    load_group,
    load_matrix,
    read_json,
    write_csv,
    write_json,
)
from .plot import cone_layers, render_svg
from .subgroups import sharpness_test, subgroup_cone
from .words import compute_ball, power_cartan_projection

__all__ = ["main", "build_parser", "parse_form", "parse_theta", "make_family"]


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors, which is our budget code
    def error(self, message):
        raise InvalidInputError(message)


def parse_theta(text, n):
    if text is None or (isinstance(text, str) and text.strip().lower() in ("all", "pi", "")):
        return tuple(range(1, n))
    if isinstance(text, str):
        text = text.strip()
        items = json.loads(text) if text.startswith("[") else [t for t in re.split(r"[,\s]+", text) if t]
    else:
        items = text
    try:
        return normalize_theta([int(t) for t in items], n)
    except ValueError as exc:
        raise InvalidInputError(f"bad theta {text!r}: {exc}") from None


def parse_form(text, n):
    """``norm``, ``2rho``, ``alpha<i>``, ``omega<k>``, ``e<i>`` or a JSON coefficient list."""
    if isinstance(text, (list, tuple)):
        return LinearForm(text)
    t = str(text).strip().lower()
    if t == "norm":
        return "norm"
    if t in ("2rho", "two_rho"):
        return LinearForm.two_rho(n)
    m = re.fullmatch(r"(alpha|omega|e)(\d+)", t)
    if m:
        kind, i = m.group(1), int(m.group(2))
        maker = {"alpha": LinearForm.simple_root, "omega": LinearForm.fundamental_weight,
                 "e": LinearForm.coordinate}[kind]
        return maker(i, n)
    if t.startswith("["):
        return LinearForm(json.loads(t))
    raise InvalidInputError(f"unknown form {text!r}")


def make_family(cfg):
    p = dict(cfg.params)
    if cfg.schedule is not None:
        p["schedule"] = tuple(cfg.schedule)
    p.setdefault("seed", cfg.seed)
    if cfg.family == "sym3-schottky":
        allowed = {"translation_lengths", "separation", "schedule", "seed"}
        builder = build_sym3_family
    else:
        allowed = {"v", "w1", "conjugator", "schedule", "seed"}
        builder = build_section7_family
    unknown = set(p) - allowed
    if unknown:
        raise InvalidInputError(f"unknown {cfg.family} parameters: {sorted(unknown)}")
    return builder(**p)


def _emit(obj, path):
    write_json(obj, path)


def _cmd_project(args, cfg):
    g = load_matrix(args.matrix)
    if args.power and args.power > 1:
        mu = power_cartan_projection(g, args.power)
        out = {"power": args.power, "mu": mu}
    else:
        out = {"mu": cartan_projection(g), "lambda": jordan_projection(g)}
    _emit(out, cfg.output)


def _group(cfg):
    if cfg.group is None:
        raise InvalidInputError("--group is required")
    return load_group(cfg.group)


def _radius(cfg):
    if cfg.radius is None:
        raise InvalidInputError("--ball-radius is required")
    return cfg.radius


def _cmd_enumerate(args, cfg):
    ball = compute_ball(_group(cfg), _radius(cfg), jordan=args.jordan, workers=cfg.workers,
                        budget=cfg.budget)
    if args.count_only:
        sys.stdout.write(f"{len(ball)}\n")
        return
    header, rows = ball_rows(ball)
    text = write_csv(header, rows, cfg.output or cfg.csv)
    if not (cfg.output or cfg.csv):
        sys.stdout.write(text)


def _cmd_limit_cone(args, cfg):
    group = _group(cfg)
    theta = parse_theta(cfg.theta, group.n) if cfg.kind == "theta" else None
    est = estimate_limit_cone(group, _radius(cfg), cfg.cutoff, cfg.kind, theta, workers=cfg.workers)
    _emit(est, cfg.output)
    if cfg.svg:
        Path(cfg.svg).write_text(render_svg(cone_layers(est.cone, "estimate"), group.n))


def _cmd_growth(args, cfg):
    group = _group(cfg)
    theta = parse_theta(cfg.theta, group.n)
    if cfg.v is None:
        raise InvalidInputError("--v is required")
    est = estimate_growth_indicator(group, theta, cfg.v, cfg.eps_list, _radius(cfg), workers=cfg.workers)
    _emit(est, cfg.output)
    if cfg.csv:
        eps = est.cone_half_angles
        ts = est.tables[eps[0]][0]
        rows = [[t] + [int(est.tables[e][1][i]) for e in eps] for i, t in enumerate(ts)]
        write_csv(["T"] + [f"count_eps_{e:g}" for e in eps], rows, cfg.csv)


def _cmd_exponent(args, cfg):
    group = _group(cfg)
    form = parse_form(cfg.form if cfg.form is not None else "norm", group.n)
    est = estimate_critical_exponent(group, form, _radius(cfg), workers=cfg.workers)
    _emit(est, cfg.output)
    if cfg.csv:
        ts, counts = est.table
        write_csv(["T", "count"], [[t, int(c)] for t, c in zip(ts, counts)], cfg.csv)


def _cmd_anosov(args, cfg):
    group = _group(cfg)
    cert = anosov_certificate(group, parse_theta(cfg.theta, group.n), _radius(cfg), workers=cfg.workers)
    _emit(cert, cfg.output)


def _cmd_sharp(args, cfg):
    if cfg.cone is not None:
        cone = load_cone(cfg.cone)
        if not isinstance(cone, SampledCone):
            raise InvalidInputError("sharp needs a sampled cone (a 'directions' list)")
    else:
        cone = estimate_limit_cone(_group(cfg), _radius(cfg), cfg.cutoff, workers=cfg.workers).cone
    h = cfg.subgroup
    if isinstance(h, str) and (h.lstrip().startswith("{") or Path(h).exists()):
        h = read_json(h)
    rep = sharpness_test(cone, subgroup_cone(h), cfg.threshold)
    _emit(rep, cfg.output)


def _cmd_admissible(args, cfg):
    if cfg.cone is None:
        raise InvalidInputError("--cone is required")
    d = load_cone(cfg.cone)
    if not isinstance(d, SampledCone):
        raise InvalidInputError("admissible needs the cone D as a 'directions' list")
    theta = parse_theta(cfg.theta, d.n)
    cone = construct_admissible_cone(d, theta, cfg.eps, seed=cfg.seed)
    cone.extreme_rays()
    out = {"schema": config.SCHEMA_VERSION, "cone": cone.to_dict(), "report": cone.report,
           "theta": list(theta), "eps": cfg.eps}
    _emit(out, cfg.output)
    if cfg.svg:
        Path(cfg.svg).write_text(render_svg(cone_layers(cone, "admissible") + cone_layers(d, "D"), d.n))


def _cmd_deform(args, cfg):
    fam = make_family(cfg)
    nbhd = anchor = None
    if fam.name == "sl3-block-deformation":
        nbhd = FoldedNeighbourhood()
        anchor = anchor_direction(fam)
    rep = run_continuity_experiment(fam, cfg.ladder, cfg.cutoff, neighbourhood=nbhd, anchor=anchor,
                                    budget=cfg.budget, workers=cfg.workers, keep_cones=bool(cfg.svg))
    out = {"family": fam.to_dict(), "report": rep.to_dict()}
    if cfg.growth_directions is not None and rep.complete:
        radius = cfg.radius or max(cfg.ladder)
        table = run_growth_continuity(fam, parse_theta(cfg.theta, fam.base.n),
                                      cfg.growth_directions, radius, eps_list=cfg.eps_list,
                                      workers=cfg.workers)
        out["growth"] = table.to_dict()
    _emit(out, cfg.output)
    if cfg.csv:
        rows = [r.to_dict() for r in rep.rows]
        header = list(rows[0]) if rows else ["t", "radius"]
        write_csv(header, [[json.dumps(r[k]) if isinstance(r[k], (list, dict)) or r[k] is None else r[k]
                            for k in header] for r in rows], cfg.csv)
    if cfg.svg:
        outdir = Path(cfg.svg)
        outdir.mkdir(parents=True, exist_ok=True)
        top = max(rep.ladder)
        for t in rep.schedule:
            if (t, top) not in rep.cones:
                continue
            layers = cone_layers(rep.cones[(t, top)].cone, f"t={t:g}")
            if nbhd is not None:
                layers = cone_layers(nbhd.plane, "folded plane") + layers
            (outdir / f"cone_t{t:g}.svg").write_text(render_svg(layers, fam.base.n, f"t = {t:g}, N = {top}"))
    if not rep.complete:
        sys.stderr.write(json.dumps({"warning": "partial report", "message": rep.error}) + "\n")
        return 2
    return 0


def _cmd_plot(args, cfg):
    sources = args.cone or ([cfg.cone] if cfg.cone is not None else [])
    if not sources:
        raise InvalidInputError("--cone is required")
    layers, n = [], None
    for k, src in enumerate(sources):
        cone = load_cone(src)
        n = cone.n if n is None else n
        if cone.n != n:
            raise InvalidInputError("all cones in one picture must have the same size")
        layers += cone_layers(cone, Path(str(src)).stem if not str(src).lstrip().startswith("{") else None)
    text = render_svg(layers, n, args.title)
    if cfg.output and cfg.output != "-":
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


COMMANDS = {
    "project": _cmd_project,
    "enumerate": _cmd_enumerate,
    "limit-cone": _cmd_limit_cone,
    "growth": _cmd_growth,
    "exponent": _cmd_exponent,
    "anosov": _cmd_anosov,
    "sharp": _cmd_sharp,
    "admissible": _cmd_admissible,
    "deform": _cmd_deform,
    "plot": _cmd_plot,
}

# flag dest -> RunConfig field
_FIELDS = {
    "group", "family", "params", "radius", "cutoff", "kind", "theta", "form", "v", "eps_list", "eps",
    "threshold", "budget", "seed", "workers", "ladder", "schedule", "subgroup", "cone",
    "growth_directions", "output", "csv", "svg",
}


def _floats(text):
    text = text.strip()
    if text.startswith("["):
        return [float(x) for x in json.loads(text)]
    return [float(x) for x in re.split(r"[,\s]+", text) if x]


def _ints(text):
    return [int(x) for x in _floats(text)]


def build_parser():
    p = _Parser(prog="limitcones", description="Limit cones and asymptotic invariants of matrix groups.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, *extra):
        sp.add_argument("--config", help="JSON file with run parameters")
        sp.add_argument("--output", "-o", default=None)
        for name in extra:
            FLAGS[name](sp)
        return sp

    FLAGS = {
        "group": lambda sp: sp.add_argument("--group", default=None, help="group JSON file"),
        "radius": lambda sp: sp.add_argument("--ball-radius", "--radius", dest="radius", type=int, default=None),
        "cutoff": lambda sp: sp.add_argument("--cutoff", type=float, default=None),
        "theta": lambda sp: sp.add_argument("--theta", default=None, help="e.g. 1,3 or all"),
        "workers": lambda sp: sp.add_argument("--workers", type=int, default=None),
        "budget": lambda sp: sp.add_argument("--budget", type=int, default=None),
        "csv": lambda sp: sp.add_argument("--csv", default=None),
        "svg": lambda sp: sp.add_argument("--svg", default=None),
        "seed": lambda sp: sp.add_argument("--seed", type=int, default=None),
    }

    sp = common(sub.add_parser("project", help="Cartan and Jordan projections of a matrix"))
    sp.add_argument("--matrix", required=True, help="JSON array of arrays, or a file")
    sp.add_argument("--power", type=int, default=None, help="Cartan projection of the p-th power")

    sp = common(sub.add_parser("enumerate", help="enumerate a word ball"), "group", "radius", "workers",
                "budget", "csv")
    sp.add_argument("--count-only", action="store_true")
    sp.add_argument("--jordan", action="store_true")

    sp = common(sub.add_parser("limit-cone", help="estimate a limit cone"), "group", "radius", "cutoff",
                "theta", "workers", "svg")
    sp.add_argument("--kind", choices=["cartan", "jordan", "theta"], default=None)

    sp = common(sub.add_parser("growth", help="estimate a growth indicator"), "group", "radius", "theta",
                "workers", "csv")
    sp.add_argument("--v", type=_floats, default=None)
    sp.add_argument("--eps-list", type=_floats, default=None)

    sp = common(sub.add_parser("exponent", help="estimate a critical exponent"), "group", "radius",
                "workers", "csv")
    sp.add_argument("--form", default=None, help="norm, 2rho, alpha<i>, omega<k>, e<i> or a JSON list")

    common(sub.add_parser("anosov", help="Anosov certificate"), "group", "radius", "theta", "workers")

    sp = common(sub.add_parser("sharp", help="sharpness against a reductive subgroup"), "group", "radius",
                "cutoff", "workers")
    sp.add_argument("--cone", default=None)
    sp.add_argument("--subgroup", default=None, help="registered name or rays JSON")
    sp.add_argument("--threshold", type=float, default=None)

    sp = common(sub.add_parser("admissible", help="construct an admissible cone"), "theta", "svg", "seed")
    sp.add_argument("--cone", default=None, help="the cone D as a directions JSON")
    sp.add_argument("--eps", type=float, default=None)

    sp = common(sub.add_parser("deform", help="run a deformation experiment"), "cutoff", "radius", "theta",
                "workers", "budget", "csv", "svg", "seed")
    sp.add_argument("--family", default=None, choices=list(RunConfig.FAMILIES))
    sp.add_argument("--params", type=json.loads, default=None)
    sp.add_argument("--ladder", type=_ints, default=None)
    sp.add_argument("--schedule", type=_floats, default=None)
    sp.add_argument("--growth-directions", type=json.loads, default=None)
    sp.add_argument("--eps-list", type=_floats, default=None)

    sp = common(sub.add_parser("plot", help="draw cones in the chamber triangle"))
    sp.add_argument("--cone", action="append", default=None)
    sp.add_argument("--title", default=None)
    return p


def _config_from(args):
    d = dict(read_json(args.config)) if getattr(args, "config", None) else {}
    for key, val in vars(args).items():
        if key in _FIELDS and val is not None:
            if key == "cone" and isinstance(val, list):
                val = val[0]
            d[key] = val
    d["command"] = args.command
    return RunConfig.from_dict(d)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = _config_from(args)
        code = COMMANDS[args.command](args, cfg)
        return int(code or 0)
    except LimitConeError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        if getattr(exc, "root", None) is not None:
            err["root"] = exc.root
        sys.stderr.write(json.dumps(err) + "\n")
        return exc.exit_code
    except (json.JSONDecodeError, ValueError) as exc:
        sys.stderr.write(json.dumps({"error": "InvalidInputError", "message": str(exc), "exit_code": 1}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())

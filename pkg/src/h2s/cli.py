"""The h2s command line: fit, plan, compile, render, pipeline, serve."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .docio import canonical_dumps
from .model_io import EngineConfig, load_model
from .projective import Camera
from .tutorial import ABILITIES

log = logging.getLogger("h2s")


def _setup_logging() -> None:
    level = os.environ.get("H2S_LOG", "INFO").upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )


def parse_view(text: str) -> tuple:
    """eye,target,up,fov as ten comma-separated numbers."""
    parts = text.split(",")
    if len(parts) != 10:
        raise argparse.ArgumentTypeError(
            "--view wants ex,ey,ez,tx,ty,tz,ux,uy,uz,fov (10 numbers)")
    try:
        v = [float(p) for p in parts]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"--view: {e}") from e
    return tuple(v[0:3]), tuple(v[3:6]), tuple(v[6:9]), v[9]


def parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as e:
        raise argparse.ArgumentTypeError(
            f"--size wants WxH, e.g. 800x600: {e}") from e


def _camera(args) -> Camera:
    eye, target, up, fov = args.view
    w, h = args.size
    return Camera(eye=eye, target=target, up=up, fov_deg=fov,
                  width=w, height=h)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="h2s",
        description="Turn a part-segmented model into a step-by-step "
                    "perspective drawing tutorial.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_view(p):
        p.add_argument("--view", type=parse_view, required=True,
                       help="ex,ey,ez,tx,ty,tz,ux,uy,uz,fov")
        p.add_argument("--size", type=parse_size, default=(800, 600),
                       help="image size WxH (default 800x600)")
        p.add_argument("--ability", default="novice",
                       choices=[a.lower() for a in ABILITIES])

    p = sub.add_parser("fit", help="fit primitives and detect relations")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="write the fit document here (default stdout)")

    p = sub.add_parser("plan", help="generate candidates and solve selection")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="write the plan document here (default stdout)")
    p.add_argument("--greedy", action="store_true",
                   help="use the greedy baseline instead of the exact solver")
    p.add_argument("--time-limit", type=float, default=None,
                   help="seconds before the solver returns its incumbent")
    p.add_argument("--dump-relations", action="store_true",
                   help="print detected relations to stdout and stop")
    p.add_argument("--dump-candidates", action="store_true",
                   help="print the candidate document to stdout and stop")

    p = sub.add_parser("compile", help="compile a tutorial for one viewpoint")
    p.add_argument("--plan", required=True)
    add_view(p)
    p.add_argument("--output", help="write the tutorial document here (default stdout)")

    p = sub.add_parser("render", help="render per-step sheets from a tutorial")
    p.add_argument("--tutorial", required=True)
    p.add_argument("--outdir", required=True)

    p = sub.add_parser("pipeline", help="fit, plan, compile and render in one go")
    p.add_argument("--input", required=True)
    add_view(p)
    p.add_argument("--outdir", required=True)
    p.add_argument("--greedy", action="store_true")
    p.add_argument("--time-limit", type=float, default=None)

    p = sub.add_parser("serve", help="HTTP service for the viewer")
    p.add_argument("--plan", required=True)
    p.add_argument("--model", help="optional model override (defaults to the plan's)")
    p.add_argument("--port", type=int, default=8042)
    return ap


def _write_out(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_fit(args) -> int:
    from .model_io import normalize_model, validate_model
    from .primitives import fit_all
    from .relations import detect_relations

    model = load_model(args.input)
    validate_model(model)
    model = normalize_model(model)
    config = EngineConfig()
    prims = fit_all(model, config)
    relations = detect_relations(model, prims, config)
    doc = {
        "kind": "fit",
        "primitives": [prims[p].to_dict() for p in sorted(prims)],
        "relations": [r.to_dict() for r in relations],
    }
    _write_out(canonical_dumps(doc), args.output)
    log.info("fit: %d parts, %d relations", len(prims), len(relations))
    return 0


def cmd_plan(args) -> int:
    from .candidates import generate_all
    from .model_io import normalize_model, validate_model
    from .pipeline import build_plan, export_plan
    from .primitives import fit_all
    from .relations import detect_relations

    model = load_model(args.input)

    if args.dump_relations or args.dump_candidates:
        validate_model(model)
        model = normalize_model(model)
        config = EngineConfig()
        prims = fit_all(model, config)
        relations = detect_relations(model, prims, config)
        if args.dump_relations:
            for r in relations:
                print(f"{r.kind} parts {r.part_a},{r.part_b} axis {r.axis} "
                      f"deviation {r.deviation:.3g}")
            return 0
        candidates = generate_all(model, prims, relations, config)
        doc = {
            "kind": "candidates",
            "candidates": [c.to_dict() for c in candidates],
        }
        sys.stdout.write(canonical_dumps(doc))
        return 0

    plan = build_plan(
        model, greedy=args.greedy, time_limit=args.time_limit)
    _write_out(export_plan(plan), args.output)
    log.info(
        "plan: %d candidates, objective %.6f, optimal=%s, method=%s",
        len(plan.candidates), plan.selection.objective,
        plan.selection.optimal, plan.selection.method)
    return 0


def cmd_compile(args) -> int:
    from .pipeline import compile_from_plan, import_plan
    from .render import export_tutorial

    with open(args.plan, "r", encoding="utf-8") as f:
        plan = import_plan(f.read())
    tut = compile_from_plan(plan, _camera(args), args.ability)
    _write_out(export_tutorial(tut), args.output)
    log.info("compile: %d steps, %d guides, ability %s",
             len(tut.steps), len(tut.guides), tut.ability)
    return 0


def cmd_render(args) -> int:
    from .render import import_tutorial, render_all

    with open(args.tutorial, "r", encoding="utf-8") as f:
        tut = import_tutorial(f.read())
    paths = render_all(tut, args.outdir)
    log.info("render: wrote %d files to %s", len(paths), args.outdir)
    return 0


def cmd_pipeline(args) -> int:
    from .pipeline import run_full

    model = load_model(args.input)
    info = run_full(
        model, _camera(args), args.ability, args.outdir,
        greedy=args.greedy, time_limit=args.time_limit)
    log.info(
        "pipeline: objective %.6f optimal=%s steps=%d -> %s",
        info["objective"], info["optimal"], info["steps"], args.outdir)
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(args.plan, port=args.port, model_path=args.model)
    return 0


_COMMANDS = {
    "fit": cmd_fit,
    "plan": cmd_plan,
    "compile": cmd_compile,
    "render": cmd_render,
    "pipeline": cmd_pipeline,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError) as e:
        log.error("%s", e)
        return 1
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())

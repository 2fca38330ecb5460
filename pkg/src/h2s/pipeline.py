"""End-to-end orchestration and the plan document.

A plan records everything view-independent: the normalized model, the
fitted primitives, detected relations, the full candidate set, and the
selection result. Compilation and rendering read the plan plus a camera,
so one offline solve serves any number of viewpoints.
"""

from __future__ import annotations

from dataclasses import dataclass

from .candidates import Candidate, generate_all
from .docio import canonical_dumps, content_hash, loads
from .model_io import (
    EngineConfig,
    SegmentedModel,
    model_from_doc,
    model_to_doc,
    normalize_model,
    validate_model,
)
from .primitives import Primitive, fit_all
from .projective import Camera
from .relations import Relation, detect_relations
from .selection import SelectionProblem, SelectionResult, greedy_select, solve
from .tutorial import Tutorial, compile_tutorial

PLAN_KIND = "plan"


class PlanDocumentError(ValueError):
    pass


@dataclass
class Plan:
    model: SegmentedModel
    config: EngineConfig
    primitives: dict[int, Primitive]
    relations: list[Relation]
    candidates: list[Candidate]
    selection: SelectionResult

    def __post_init__(self):
        self.by_id = {c.id: c for c in self.candidates}

    def chosen_candidates(self) -> dict[int, Candidate]:
        return {p: self.by_id[c] for p, c in self.selection.chosen.items()}

    def original_intervals(self) -> dict[int, tuple]:
        return {p: prim.intervals for p, prim in self.primitives.items()}


def build_plan(
    model: SegmentedModel,
    config: EngineConfig | None = None,
    greedy: bool = False,
    time_limit: float | None = None,
) -> Plan:
    """Fit, relate, generate and select; the full view-independent stage."""
    config = config or EngineConfig()
    config.validate()
    validate_model(model)
    model = normalize_model(model)
    prims = fit_all(model, config)
    relations = detect_relations(model, prims, config)
    candidates = generate_all(model, prims, relations, config)
    problem = SelectionProblem(candidates)
    if greedy:
        result = greedy_select(problem)
    else:
        result = solve(problem, time_limit=time_limit)
    return Plan(
        model=model,
        config=config,
        primitives=prims,
        relations=relations,
        candidates=candidates,
        selection=result,
    )


def export_plan(plan: Plan) -> str:
    sel = plan.selection
    doc = {
        "kind": PLAN_KIND,
        "config": plan.config.to_dict(),
        "config_hash": content_hash(plan.config.to_dict()),
        "model": model_to_doc(plan.model),
        "primitives": [
            plan.primitives[p].to_dict() for p in sorted(plan.primitives)
        ],
        "relations": [r.to_dict() for r in plan.relations],
        "candidates": [c.to_dict() for c in plan.candidates],
        "selection": sel.to_dict(),
        "stats": {
            "parts": len(plan.primitives),
            "relations": len(plan.relations),
            "candidates": len(plan.candidates),
            "nodes": sel.nodes,
        },
    }
    return canonical_dumps(doc)


def import_plan(text: str) -> Plan:
    try:
        doc = loads(text)
    except ValueError as e:
        raise PlanDocumentError(f"not a valid document: {e}") from e
    if not isinstance(doc, dict) or doc.get("kind") != PLAN_KIND:
        raise PlanDocumentError("document kind is not 'plan'")
    try:
        config = EngineConfig.from_dict(doc["config"])
        model = model_from_doc(doc["model"])
        prims = {}
        for d in doc["primitives"]:
            p = Primitive.from_dict(d)
            prims[p.part_id] = p
        relations = [Relation.from_dict(d) for d in doc["relations"]]
        candidates = [Candidate.from_dict(d) for d in doc["candidates"]]
        sel_d = doc["selection"]
        selection = SelectionResult(
            chosen={int(k): int(v) for k, v in sel_d["chosen"].items()},
            objective=float(sel_d["objective"]),
            optimal=bool(sel_d["optimal"]),
            method=str(sel_d["method"]),
            order=[int(p) for p in sel_d["order"]],
            order_edges=[tuple(e) for e in sel_d["order_edges"]],
            nodes=int(doc.get("stats", {}).get("nodes", 0)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise PlanDocumentError(f"malformed plan document: {e}") from e
    return Plan(
        model=model,
        config=config,
        primitives=prims,
        relations=relations,
        candidates=candidates,
        selection=selection,
    )


def compile_from_plan(plan: Plan, camera: Camera, ability: str) -> Tutorial:
    return compile_tutorial(
        plan.model,
        plan.chosen_candidates(),
        camera,
        ability,
        plan.config,
        plan.original_intervals(),
    )


def run_full(
    model: SegmentedModel,
    camera: Camera,
    ability: str,
    outdir: str,
    config: EngineConfig | None = None,
    greedy: bool = False,
    time_limit: float | None = None,
) -> dict:
    """fit -> plan -> compile -> render, writing all artifacts to outdir.

    Compilation reads the serialized plan back in, so rendering from the
    written plan file later reproduces these artifacts byte-for-byte.
    """
    import os

    from .render import export_tutorial, render_all

    os.makedirs(outdir, exist_ok=True)
    plan = build_plan(model, config, greedy=greedy, time_limit=time_limit)
    plan_text = export_plan(plan)
    plan_path = os.path.join(outdir, "plan.json")
    with open(plan_path, "w", encoding="utf-8") as f:
        f.write(plan_text)

    plan = import_plan(plan_text)
    tut = compile_from_plan(plan, camera, ability)
    tut_text = export_tutorial(tut)
    tut_path = os.path.join(outdir, "tutorial.json")
    with open(tut_path, "w", encoding="utf-8") as f:
        f.write(tut_text)

    svg_paths = render_all(tut, outdir)
    return {
        "plan_path": plan_path,
        "tutorial_path": tut_path,
        "svg_paths": svg_paths,
        "objective": plan.selection.objective,
        "optimal": plan.selection.optimal,
        "steps": len(tut.steps),
    }

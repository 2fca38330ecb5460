"""
One plan, three skill levels
============================

Compiles the same plan for a novice, an apprentice and a master, and
compares how much scaffolding each tutorial carries.
"""

from collections import Counter

from h2s.pipeline import build_plan, compile_from_plan
from h2s.sample_models import fixture_camera, fixture_model

plan = build_plan(fixture_model("mixer"))
camera = fixture_camera("mixer")

##############################################################################
# Guide steps thin out as skill goes up; the primitive edges to draw
# stay identical, so every tutorial builds the same final drawing.

for ability in ("novice", "apprentice", "master"):
    tut = compile_from_plan(plan, camera, ability)
    kinds = Counter(s.kind for s in tut.steps)
    print(f"{tut.ability:<10} guides={kinds['DrawGuide']:>2} "
          f"edges={kinds['DrawPrimitiveEdge']} "
          f"erases={kinds['EraseGuides']} total={len(tut.steps)}")

##############################################################################
# Masters still see vanishing points: perspective setup is never
# skipped even when all ratio constructions are.

master = compile_from_plan(plan, camera, "master")
print(f"first step: {master.steps[0].kind}")
print(master.steps[0].instruction_text)

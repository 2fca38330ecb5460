"""
Candidate geometry at easy ratios
=================================

Inspects the candidates generated for one part of the chain fixture:
which edges got re-anchored, at which ratio of the parent, and what
each variant costs.
"""

from collections import Counter

from h2s.pipeline import build_plan
from h2s.sample_models import fixture_model

plan = build_plan(fixture_model("chain4"))

##############################################################################
# Each candidate perturbs the original box by snapping edges to simple
# fractions of a parent dimension. Level counts how many guided edges
# the variant has.

part = 1
cands = [c for c in plan.candidates if c.part_id == part]
print(f"part {part}: {len(cands)} candidates")
print(Counter(c.level for c in cands))

##############################################################################
# The level-0 candidate is the unmodified original; its deviation cost
# is zero but every dimension must be judged by eye.

orig = next(c for c in cands if c.level == 0)
print(f"original: e_d={orig.e_d}, e_e={orig.e_e}")

best = min(cands, key=lambda c: c.cost)
print(f"cheapest: level {best.level}, e_d={best.e_d:.4f}, "
      f"e_e={best.e_e:.4f}")
for spec in best.all_specs():
    print(f"  {spec.feature} at {spec.ratio} of part {spec.parent}")

##############################################################################
# The solver may still prefer a pricier variant if it unlocks cheap
# children further down the dependency chain.

chosen = plan.by_id[plan.selection.chosen[part]]
print(f"chosen for part {part}: level {chosen.level}, "
      f"cost {chosen.cost:.4f}")

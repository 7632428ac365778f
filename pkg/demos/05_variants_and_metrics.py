"""
Variants and the summary table
==============================

Generate seeded variants of a family, confirm each is solvable, and build
the metrics table from synthetic episodes.
"""

from clin.metrics import compute_metrics
from clin.world.families import boil
from clin.world.solver import check_solution, solve
from clin.world.variants import make_variants

base, task = boil()
for v in make_variants(base, 4, seed=7, task=task):
    print(v.variant_id, v.name, check_solution(v, task, solve(v, task)))

import sys
sys.path.insert(0, "tests")
from fakes import make_episode  # noqa: E402

records = [make_episode([20, 60, 100], task_id="boil", task_type="L"),
           make_episode([50, 50], task_id="pickplace", task_type="S")]
print(compute_metrics(records).to_csv())

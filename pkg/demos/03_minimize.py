"""
Minimizing the causal action
============================

Random restarts of the two-stage quasi-Newton run, followed by a look at the
best configuration from the viewpoint of one of its points.
"""

from causalfermion.action import causal_action
from causalfermion.geometry import plot_rows
from causalfermion.optimize import multi_restart
from causalfermion.oracles import asymptotic_table
from causalfermion.parametrize import decode

found = {}
for shape in [(1, 2, 4), (1, 2, 16), (1, 4, 4)]:
    best = found[shape] = multi_restart(shape, range(5)).best
    print(f"shape {shape}: best S = {best.final_action:.6f} (seed {best.seed}, {sum(best.iterations)} iterations)")
    for pred in asymptotic_table(*shape):
        print(f"    {pred.label:>18}: {pred.action:.6f}")

# Four points in C^2 end up as rank-one projectors forming a regular tetrahedron.
cfg = decode(found[(1, 2, 4)].final_params)
rep = causal_action(cfg)
print("\nclass counts:", rep.class_counts())
print(f"{'point':>5} {'hat_y0':>9} {'hat_r':>9} class")
for row in plot_rows(cfg, ref_index=0):
    print(f"{row.point_index:5d} {row.hat_y0:9.4f} {row.hat_r:9.4f} {row.causal_class.value}")

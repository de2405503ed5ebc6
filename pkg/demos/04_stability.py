"""Where the explicit scheme stops being stable, and how the energy behaves below that."""

import numpy as np

from stabmaxwell import CoefficientField, build_structured_mesh, cfl_max_tau, run
from stabmaxwell.analysis import EnergyMonitor
from stabmaxwell.checks import smooth_initial_field
from stabmaxwell.timestepper import estimate_stability_threshold, init_state, leapfrog_invariant

vacuum, field = CoefficientField.vacuum(), CoefficientField(m=6)

# Bisection on tau with random starting data, against the a priori bound with C = 2.
print(" l    formula(C=2)  threshold(eps=1)  threshold(m=6)")
for level in (3, 4, 5, 6):
    mesh = build_structured_mesh(level)
    t0 = estimate_stability_threshold(mesh, vacuum, rel_width=1e-5, n_steps=400)
    t6 = estimate_stability_threshold(mesh, field, rel_width=1e-5, n_steps=400)
    print(f" {level}    {cfl_max_tau(mesh, field):.6f}      {t0:.6f}          {t6:.6f}")
print("the published tau = 0.0005 is far below every threshold up to l = 6\n")

# With eps = 1 and no source, leapfrog conserves a staggered quadratic form exactly.
mesh = build_structured_mesh(4)
g = smooth_initial_field(mesh)
values = []
run(mesh, vacuum, None, 0.25, 0.0005, [lambda s, ops: values.append(leapfrog_invariant(s, ops))],
    state=init_state(g, 0 * g, 0.0005))
values = np.array(values)
print(f"leapfrog invariant drift over {values.size - 1} steps: "
      f"{np.abs(values / values[0] - 1).max():.1e}")

# The eps-weighted energy is not conserved once eps varies: the stabilization
# term trades energy with the field through grad(eps).
for f, name in ((vacuum, "eps = 1"), (field, "m = 6  ")):
    monitor = EnergyMonitor()
    run(mesh, f, None, 0.25, 0.0005, [monitor], state=init_state(g, 0 * g, 0.0005))
    e = monitor.totals()
    print(f"{name}: energy min/max relative to start {e.min() / e[0]:.4f} / {e.max() / e[0]:.4f}")

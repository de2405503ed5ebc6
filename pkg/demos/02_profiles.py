"""The permittivity bumps and what they do to the admissibility conditions."""

import numpy as np

from stabmaxwell import CoefficientField
from stabmaxwell.coefficients import check_admissibility, epsilon_at, sup_eps_minus_one

for m in (6, 8, 10, 12):
    field = CoefficientField(m=m)
    sup = sup_eps_minus_one(field)
    rep = check_admissibility(field)
    # the profile does not quite vanish on the edge of its box
    edge_jump = epsilon_at(field, (0.25 + 1e-12, 0.5)) - 1.0
    print(f"m={m:2d}: sup(eps-1)={sup.value:.5f}  max|grad eps|={rep.max_grad_eps:6.2f}  "
          f"gradient condition fails on {100 * rep.violation_fraction:5.1f}% of samples  "
          f"jump at (0.25, 0.5)={edge_jump:.2e}")

# The maximum sits slightly off the first bump's peak, pulled toward the second bump.
field = CoefficientField(m=6)
s = np.arange(0.40, 0.48, 2.0 ** -12)
X, Y = np.meshgrid(s, s)
E = field.epsilon(X, Y)
i = np.unravel_index(E.argmax(), E.shape)
print(f"eps at the bump peak: {epsilon_at(field, (0.4375, 0.4375))}, "
      f"largest value {E[i]:.5f} at ({X[i]:.4f}, {Y[i]:.4f})")

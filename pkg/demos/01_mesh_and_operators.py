"""Build a mesh, assemble the operators and look at what comes out."""

import numpy as np
import scipy.sparse.linalg as spla

from stabmaxwell import CoefficientField, build_structured_mesh
from stabmaxwell.assembly import apply_dirichlet, divdiv_stab, lumped_mass, stiffness
from stabmaxwell.coefficients import sample_nodal

# A level-3 mesh has h = 1/8: 64 squares, each cut along its rising diagonal.
mesh = build_structured_mesh(3)
print(f"level {mesh.level}: h={mesh.h}, {mesh.nel} triangles, {mesh.nno} vertices, "
      f"{mesh.boundary.size} on the boundary")

# Lumped masses: h^2 at interior vertices, less at the edges and corners.
M = lumped_mass(mesh).values[0::2]
print("mass at (0,0), (1,0), centre:", M[0], M[8], M[4 * 9 + 4], " total:", M.sum())

# The stiffness acts on both components independently, so a constant field has no energy.
K = stiffness(mesh)
print("|K c|_max for constant c:", np.abs(K @ np.tile([1.0, 2.0], mesh.nno)).max())

# The stabilization only sees the part of the domain where eps differs from 1.
field = CoefficientField(m=6)
eps_h = sample_nodal(field, mesh, "eps")
D = divdiv_stab(mesh, eps_h)
print(f"eps_h ranges over [{eps_h.min()}, {eps_h.max():.4f}]; D has {D.nnz} nonzeros "
      f"against {K.nnz} in K")
print("centroid vs edge-midpoint rule:", abs(D - divdiv_stab(mesh, eps_h, "midpoint")).max())

# With boundary rows masked, K + D is invertible. Its spectrum bounds the stable time step.
A = apply_dirichlet(K + D, mesh)
Meps = apply_dirichlet(lumped_mass(mesh, eps_h), mesh).values
lam = spla.eigs(A.multiply(1 / Meps[:, None]).tocsr(), k=1, which="LM",
                return_eigenvectors=False)[0].real
print(f"largest eigenvalue of Meps^-1 (K + D): {lam:.1f}, so leapfrog needs tau < "
      f"{2 / np.sqrt(lam):.4f}")

"""Error norms, convergence tables, energy monitoring and coercivity probes."""

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from .assembly import (divdiv_stab, element_divergence, element_gradients, stiffness,
                       lumped_mass)
from .quadrature import dunavant4, edge_midpoint_rule, physical_points, rule_for_degree

__all__ = ["ErrorPair", "UndefinedError", "relative_errors", "ConvergenceReport",
           "convergence_rates", "EnergySample", "energy_sample", "EnergyMonitor",
           "triple_norm_a", "ProbeReport", "coercivity_probe", "config_hash"]


class UndefinedError(ArithmeticError):
    """Relative error requested against an identically zero exact field."""


@dataclass
class ErrorPair:
    theta1: float
    theta2: float
    level: int
    m: int
    nel: int = 0
    nno: int = 0


def relative_errors(exact, E_h, mesh, t, degree=4, m=None, l2="nodal"):
    """Relative L2 error ``theta1`` and gradient-seminorm error ``theta2``.

    ``exact`` is an :class:`~stabmaxwell.manufactured.ExactSolution` or any
    object with ``E(x, y, t)`` and ``derivatives(x, y, t, interface)``.

    ``theta2`` integrates ``|grad(E - E_h)|^2`` with a triangle rule exact to
    ``degree`` (the 6-point rule for 4). ``theta1`` uses the same rule when
    ``l2="quadrature"``; with ``l2="nodal"`` it compares ``E_h`` with the
    nodal interpolant of ``E`` under the vertex rule, i.e. the lumped-mass
    norm, which removes the interpolation error from the L2 measure.
    """
    bary, w = dunavant4() if degree == 4 else rule_for_degree(degree)
    pts = physical_points(mesh, bary)                          # (nel, nq, 2)
    x, y = pts[..., 0], pts[..., 1]
    _, _, Gx, _ = exact.derivatives(x, y, t, interface="exterior")   # (2, 2, nel, nq)
    Gh = element_gradients(mesh, E_h)                          # (nel, 2, 2)
    wa = mesh.areas[:, None] * w[None, :]
    dG = Gx - np.transpose(Gh, (1, 2, 0))[..., None]
    num2 = np.sum(wa * np.sum(dG ** 2, axis=(0, 1)))
    den2 = np.sum(wa * np.sum(Gx ** 2, axis=(0, 1)))

    if l2 == "nodal":
        v = mesh.vertices
        Ei = np.ascontiguousarray(exact.E(v[:, 0], v[:, 1], t).T).ravel()
        M = lumped_mass(mesh).values
        d = Ei - np.asarray(E_h)
        num1 = float(d @ (M * d))
        den1 = float(Ei @ (M * Ei))
    elif l2 == "quadrature":
        Ex = exact.E(x, y, t)                                  # (2, nel, nq)
        vals = np.asarray(E_h).reshape(-1, 2)[mesh.triangles]  # (nel, 3, 2)
        Eh = np.einsum("qk,eka->aeq", bary, vals)
        num1 = np.sum(wa * np.sum((Ex - Eh) ** 2, axis=0))
        den1 = np.sum(wa * np.sum(Ex ** 2, axis=0))
    else:
        raise ValueError(f"l2 must be 'nodal' or 'quadrature', got {l2!r}")
    if den1 == 0.0 or den2 == 0.0:
        raise UndefinedError(f"exact solution vanishes identically at t={t}")
    if m is None:
        fld = getattr(exact, "field", None)
        m = getattr(fld, "m", 0)
    return ErrorPair(theta1=math.sqrt(num1 / den1), theta2=math.sqrt(num2 / den2),
                     level=mesh.level, m=m, nel=mesh.nel, nno=mesh.nno)


def _rate(a, b):
    if a <= 0 or b <= 0:
        return None, None
    ratio = a / b
    return ratio, abs(math.log(ratio)) / math.log(2.0)


COLUMNS = ["l", "nel", "nno", "theta1", "ratio1", "r1", "theta2", "ratio2", "r2"]


@dataclass
class ConvergenceReport:
    rows: list
    metadata: dict = field(default_factory=dict)

    @property
    def has_rates(self):
        return len(self.rows) > 1

    def column(self, name):
        return [row[name] for row in self.rows]

    def to_csv(self):
        cols = COLUMNS if self.has_rates else ["l", "nel", "nno", "theta1", "theta2"]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in self.rows:
            writer.writerow(["" if row[c] is None else _fmt(row[c]) for c in cols])
        return buf.getvalue()

    def to_markdown(self):
        if self.has_rates:
            head = ["l", "nel", "nno", "Θ(1)", "Θ(1)_l/Θ(1)_l+1", "r(1)",
                    "Θ(2)", "Θ(2)_l/Θ(2)_l+1", "r(2)"]
            cols = COLUMNS
        else:
            head = ["l", "nel", "nno", "Θ(1)", "Θ(2)"]
            cols = ["l", "nel", "nno", "theta1", "theta2"]
        lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        for row in self.rows:
            cells = []
            for c in cols:
                v = row[c]
                if v is None:
                    cells.append("-")
                elif c in ("r1", "r2"):
                    cells.append(f"{v:.2f}")
                elif isinstance(v, float):
                    cells.append(f"{v:.6f}")
                else:
                    cells.append(str(v))
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"

    def to_json(self):
        return json.dumps({"metadata": self.metadata, "rows": self.rows}, indent=2,
                          sort_keys=True)


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def convergence_rates(errors, metadata=None):
    """Table of errors, successive ratios and observed orders.

    Rates follow ``r = |log(theta_l / theta_{l+1})| / log 2`` and are stored
    on the finer row; a zero error leaves that rate as ``None``.
    """
    errors = sorted(errors, key=lambda e: e.level)
    if not errors:
        raise ValueError("no error data")
    rows = []
    prev = None
    for e in errors:
        row = {"l": e.level, "nel": e.nel, "nno": e.nno, "theta1": e.theta1,
               "theta2": e.theta2, "ratio1": None, "r1": None, "ratio2": None, "r2": None}
        if prev is not None:
            row["ratio1"], row["r1"] = _rate(prev.theta1, e.theta1)
            row["ratio2"], row["r2"] = _rate(prev.theta2, e.theta2)
        rows.append(row)
        prev = e
    return ConvergenceReport(rows=rows, metadata=dict(metadata or {}))


def config_hash(config):
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def utc_timestamp():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# -- energy ---------------------------------------------------------------

@dataclass
class EnergySample:
    t: float
    dtE_eps: float
    E_sigma: float
    gradE: float
    divE_epsm1: float
    total: float


def _weighted_div2(mesh, E, weight_h):
    """``sum_K |K| mean_K(weight) (div E)^2``, exact for nodal-linear weights."""
    div = element_divergence(mesh, E)
    wbar = np.asarray(weight_h)[mesh.triangles].mean(axis=1)
    return float(np.sum(mesh.areas * wbar * div * div))


def energy_sample(state, ops):
    """Discrete energy functional at level ``k`` with a backward time difference."""
    d = (state.E_curr - state.E_prev) / state.tau
    E = state.E_curr
    dtE = float(d @ (ops.Meps.values * d))
    Es = float(E @ (ops.Msig.values * E))
    gE = float(E @ (ops.K @ E))
    dv = _weighted_div2(ops.mesh, E, ops.eps_h - 1.0)
    return EnergySample(t=state.t, dtE_eps=dtE, E_sigma=Es, gradE=gE, divE_epsm1=dv,
                        total=dtE + Es + gE + dv)


class EnergyMonitor:
    """Observer collecting one :class:`EnergySample` per time level."""

    def __init__(self):
        self.result = []

    def __call__(self, state, ops):
        self.result.append(energy_sample(state, ops))

    def totals(self):
        return np.array([s.total for s in self.result])

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "dtE_eps", "E_sigma", "gradE", "divE_epsm1", "total"])
        for s in self.result:
            writer.writerow([repr(float(v)) for v in asdict(s).values()])
        return buf.getvalue()


def triple_norm_a(v, eps_h, mesh, K=None, Meps=None):
    """Squared weighted norm ``|v|^2_eps + |grad v|^2 + |div v|^2_{eps-1}``."""
    v = np.asarray(v, dtype=float)
    if K is None:
        K = stiffness(mesh)
    if Meps is None:
        Meps = lumped_mass(mesh, eps_h)
    return float(v @ (Meps.values * v) + v @ (K @ v)
                 + _weighted_div2(mesh, v, np.asarray(eps_h) - 1.0))


# -- coercivity -----------------------------------------------------------

@dataclass
class ProbeReport:
    n_samples: int
    min_slack: float                 # min of (a(v,v) - lower bound) / |||v|||^2
    intermediate_holds: bool
    half_norm_fraction: float      # fraction with a(v,v) >= |||v|||^2 / 2
    min_a_over_norm: float           # min of a(v,v) / |||v|||^2
    continuity_estimate: float       # max |a(u,v)| / (|||u||| |||v|||)
    grad_weight: str


def _grad_eps_weight(mesh, field, eps_h, how):
    if how == "interpolant":
        g = np.einsum("ek,ekd->ed", eps_h[mesh.triangles], mesh.grads)
        return np.hypot(g[:, 0], g[:, 1])
    if how == "closed_form":
        c = mesh.centroids()
        _, de, _ = field.epsilon_derivatives(c[:, 0], c[:, 1])
        return np.hypot(de[0], de[1])
    raise ValueError(f"unknown gradient weight {how!r}")


def coercivity_probe(mesh, field, n_samples=1000, seed=0, tol=1e-12,
                     grad_weight="interpolant"):
    """Sample ``a(v, v)`` against its Young-inequality lower bound.

    For seeded random fields ``v`` (uniform on free dofs, normalized in the
    triple norm) checks

        a(v,v) >= |grad v|^2 + |div v|^2_{eps-1} - |v|^2_{|grad eps|}/2 - |div v|^2_{|grad eps|}/2

    and records how often ``a(v,v) >= |||v|||^2 / 2`` holds. The weight
    ``|grad eps|`` is taken elementwise from the nodal interpolant, which is
    the coefficient the discrete form actually sees.
    """
    from .coefficients import sample_nodal

    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    eps_h = sample_nodal(field, mesh, "eps")
    K = stiffness(mesh)
    A = K + divdiv_stab(mesh, eps_h)
    Meps = lumped_mass(mesh, eps_h)
    gw = _grad_eps_weight(mesh, field, eps_h, grad_weight)
    mid_bary, mid_w = edge_midpoint_rule()
    free = np.ones(mesh.ndof, dtype=bool)
    free[mesh.boundary_dofs()] = False

    rng = np.random.default_rng(seed)
    samples = []
    slack = np.empty(n_samples)
    ratio = np.empty(n_samples)
    for s in range(n_samples):
        v = np.zeros(mesh.ndof)
        v[free] = rng.uniform(-1.0, 1.0, free.sum())
        v /= math.sqrt(triple_norm_a(v, eps_h, mesh, K=K, Meps=Meps))
        tn = triple_norm_a(v, eps_h, mesh, K=K, Meps=Meps)
        a = float(v @ (A @ v))
        vals = v.reshape(-1, 2)[mesh.triangles]
        vq = np.einsum("qk,eka->eqa", mid_bary, vals)
        v_l2 = np.sum(mid_w[None, :] * np.sum(vq ** 2, axis=2), axis=1)    # mean |v|^2 per K
        div = element_divergence(mesh, v)
        v_term = float(np.sum(mesh.areas * gw * v_l2))
        d_term = float(np.sum(mesh.areas * gw * div * div))
        lower = float(v @ (K @ v)) + _weighted_div2(mesh, v, eps_h - 1.0) - 0.5 * v_term - 0.5 * d_term
        slack[s] = (a - lower) / tn
        ratio[s] = a / tn
        samples.append(v)

    # continuity: pairs of consecutive samples, all unit in the triple norm
    cont = 0.0
    for u, v in zip(samples[:-1], samples[1:]):
        cont = max(cont, abs(float(v @ (A @ u))))
    if len(samples) == 1:
        cont = abs(float(samples[0] @ (A @ samples[0])))
    return ProbeReport(
        n_samples=n_samples,
        min_slack=float(slack.min()),
        intermediate_holds=bool(slack.min() >= -tol),
        half_norm_fraction=float(np.mean(ratio >= 0.5)),
        min_a_over_norm=float(ratio.min()),
        continuity_estimate=cont,
        grad_weight=grad_weight,
    )

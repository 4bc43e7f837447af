"""
Exact rational linear programming over constraint systems.

A ``ConstraintSystem`` is a list of homogeneous rows a.x >= 0 or a.x = 0
over named variables. Feasibility questions are asked with a normalization
row n.x = 1 supplied by the caller, so no epsilon ever appears:

    infeasible  <=>  sum h_i a_i = -n   with h >= 0 on inequality rows

The multipliers h are the Farkas certificate. When the certificate LP has
no solution, the phase one duals give a feasible point instead.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

from errors import EntropyToolError, GroundSetError, ResourceCapExceeded
from polymatroid import LinearFunctional, format_number, shannon_basic, to_fraction

logger = logging.getLogger(__name__)

GEQ = ">="
EQ = "=="
CONSTANT = "1"


# =============================================================================
# CONSTRAINT SYSTEMS
# =============================================================================

@dataclass
class Row:
    coeffs: dict
    relation: str
    tag: str

    def value(self, point):
        return sum((c * point.get(v, 0) for v, c in self.coeffs.items()), Fraction(0))


def _row_key(coeffs, relation, order):
    """Scale-free key so duplicate rows are stored once."""
    items = sorted((order[v], c) for v, c in coeffs.items())
    lcm = 1
    for _, c in items:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    ints = [(i, int(c * lcm)) for i, c in items]
    g = 0
    for _, v in ints:
        g = math.gcd(g, v)
    ints = [(i, v // g) for i, v in ints]
    if relation == EQ and ints[0][1] < 0:
        ints = [(i, -v) for i, v in ints]
    return relation, tuple(ints)


class ConstraintSystem:
    """Rows over named variables, split into main and auxiliary columns."""

    def __init__(self, ground=None, name=""):
        self.ground = ground
        self.name = name
        self.variables = []
        self.rows = []
        self._index = {}
        self._main = set()
        self._mask_of = {}
        self._name_of = {}
        self._keys = set()
        self._tags = set()

    # -- variables -----------------------------------------------------------

    def declare(self, var, main=False, mask=None):
        if var in self._index:
            return var
        self._index[var] = len(self.variables)
        self.variables.append(var)
        if main:
            self._main.add(var)
            if mask is not None:
                self._mask_of[var] = mask
                self._name_of[mask] = var
        return var

    def declare_ground(self, ground, main=True):
        """One main variable per non-empty subset of ``ground``, named by labels."""
        self.ground = ground
        for m in ground.subsets():
            self.declare(ground.name(m), main=main, mask=m)

    @property
    def main(self):
        return [v for v in self.variables if v in self._main]

    @property
    def aux(self):
        return [v for v in self.variables if v not in self._main]

    def is_main(self, var):
        return var in self._main

    def __contains__(self, var):
        return var in self._index

    # -- rows ----------------------------------------------------------------

    def add_row(self, coeffs, relation=GEQ, tag=None):
        """Store a row unless it is zero or a positive multiple of a stored one."""
        clean = {}
        for var, c in coeffs.items():
            if var not in self._index:
                raise GroundSetError(f"row uses undeclared variable {var!r}")
            c = to_fraction(c)
            if c:
                clean[var] = clean.get(var, 0) + c
        clean = {v: c for v, c in clean.items() if c}
        if not clean:
            return False
        key = _row_key(clean, relation, self._index)
        if key in self._keys:
            return False
        self._keys.add(key)
        tag = tag or f"row{len(self.rows)}"
        if tag in self._tags:
            k = 2
            while f"{tag}#{k}" in self._tags:
                k += 1
            tag = f"{tag}#{k}"
        self._tags.add(tag)
        ordered = dict(sorted(clean.items(), key=lambda kv: self._index[kv[0]]))
        self.rows.append(Row(ordered, relation, tag))
        return True

    def add_functional(self, e, relation=GEQ, tag=None):
        return self.add_row(self.coeffs_of(e), relation, tag or e.tag)

    def row(self, tag):
        for row in self.rows:
            if row.tag == tag:
                return row
        raise KeyError(tag)

    # -- functionals ---------------------------------------------------------

    def coeffs_of(self, e):
        """Coefficients of a functional over this system's main ground."""
        if isinstance(e, dict):
            return e
        if self.ground is None or e.ground != self.ground:
            raise GroundSetError(f"functional ground {e.ground} does not match system ground {self.ground}")
        out = {}
        for m, c in e.coeffs.items():
            if m not in self._name_of:
                raise GroundSetError(f"subset {e.ground.name(m)} is not a main variable")
            out[self._name_of[m]] = c
        return out

    def functional_of(self, coeffs, tag=""):
        """Functional over the main ground; non-main coefficients are an error."""
        out = {}
        for var, c in coeffs.items():
            if var not in self._mask_of:
                raise GroundSetError(f"{var} is not a main subset variable")
            out[self._mask_of[var]] = c
        return LinearFunctional(self.ground, out, tag)

    def mask_of(self, var):
        return self._mask_of.get(var)

    # -- derived systems -----------------------------------------------------

    def with_target(self, f):
        """Main variables fixed to the ranks of f; constants go to column ``1``."""
        out = ConstraintSystem(name=f"{self.name} @ target")
        for var in self.aux:
            out.declare(var)
        out.declare(CONSTANT)
        for row in self.rows:
            coeffs, const = {}, Fraction(0)
            for var, c in row.coeffs.items():
                if var in self._main:
                    const += c * to_fraction(f(self._mask_of[var]))
                else:
                    coeffs[var] = c
            if const:
                coeffs[CONSTANT] = const
            if coeffs:
                out.add_row(coeffs, row.relation, row.tag)
        return out

    def summary(self):
        geq = sum(1 for r in self.rows if r.relation == GEQ)
        return {
            "variables": len(self.variables),
            "main": len(self.main),
            "aux": len(self.aux),
            "inequalities": geq,
            "equalities": len(self.rows) - geq,
        }

    def __repr__(self):
        s = self.summary()
        return (f"ConstraintSystem({self.name!r}, {s['main']} main + {s['aux']} aux vars, "
                f"{s['inequalities']} >= rows, {s['equalities']} == rows)")


def shannon_system(ground, balanced=False, name=None):
    """Basic Shannon inequalities on ``ground`` as a system with main variables only."""
    sys_ = ConstraintSystem(ground, name or f"Shannon({ground.name(ground.full)})")
    sys_.declare_ground(ground)
    for e in shannon_basic(ground, balanced=balanced):
        sys_.add_functional(e)
    return sys_


# =============================================================================
# RESULTS
# =============================================================================

@dataclass
class FarkasCertificate:
    """Multipliers per row tag with sum multiplier * row = target."""

    multipliers: dict
    target: dict
    kind: str = "implies"   # or "infeasible": target is -normalization

    def combination(self, sys_):
        total = {}
        for tag, h in self.multipliers.items():
            for var, c in sys_.row(tag).coeffs.items():
                total[var] = total.get(var, 0) + h * c
        return {v: c for v, c in total.items() if c}

    def verify(self, sys_):
        """Exact recomputation; signs checked against row relations."""
        for tag, h in self.multipliers.items():
            if sys_.row(tag).relation == GEQ and h < 0:
                return False
        target = {v: to_fraction(c) for v, c in self.target.items() if c}
        return self.combination(sys_) == target

    def to_text(self, sys_=None):
        lines = [f"{tag} {format_number(h)}" for tag, h in self.multipliers.items()]
        if sys_ is not None:
            lines.append("check: OK" if self.verify(sys_) else "check: FAILED")
        return "\n".join(lines) + "\n"

    def as_json(self):
        return {"kind": self.kind,
                "multipliers": {t: format_number(h) for t, h in self.multipliers.items()}}


@dataclass
class Feasible:
    point: dict
    objective: Fraction = None

    def __bool__(self):
        return True


@dataclass
class Infeasible:
    certificate: FarkasCertificate

    def __bool__(self):
        return False


@dataclass
class Unbounded:
    point: dict = field(default_factory=dict)

    def __bool__(self):
        return False


@dataclass
class Implied:
    certificate: FarkasCertificate

    def __bool__(self):
        return True


@dataclass
class NotImplied:
    counterexample: dict

    def __bool__(self):
        return False


# =============================================================================
# SIMPLEX
# =============================================================================

OPTIMAL, UNBOUNDED = "optimal", "unbounded"


class _Tableau:
    """min c.z subject to M z = b, z >= 0; sparse rows, Bland's rule, two phases."""

    def __init__(self, columns, rhs, costs=None, deadline=None):
        self.m = len(rhs)
        self.ncols = len(columns)
        self.sign = [1 if to_fraction(b) >= 0 else -1 for b in rhs]
        self.rows = [dict() for _ in range(self.m)]
        for j, col in enumerate(columns):
            for r, v in col.items():
                if v:
                    self.rows[r][j] = to_fraction(v) * self.sign[r]
        for r in range(self.m):
            self.rows[r][self.ncols + r] = Fraction(1)
        self.rhs = [abs(to_fraction(b)) for b in rhs]
        self.basis = [self.ncols + r for r in range(self.m)]
        self.costs = costs
        self.deadline = deadline
        self.pivots = 0
        self.d = {}
        self.negz = Fraction(0)

    def _pivot(self, r, j):
        row = self.rows[r]
        piv = row[j]
        if piv != 1:
            row = {k: v / piv for k, v in row.items()}
            self.rows[r] = row
            self.rhs[r] /= piv
        rhs_r = self.rhs[r]
        for i in range(len(self.rows)):
            if i == r:
                continue
            other = self.rows[i]
            f = other.get(j)
            if not f:
                continue
            for k, v in row.items():
                nv = other.get(k, 0) - f * v
                if nv:
                    other[k] = nv
                else:
                    other.pop(k, None)
            self.rhs[i] -= f * rhs_r
        f = self.d.get(j)
        if f:
            for k, v in row.items():
                nv = self.d.get(k, 0) - f * v
                if nv:
                    self.d[k] = nv
                else:
                    self.d.pop(k, None)
            self.negz -= f * rhs_r
        self.basis[r] = j
        self.pivots += 1

    def _run(self, allowed):
        while True:
            if self.deadline is not None and time.monotonic() > self.deadline:
                raise ResourceCapExceeded("timeout", f"simplex stopped after {self.pivots} pivots")
            entering = min((j for j, v in self.d.items() if v < 0 and allowed(j)), default=None)
            if entering is None:
                return OPTIMAL
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if a is not None and a > 0:
                    ratio = self.rhs[i] / a
                    if best is None or ratio < best[0] or (
                            ratio == best[0] and self.basis[i] < self.basis[best[1]]):
                        best = (ratio, i)
            if best is None:
                return UNBOUNDED
            self._pivot(best[1], entering)
            if self.pivots % 2000 == 0:
                logger.debug("simplex: %d pivots, objective %s", self.pivots, -self.negz)

    def phase_one(self):
        """True when M z = b, z >= 0 is feasible; otherwise the dual ray w with M^T w <= 0, b.w > 0."""
        self.d = {}
        for row in self.rows:
            for j, v in row.items():
                if j < self.ncols:
                    self.d[j] = self.d.get(j, 0) - v
        self.d = {j: v for j, v in self.d.items() if v}
        self.negz = -sum(self.rhs, Fraction(0))
        self._run(lambda j: j < self.ncols)
        if -self.negz > 0:
            w = [self.sign[r] * (1 - self.d.get(self.ncols + r, 0)) for r in range(self.m)]
            return False, w
        self._drive_out_artificials()
        return True, None

    def _drive_out_artificials(self):
        r = 0
        while r < len(self.rows):
            if self.basis[r] >= self.ncols:
                j = min((k for k, v in self.rows[r].items() if k < self.ncols and v), default=None)
                if j is None:
                    del self.rows[r], self.rhs[r], self.basis[r]
                    continue
                self._pivot(r, j)
            r += 1
        for row in self.rows:
            for k in [k for k in row if k >= self.ncols]:
                del row[k]

    def phase_two(self):
        costs = self.costs or [0] * self.ncols
        self.d = {j: to_fraction(c) for j, c in enumerate(costs) if c}
        self.negz = Fraction(0)
        for r, row in enumerate(self.rows):
            cb = to_fraction(costs[self.basis[r]])
            if cb:
                for j, v in row.items():
                    nv = self.d.get(j, 0) - cb * v
                    if nv:
                        self.d[j] = nv
                    else:
                        self.d.pop(j, None)
                self.negz -= cb * self.rhs[r]
        return self._run(lambda j: True)

    def solution(self):
        z = [Fraction(0)] * self.ncols
        for r, j in enumerate(self.basis):
            if j < self.ncols:
                z[j] = self.rhs[r]
        return z

    def objective(self):
        return -self.negz


def _deadline(timeout):
    return None if timeout is None else time.monotonic() + timeout


# =============================================================================
# FEASIBILITY AND IMPLICATION
# =============================================================================

def _certificate_lp(sys_, target, deadline=None):
    """Solve sum h_i a_i = target with h >= 0 on inequality rows.

    Returns (multipliers, None) or (None, point) where the point satisfies
    every row and has target.point = -1.
    """
    variables = list(sys_.variables)
    for v in target:
        if v not in sys_:
            raise GroundSetError(f"target uses unknown variable {v!r}")
    index = {v: i for i, v in enumerate(variables)}
    columns, owners = [], []
    for k, row in enumerate(sys_.rows):
        col = {index[v]: c for v, c in row.coeffs.items()}
        columns.append(col)
        owners.append((k, 1))
        if row.relation == EQ:
            columns.append({r: -c for r, c in col.items()})
            owners.append((k, -1))
    rhs = [to_fraction(target.get(v, 0)) for v in variables]
    tab = _Tableau(columns, rhs, deadline=deadline)
    ok, w = tab.phase_one()
    logger.debug("certificate LP: %d rows x %d columns, %d pivots", len(rhs), len(columns), tab.pivots)
    if ok:
        z = tab.solution()
        weights = {}
        for (k, s), value in zip(owners, z):
            if value:
                weights[k] = weights.get(k, 0) + s * value
        multipliers = {sys_.rows[k].tag: h for k, h in sorted(weights.items()) if h}
        return multipliers, None
    # x = -w satisfies every row and target.x = -(b.w) < 0
    bw = sum((b * wi for b, wi in zip(rhs, w)), Fraction(0))
    point = {v: -wi / bw for v, wi in zip(variables, w)}
    return None, point


def feasible(sys_, objective=None, normalization=None, timeout=None):
    """Feasible(point) | Infeasible(certificate) | Unbounded for rows plus n.x = 1."""
    deadline = _deadline(timeout)
    if objective is not None:
        return minimize(sys_, objective, normalization, deadline=deadline)
    if not normalization:
        return Feasible({v: Fraction(0) for v in sys_.variables})
    norm = {v: to_fraction(c) for v, c in normalization.items() if c}
    multipliers, point = _certificate_lp(sys_, {v: -c for v, c in norm.items()}, deadline)
    if multipliers is not None:
        return Infeasible(FarkasCertificate(multipliers, {v: -c for v, c in norm.items()}, "infeasible"))
    return Feasible(point)


def implies(sys_, e, timeout=None):
    """Implied(certificate) if e is a non-negative combination of the rows, else a counterexample."""
    target = sys_.coeffs_of(e)
    target = {v: to_fraction(c) for v, c in target.items() if c}
    if not target:
        return Implied(FarkasCertificate({}, {}))
    multipliers, point = _certificate_lp(sys_, target, _deadline(timeout))
    if multipliers is not None:
        return Implied(FarkasCertificate(multipliers, target))
    return NotImplied(point)


def minimize(sys_, objective, normalization=None, deadline=None):
    """Minimize objective.x over the rows (and n.x = 1 when given)."""
    variables = list(sys_.variables)
    nv = len(variables)
    index = {v: i for i, v in enumerate(variables)}
    cons = [dict(row.coeffs) for row in sys_.rows]
    if normalization:
        cons.append(dict(normalization))
    m = len(cons)
    columns = []
    # x = p - q, then one surplus per inequality row
    for v in variables:
        columns.append({r: c[v] for r, c in enumerate(cons) if v in c})
    for v in variables:
        columns.append({r: -c[v] for r, c in enumerate(cons) if v in c})
    surplus = []
    for r, row in enumerate(sys_.rows):
        if row.relation == GEQ:
            columns.append({r: Fraction(-1)})
            surplus.append(r)
    rhs = [Fraction(0)] * m
    if normalization:
        rhs[-1] = Fraction(1)
    obj = {index[v]: to_fraction(c) for v, c in objective.items()}
    costs = [obj.get(j, 0) for j in range(nv)] + [-obj.get(j, 0) for j in range(nv)] + [0] * len(surplus)
    tab = _Tableau(columns, rhs, costs, deadline)
    ok, w = tab.phase_one()
    if not ok:
        wn = w[-1] if normalization else Fraction(0)
        if not normalization or wn <= 0:
            raise EntropyToolError("homogeneous system reported infeasible")
        multipliers = {}
        for r, row in enumerate(sys_.rows):
            if w[r]:
                multipliers[row.tag] = w[r] / wn
        target = {v: -to_fraction(c) for v, c in normalization.items() if c}
        return Infeasible(FarkasCertificate(multipliers, target, "infeasible"))
    status = tab.phase_two()
    z = tab.solution()
    point = {v: z[i] - z[nv + i] for i, v in enumerate(variables)}
    if status == UNBOUNDED:
        return Unbounded(point)
    return Feasible(point, tab.objective())


# =============================================================================
# SHANNON DECOMPOSITION
# =============================================================================

@dataclass
class Decomposition:
    ok: bool
    terms: list = field(default_factory=list)   # (functional, weight)

    def __bool__(self):
        return self.ok

    @property
    def total(self):
        return sum((w for _, w in self.terms), Fraction(0))

    def verify(self, e):
        acc = LinearFunctional(e.ground, {})
        for b, w in self.terms:
            acc = acc + b * w
        return acc == LinearFunctional(e.ground, e.coeffs)


def _decompose_lp(e, basis, bounds, deadline):
    """min sum w with sum w_i b_i = e, w >= 0 and extra (index, '<='|'>=', k) bounds."""
    masks = sorted(set(m for b in basis for m in b.coeffs) | set(e.coeffs))
    row_of = {m: r for r, m in enumerate(masks)}
    columns = [{row_of[m]: c for m, c in b.coeffs.items()} for b in basis]
    rhs = [e.coeffs.get(m, Fraction(0)) for m in masks]
    costs = [1] * len(basis)
    for j, sense, k in bounds:
        r = len(rhs)
        columns[j][r] = Fraction(1)
        columns.append({r: Fraction(1 if sense == "<=" else -1)})
        costs.append(0)
        rhs.append(Fraction(k))
    tab = _Tableau(columns, rhs, costs, deadline)
    ok, _ = tab.phase_one()
    if not ok:
        return None
    tab.phase_two()
    return tab.solution()[:len(basis)]


def shannon_decompose(e, basis=None, integral=True, max_nodes=500, timeout=None):
    """Non-negative (integer when possible) weights on basic inequalities summing to e."""
    basis = basis if basis is not None else shannon_basic(e.ground)
    deadline = _deadline(timeout)
    best, stack, nodes = None, [[]], 0
    while stack and nodes < max_nodes:
        bounds = stack.pop()
        nodes += 1
        w = _decompose_lp(e, basis, bounds, deadline)
        if w is None:
            continue
        total = sum(w, Fraction(0))
        if best is not None and total >= sum(best, Fraction(0)):
            continue
        frac = next((j for j, x in enumerate(w) if x.denominator != 1), None)
        if not integral or frac is None:
            best = w
            continue
        k = math.floor(w[frac])
        stack.append(bounds + [(frac, ">=", k + 1)])
        stack.append(bounds + [(frac, "<=", k)])
    if stack and integral:
        logger.warning("branch and bound stopped after %d nodes; weights may be fractional or not minimal",
                       nodes)
    if best is None and integral:
        # fall back to the fractional optimum when branching was cut short
        best = _decompose_lp(e, basis, [], deadline)
    if best is None:
        return Decomposition(False)
    terms = [(b, x) for b, x in zip(basis, best) if x]
    logger.info("Shannon decomposition of %s: %d terms, total weight %s",
                e.tag or "functional", len(terms), format_number(sum(best, Fraction(0))))
    return Decomposition(True, terms)

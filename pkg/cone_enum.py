"""
Extremal rays of polyhedral cones and consequence cones of constraint systems.

``dd_rays`` hands the homogeneous H-representation to cdd in exact
(fraction) arithmetic and reads the extreme rays back as primitive integer
vectors. Consequence cones are built either from the extreme rays of the
multiplier cone (``dd``) or by Fourier-Motzkin elimination (``fme``).
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import cdd

from defaults import DEFAULT_JOBS, DEFAULT_MAX_RAYS
from errors import ConeNotPointed, ResourceCapExceeded
from exact_lp import EQ, ConstraintSystem, implies
from polymatroid import (GroundSet, LinearFunctional, Polymatroid,
                         PartialPermutation, apply_permutation,
                         ingleton_instances, popcount, shannon_basic)

logger = logging.getLogger(__name__)

NUMBER_TYPE = "fraction"


# =============================================================================
# EXACT LINEAR ALGEBRA
# =============================================================================

def primitive(vec):
    """Integer vector with gcd 1 on the same ray (positive scaling only)."""
    lcm = 1
    for x in vec:
        x = Fraction(x)
        lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
    ints = [int(Fraction(x) * lcm) for x in vec]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g > 1:
        ints = [x // g for x in ints]
    return ints


def _rref(rows, width):
    """Reduced row echelon form over Q; returns (rows, pivot columns)."""
    mat = [[Fraction(x) for x in row] for row in rows]
    pivots, r = [], 0
    for c in range(width):
        p = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if p is None:
            continue
        mat[r], mat[p] = mat[p], mat[r]
        piv = mat[r][c]
        mat[r] = [x / piv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def rational_nullspace(rows, width):
    """Integer basis of {x : row.x = 0 for every row}."""
    if not rows:
        return [[1 if i == j else 0 for i in range(width)] for j in range(width)]
    mat, pivots = _rref(rows, width)
    free = [c for c in range(width) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * width
        vec[f] = Fraction(1)
        for row, p in zip(mat, pivots):
            vec[p] = -row[f]
        basis.append(primitive(vec))
    return basis


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


# =============================================================================
# DOUBLE DESCRIPTION
# =============================================================================

@dataclass(frozen=True)
class RayList:
    dim: int
    rays: tuple   # primitive integer tuples, sorted

    def __len__(self):
        return len(self.rays)

    def __iter__(self):
        return iter(self.rays)

    def as_polymatroids(self, ground):
        return [Polymatroid(ground, ray) for ray in self.rays]

    def as_functionals(self, ground, tag="ray"):
        return [LinearFunctional.from_vector(ground, ray, f"{tag}{i}") for i, ray in enumerate(self.rays)]


def _as_vector(row):
    if isinstance(row, LinearFunctional):
        return row.to_vector()
    return list(row)


def _h_matrix(ineq, eqs):
    """cdd H-representation [0 | a] of a.x >= 0 rows and b.x = 0 rows."""
    mat = None
    for rows, linear in ((ineq, False), (eqs, True)):
        if not rows:
            continue
        block = [[0] + list(r) for r in rows]
        if mat is None:
            mat = cdd.Matrix(block, linear=linear, number_type=NUMBER_TYPE)
            mat.rep_type = cdd.RepType.INEQUALITY
        else:
            mat.extend(block, linear=linear)
    return mat


def dd_rays(inequalities, equalities=(), dim=None, max_rays=DEFAULT_MAX_RAYS, timeout=None):
    """Extremal rays of {x : a.x >= 0 (inequalities), b.x = 0 (equalities)}.

    ``timeout`` is checked once cdd returns; the enumeration itself runs to
    completion.
    """
    ineq = [primitive(_as_vector(r)) for r in inequalities]
    eqs = [primitive(_as_vector(r)) for r in equalities]
    dim = dim if dim is not None else len((ineq or eqs)[0])
    started = time.monotonic()

    mat = _h_matrix([r for r in ineq if any(r)], [r for r in eqs if any(r)])
    if mat is None:
        if dim == 0:
            return RayList(0, ())
        raise ConeNotPointed(rational_nullspace([], dim))
    logger.info("double description: dim %d, %d inequalities, %d equalities", dim, len(ineq), len(eqs))
    gens = cdd.Polyhedron(mat).get_generators()

    if timeout is not None and time.monotonic() - started > timeout:
        raise ResourceCapExceeded("timeout", f"enumeration took {time.monotonic() - started:.1f}s")
    lines, rays = [], set()
    for i in range(gens.row_size):
        row = [Fraction(x) for x in gens[i]]
        if row[0] != 0:
            continue    # the apex
        vec = primitive(row[1:])
        if not any(vec):
            continue
        if i in gens.lin_set:
            lines.append(vec)
        else:
            rays.add(tuple(vec))
    if lines:
        raise ConeNotPointed(lines)
    if len(rays) > max_rays:
        raise ResourceCapExceeded("max-rays", f"{len(rays)} extreme rays")
    logger.info("double description: %d rays", len(rays))
    return RayList(dim, tuple(sorted(rays)))


# =============================================================================
# SHANNON CONE RAYS
# =============================================================================

def symmetric_group_generators(n):
    """A transposition and an n-cycle."""
    if n < 2:
        return [PartialPermutation.identity(n)]
    swap = {i: i for i in range(n)}
    swap[0], swap[1] = 1, 0
    cycle = {i: (i + 1) % n for i in range(n)}
    return [PartialPermutation.from_dict(swap), PartialPermutation.from_dict(cycle)]


def polymatroid_rays(ground, max_rays=DEFAULT_MAX_RAYS, timeout=None):
    """Extremal rays of the Shannon cone on ``ground``."""
    ground = GroundSet.of(ground)
    rays = dd_rays(shannon_basic(ground), dim=ground.full, max_rays=max_rays, timeout=timeout)
    return rays.as_polymatroids(ground)


def is_vamos_type(f):
    return f.ground.n == 4 and any(e(f) < 0 for e in ingleton_instances(f.ground))


# =============================================================================
# ORBITS
# =============================================================================

@dataclass
class Orbit:
    representative: object
    size: int
    members: list


def _coords(obj):
    if isinstance(obj, LinearFunctional):
        return tuple(obj.to_vector())
    return tuple(obj.ranks)


def orbit_dedup(items, generators):
    """One representative per orbit (lexicographically least image) with its orbit size."""
    items = list(items)
    if not items:
        return []
    by_coords = {_coords(x): x for x in items}
    done, orbits = set(), []
    for item in items:
        key = _coords(item)
        if key in done:
            continue
        frontier, members = [item], {key: item}
        while frontier:
            cur = frontier.pop()
            for g in generators:
                img = apply_permutation(cur, g)
                ik = _coords(img)
                if ik not in members:
                    members[ik] = img
                    frontier.append(img)
        done.update(members)
        least = min(members)
        rep = by_coords.get(least, members[least])
        present = [by_coords[c] for c in sorted(members) if c in by_coords]
        orbits.append(Orbit(rep, len(members), present))
    orbits.sort(key=lambda o: _coords(o.representative))
    return orbits


# =============================================================================
# CONSEQUENCE CONES
# =============================================================================

def _reduction_system(ground, generators, shannon):
    sys_ = ConstraintSystem(ground, "reduction")
    sys_.declare_ground(ground)
    for i, e in enumerate(generators):
        sys_.add_functional(e, tag=f"gen{i}")
    if shannon:
        for e in shannon_basic(ground):
            sys_.add_functional(e)
    return sys_


def _redundancy_job(args):
    ground, generators, index, shannon, timeout = args
    others = generators[:index] + generators[index + 1:]
    return bool(implies(_reduction_system(ground, others, shannon), generators[index], timeout=timeout))


def filter_shannon(rays, ground=None, timeout=None):
    """Drop every functional implied by the basic Shannon inequalities."""
    rays = list(rays)
    if not rays:
        return []
    ground = ground or rays[0].ground
    shannon = _reduction_system(ground, [], True)
    return [e for e in rays if not implies(shannon, e, timeout=timeout)]


def reduce_generators(generators, ground, modulo_shannon=False, jobs=DEFAULT_JOBS, timeout=None):
    """Keep the generators not implied by the others (plus Shannon when asked)."""
    generators = list(generators)
    jobs_args = [(ground, generators, i, modulo_shannon, timeout) for i in range(len(generators))]
    if jobs > 1 and len(generators) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            redundant = list(pool.map(_redundancy_job, jobs_args))
    else:
        redundant = []
        for i, args in enumerate(jobs_args):
            redundant.append(_redundancy_job(args))
            if (i + 1) % 50 == 0:
                logger.info("redundancy checks: %d/%d", i + 1, len(generators))
    return [g for g, r in zip(generators, redundant) if not r]


def _int_row(coeffs, index):
    """Sparse primitive integer row {column: value}."""
    cols = sorted(index[v] for v in coeffs)
    vec = primitive([Fraction(coeffs[v]) for v in sorted(coeffs, key=index.get)])
    return {c: x for c, x in zip(cols, vec) if x}


def _row_sig(row):
    return tuple(sorted(row.items()))


def fme_project(rows, eliminate, max_rows=DEFAULT_MAX_RAYS, timeout=None):
    """Fourier-Motzkin elimination of the columns ``eliminate``.

    ``rows`` are (coeffs, relation) pairs over named variables. Equalities
    are used as substitutions first; inequality eliminations keep a
    combination only when its history passes Chernikov's bound. Returns the
    projected rows as dicts (all ``>= 0``).
    """
    deadline = None if timeout is None else time.monotonic() + timeout
    names = sorted({v for coeffs, _ in rows for v in coeffs})
    index = {v: i for i, v in enumerate(names)}
    todo = {index[v] for v in eliminate if v in index}

    eqs, ineqs = [], []
    for coeffs, relation in rows:
        row = _int_row({v: c for v, c in coeffs.items() if c}, index)
        if not row:
            continue
        if relation == EQ:
            eqs.append(row)
        else:
            ineqs.append((row, 1 << len(ineqs)))

    def combine(r, s, a, b):
        out = dict(r)
        for c, x in s.items():
            out[c] = out.get(c, 0) * a + x * b if c in out else x * b
        for c in r:
            if c not in s:
                out[c] = out[c] * a
        out = {c: x for c, x in out.items() if x}
        if not out:
            return out
        g = 0
        for x in out.values():
            g = math.gcd(g, x)
        return {c: x // g for c, x in out.items()}

    # substitutions from equalities
    while True:
        pick = next(((i, c) for i, r in enumerate(eqs) for c in r if c in todo), None)
        if pick is None:
            break
        i, col = pick
        piv = eqs.pop(i)
        todo.discard(col)
        p = piv[col]

        def sub(r):
            if col not in r:
                return r
            q = r[col]
            # |p| r - sign(p) q piv cancels col and keeps the orientation of r
            return combine(r, piv, abs(p), -q if p > 0 else q)

        eqs = [r for r in (sub(r) for r in eqs) if r]
        ineqs = [(sub(r), h) for r, h in ineqs]
        ineqs = [(r, h) for r, h in ineqs if r]
    logger.info("elimination: %d columns by substitution, %d left for inequalities",
                len(eliminate) - len(todo), len(todo))

    done = 0
    while todo:
        if deadline is not None and time.monotonic() > deadline:
            raise ResourceCapExceeded("timeout", f"{len(todo)} columns left, {len(ineqs)} rows")
        counts = {}
        for c in todo:
            pos = sum(1 for r, _ in ineqs if r.get(c, 0) > 0)
            neg = sum(1 for r, _ in ineqs if r.get(c, 0) < 0)
            counts[c] = (pos * neg - pos - neg, c, pos, neg)
        _, col, npos, nneg = min(counts.values())
        todo.discard(col)
        done += 1
        zero = [(r, h) for r, h in ineqs if col not in r]
        pos = [(r, h) for r, h in ineqs if r.get(col, 0) > 0]
        neg = [(r, h) for r, h in ineqs if r.get(col, 0) < 0]
        out, seen = [], {}
        for r, h in zero:
            seen[_row_sig(r)] = len(out)
            out.append((r, h))
        for r, hr in pos:
            for s, hs in neg:
                h = hr | hs
                if popcount(h) > done + 1:
                    continue
                row = combine(r, s, -s[col], r[col])
                if not row:
                    continue
                sig = _row_sig(row)
                if sig in seen:
                    k = seen[sig]
                    if popcount(h) < popcount(out[k][1]):
                        out[k] = (row, h)
                    continue
                seen[sig] = len(out)
                out.append((row, h))
                if len(out) > max_rows:
                    raise ResourceCapExceeded("max-rays", f"{len(out)} rows while eliminating {names[col]}")
        ineqs = out
        logger.info("  %3d, z=%4d, p+n=%3d, p*n=%5d -> %d rows",
                    len(todo), len(zero), npos + nneg, npos * nneg, len(ineqs))

    result = [{names[c]: Fraction(x) for c, x in r.items()} for r, _ in ineqs]
    for r in eqs:
        result.append({names[c]: Fraction(x) for c, x in r.items()})
        result.append({names[c]: Fraction(-x) for c, x in r.items()})
    return result


def consequence_cone(sys_, shannon_ground=None, jobs=DEFAULT_JOBS, max_rays=DEFAULT_MAX_RAYS,
                     timeout=None, method="dd"):
    """Generators of {hP : hQ = 0, h >= 0} as functionals over the main ground.

    ``method`` is ``dd`` (extreme rays of the multiplier cone, the default)
    or ``fme`` (eliminate the auxiliary columns). With ``shannon_ground``
    set, Shannon-implied consequences are removed and irredundance is taken
    modulo the basic inequalities.
    """
    ground = sys_.ground
    main, aux = sys_.main, sys_.aux

    def main_part(coeffs, tag):
        return sys_.functional_of({v: c for v, c in coeffs.items() if sys_.is_main(v)}, tag)

    pool = {}

    def offer(e):
        if not e.is_zero():
            e = e.canonical()
            pool.setdefault(e.key(), e)

    if method == "fme":
        rows = [(row.coeffs, row.relation) for row in sys_.rows]
        logger.info("consequence cone: %d main, %d aux, %d rows", len(main), len(aux), len(rows))
        for coeffs in fme_project(rows, aux, max_rows=max_rays, timeout=timeout):
            if all(sys_.is_main(v) for v in coeffs):
                offer(main_part(coeffs, "row"))
    elif method == "dd":
        signed = []
        for row in sys_.rows:
            signed.append(row.coeffs)
            if row.relation == EQ:
                signed.append({v: -c for v, c in row.coeffs.items()})
        mixed = []
        for coeffs in signed:
            if any(not sys_.is_main(v) for v in coeffs):
                mixed.append(coeffs)
            else:
                offer(main_part(coeffs, "row"))
        logger.info("consequence cone: %d main, %d aux, %d direct rows, %d mixed rows",
                    len(main), len(aux), len(pool), len(mixed))
        if mixed:
            m = len(mixed)
            identity = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
            q_columns = [[row.get(v, 0) for row in mixed] for v in aux]
            q_columns = [col for col in q_columns if any(col)]
            rays = dd_rays(identity, q_columns, dim=m, max_rays=max_rays, timeout=timeout)
            logger.info("consequence cone: %d multiplier rays", len(rays))
            for h in rays:
                total = {}
                for weight, coeffs in zip(h, mixed):
                    if weight:
                        for v, c in coeffs.items():
                            if sys_.is_main(v):
                                total[v] = total.get(v, 0) + weight * c
                offer(main_part(total, "ray"))
    else:
        raise ValueError(f"unknown projection method {method!r}")

    candidates = [pool[k] for k in sorted(pool)]
    if shannon_ground is not None:
        candidates = filter_shannon(candidates, ground, timeout=timeout)
    reduced = reduce_generators(candidates, ground, modulo_shannon=shannon_ground is not None,
                                jobs=jobs, timeout=timeout)
    return [e.retag(f"consequence{i}") for i, e in enumerate(reduced)]

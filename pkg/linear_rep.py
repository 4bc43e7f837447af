"""
Linear polymatroids over prime fields.

Each element i carries a list V_i of independent vectors in GF(p)^d and
f(A) is the rank of the union of the V_i for i in A. Elimination runs on
numpy int64 arrays reduced mod p after every step, so p is kept below 2^31.
"""

import logging
from dataclasses import dataclass

import numpy as np

from defaults import GENERIC_VECTOR_RETRIES
from errors import FieldTooSmall, FormatError, GroundSetError
from polymatroid import GroundSet, Polymatroid, bits, ingleton_instances, submasks

logger = logging.getLogger(__name__)

MAX_PRIME = 2 ** 31


def is_prime(p):
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


# =============================================================================
# GF(p) ELIMINATION
# =============================================================================

def gf_row_reduce(mat, p):
    """Reduced row echelon form mod p; returns (matrix, pivot columns)."""
    m = np.array(mat, dtype=np.int64).reshape(len(mat), -1) % p if len(mat) else np.zeros((0, 0), np.int64)
    rows, cols = m.shape
    pivots, r = [], 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        inv = pow(int(m[r, c]), p - 2, p)
        m[r] = (m[r] * inv) % p
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] = (m[i] - m[i, c] * m[r]) % p
        pivots.append(c)
        r += 1
    return m[:r], pivots


def gf_rank(mat, p):
    if len(mat) == 0:
        return 0
    return len(gf_row_reduce(mat, p)[1])


def gf_nullspace(mat, width, p):
    """Basis of {x : mat x = 0} as rows."""
    if len(mat) == 0:
        return np.eye(width, dtype=np.int64)
    red, pivots = gf_row_reduce(mat, p)
    free = [c for c in range(width) if c not in pivots]
    basis = np.zeros((len(free), width), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for row, c in zip(red, pivots):
            basis[k, c] = (-row[f]) % p
    return basis


def gf_basis(mat, p):
    """Independent rows spanning the row space of ``mat``."""
    if len(mat) == 0:
        return np.zeros((0, 0), dtype=np.int64)
    return gf_row_reduce(mat, p)[0]


def gf_coordinates(basis, vectors, p):
    """Rows X with X @ basis = vectors (basis rows independent, vectors in their span)."""
    basis = np.asarray(basis, dtype=np.int64)
    vectors = np.asarray(vectors, dtype=np.int64)
    k = basis.shape[0]
    aug = np.concatenate([basis.T, vectors.T], axis=1) % p
    red, pivots = gf_row_reduce(aug, p)
    if len(pivots) != k or any(c >= k for c in pivots):
        raise GroundSetError("vectors are not in the span of the basis")
    return red[:k, k:].T.copy()


def _matmul(a, b, p):
    """(a @ b) mod p without int64 overflow."""
    a = np.asarray(a, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64) % p
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for t in range(a.shape[1]):
        out = (out + np.outer(a[:, t], b[t]) % p) % p
    return out


# =============================================================================
# REPRESENTATIONS
# =============================================================================

@dataclass(frozen=True)
class LinearRep:
    prime: int
    dim: int
    ground: GroundSet
    vectors: tuple   # per element, a tuple of length-dim tuples

    def __post_init__(self):
        if not is_prime(self.prime) or self.prime >= MAX_PRIME:
            raise GroundSetError(f"field size {self.prime} must be a prime below 2^31")
        if len(self.vectors) != self.ground.n:
            raise GroundSetError("one vector list per element")
        clean = []
        for label, vecs in zip(self.ground.labels, self.vectors):
            vecs = tuple(tuple(int(x) % self.prime for x in v) for v in vecs)
            if any(len(v) != self.dim for v in vecs):
                raise GroundSetError(f"vectors of {label} must have length {self.dim}")
            if vecs and gf_rank(np.array(vecs), self.prime) != len(vecs):
                raise GroundSetError(f"vectors of {label} are not linearly independent")
            clean.append(vecs)
        object.__setattr__(self, "vectors", tuple(clean))

    @classmethod
    def build(cls, prime, ground, vectors):
        """``vectors`` maps labels to lists of vectors; missing labels get none."""
        ground = GroundSet.of(ground)
        lists = [list(vectors.get(label, [])) for label in ground.labels]
        dim = next((len(v[0]) for v in lists if v), 1)
        return cls(prime, dim, ground, tuple(tuple(map(tuple, v)) for v in lists))

    def matrix(self, mask):
        rows = [v for i in bits(mask) for v in self.vectors[i]]
        if not rows:
            return np.zeros((0, self.dim), dtype=np.int64)
        return np.array(rows, dtype=np.int64)

    def element(self, label):
        return self.vectors[self.ground.index(label)]


def rank_of(rep, a):
    a = rep.ground.mask(a)
    return gf_rank(rep.matrix(a), rep.prime)


def to_polymatroid(rep):
    return Polymatroid.from_function(rep.ground, lambda m: rank_of(rep, m))


def ingleton_all(obj):
    """The six Ingleton values of a 4 element representation or polymatroid."""
    f = to_polymatroid(obj) if isinstance(obj, LinearRep) else obj
    if f.ground.n != 4:
        raise GroundSetError("Ingleton values need a 4 element ground")
    return [e(f) for e in ingleton_instances(f.ground)]


def _with_element(rep, label, vectors):
    vecs = tuple(tuple(int(x) for x in v) for v in vectors)
    return LinearRep(rep.prime, rep.dim, rep.ground.extend(label), rep.vectors + (vecs,))


# =============================================================================
# EXTENSIONS
# =============================================================================

def common_info_extend(rep, a, b, newlabel):
    """Append z spanning span(V_A) ∩ span(V_B)."""
    a, b = rep.ground.mask(a), rep.ground.mask(b)
    p = rep.prime
    u = gf_basis(rep.matrix(a), p)
    w = gf_basis(rep.matrix(b), p)
    if len(u) == 0 or len(w) == 0:
        return _with_element(rep, newlabel, [])
    stacked = np.concatenate([u, (-w) % p], axis=0)
    # x U = y W  <=>  [x, y] [U; -W] = 0
    null = gf_nullspace(stacked.T, stacked.shape[0], p)
    if len(null) == 0:
        return _with_element(rep, newlabel, [])
    meet = _matmul(null[:, :len(u)], u, p)
    return _with_element(rep, newlabel, [tuple(r) for r in gf_basis(meet, p)])


def generic_principal_extension(rep, z, alpha, newlabel, rng_seed, retries=GENERIC_VECTOR_RETRIES):
    """Append alpha random vectors of span(V_Z), verified against min(f(A)+alpha, f(AZ))."""
    if rng_seed is None:
        raise GroundSetError("generic vectors need an explicit seed")
    z = rep.ground.mask(z)
    p = rep.prime
    span = gf_basis(rep.matrix(z), p)
    if alpha < 0 or alpha > len(span):
        raise GroundSetError(f"alpha must lie in [0, {len(span)}]")
    if alpha == 0:
        return _with_element(rep, newlabel, [])
    f = to_polymatroid(rep)
    rng = np.random.default_rng(rng_seed)
    for attempt in range(1, retries + 1):
        coeffs = rng.integers(0, p, size=(alpha, len(span)))
        cand = _matmul(coeffs, span, p)
        if gf_rank(cand, p) != alpha:
            continue
        ok = True
        for m in submasks(rep.ground.full):
            stack = np.concatenate([rep.matrix(m), cand], axis=0)
            if gf_rank(stack, p) != min(f(m) + alpha, f(m | z)):
                ok = False
                break
        if ok:
            logger.info("generic principal extension found after %d attempt(s)", attempt)
            return _with_element(rep, newlabel, [tuple(r) for r in cand])
    raise FieldTooSmall(f"no generic vectors over GF({p}) after {retries} attempts; raise p")


def linear_copy(rep, a, d, suffix="'"):
    """A-copy over D: vectors split as (beta, gamma) against a basis of L_D extended to L_N."""
    a, d = rep.ground.mask(a), rep.ground.mask(d)
    if a & d:
        raise GroundSetError("copied set must be disjoint from D")
    p = rep.prime
    base_d = gf_basis(rep.matrix(d), p)
    base_n = gf_basis(rep.matrix(rep.ground.full), p)
    k = len(base_d)
    if len(base_n) == 0:
        extra = np.zeros((0, rep.dim), dtype=np.int64)
    else:
        # extend the D basis greedily by rows of the N basis
        rows = [r for r in base_d]
        for cand in base_n:
            if gf_rank(np.array(rows + [cand]), p) > len(rows):
                rows.append(cand)
        extra = np.array(rows[k:], dtype=np.int64).reshape(-1, rep.dim)
    ell = len(extra)
    full_basis = np.concatenate([base_d.reshape(-1, rep.dim), extra], axis=0) if k + ell else None
    new_dim = max(k + 2 * ell, 1)

    def lift(vectors, copy):
        if not vectors:
            return []
        coords = gf_coordinates(full_basis, np.array(vectors), p)
        out = []
        for c in coords:
            beta, gamma = list(c[:k]), list(c[k:])
            zeros = [0] * ell
            out.append(tuple(beta + (zeros + gamma if copy else gamma + zeros)) + (0,) * (new_dim - k - 2 * ell))
        return out

    vectors = [lift(list(v), False) for v in rep.vectors]
    labels = list(rep.ground.labels)
    for i in bits(a):
        labels.append(rep.ground.labels[i] + suffix)
        vectors.append(lift(list(rep.vectors[i]), True))
    return LinearRep(p, new_dim, GroundSet(tuple(labels)), tuple(tuple(v) for v in vectors))


# =============================================================================
# MINORS
# =============================================================================

def restrict_rep(rep, m):
    m = rep.ground.mask(m)
    return LinearRep(rep.prime, rep.dim, rep.ground.select(m), tuple(rep.vectors[i] for i in bits(m)))


def contract_rep(rep, k):
    """Quotient by span(V_K); each remaining element keeps a basis of its image."""
    k = rep.ground.mask(k)
    p = rep.prime
    kb = gf_basis(rep.matrix(k), p).reshape(-1, rep.dim)
    rows = [r for r in kb]
    for e in np.eye(rep.dim, dtype=np.int64):
        if gf_rank(np.array(rows + [e]), p) > len(rows):
            rows.append(e)
    full_basis = np.array(rows, dtype=np.int64)
    s = len(kb)
    new_dim = max(rep.dim - s, 1)
    rest = rep.ground.full & ~k
    vectors = []
    for i in bits(rest):
        vecs = rep.vectors[i]
        if not vecs:
            vectors.append(())
            continue
        coords = gf_coordinates(full_basis, np.array(vecs), p)[:, s:]
        if coords.shape[1] == 0:
            vectors.append(())
            continue
        basis = gf_basis(coords, p)
        vectors.append(tuple(tuple(int(x) for x in r) + (0,) * (new_dim - coords.shape[1]) for r in basis))
    return LinearRep(p, new_dim, rep.ground.select(rest), tuple(vectors))


def random_rep(prime, dim, labels, rng, max_vectors=2):
    """Random representation; each element gets up to ``max_vectors`` independent vectors."""
    ground = GroundSet.of(labels)
    vectors = []
    for _ in ground.labels:
        t = int(rng.integers(0, max_vectors + 1))
        if t == 0:
            vectors.append(())
            continue
        basis = gf_basis(rng.integers(0, prime, size=(t, dim)), prime)
        vectors.append(tuple(tuple(int(x) for x in r) for r in basis))
    return LinearRep(prime, dim, ground, tuple(vectors))


# =============================================================================
# TEXT FORMAT
# =============================================================================

def parse_rep(text, filename=None):
    """``prime: p``, ``dim: d``, optional ``base: ...``, then ``vec <element> <values>`` lines."""
    prime = dim = None
    labels, vectors = [], {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("prime:"):
                prime = int(line[6:])
            elif line.startswith("dim:"):
                dim = int(line[4:])
            elif line.startswith("base:"):
                labels = line[5:].split()
            elif line.startswith("vec"):
                parts = line.split()
                label, values = parts[1], [int(x) for x in parts[2:]]
                if dim is not None and len(values) != dim:
                    raise FormatError(f"expected {dim} values", filename, lineno)
                if label not in labels:
                    labels.append(label)
                vectors.setdefault(label, []).append(values)
            else:
                raise FormatError(f"unrecognised line {line!r}", filename, lineno)
        except FormatError:
            raise
        except ValueError as exc:
            raise FormatError(str(exc), filename, lineno) from None
    if prime is None or dim is None:
        raise FormatError("rep needs 'prime:' and 'dim:' lines", filename)
    ground = GroundSet.of(labels)
    try:
        return LinearRep(prime, dim, ground, tuple(tuple(map(tuple, vectors.get(lab, []))) for lab in labels))
    except GroundSetError as exc:
        raise FormatError(str(exc), filename) from None


def read_rep(path):
    with open(path, "r") as fh:
        return parse_rep(fh.read(), str(path))

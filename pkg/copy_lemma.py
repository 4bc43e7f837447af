"""
Copy Lemma constraint systems.

A copy sequence ``<A1:D1; A2:D2; ...>`` extends the ground set step by
step: step k adds a mirror image A' of A over D. The system built here
has one main variable per non-empty subset of the initial ground and one
auxiliary variable per surviving class of the remaining subsets.

Subsets are merged into classes by the copy isomorphisms and by the
symmetries carried along the sequence; conditional independences of each
step eliminate further classes by substitution.
"""

import logging
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction

from errors import FormatError, GroundSetError, PreconditionFailed
from exact_lp import EQ, GEQ, ConstraintSystem
from polymatroid import (GroundSet, PartialPermutation, bits, is_polymatroid,
                         parse_expr, popcount, shannon_basic, submasks, to_functional,
                         tokenize_labels, translate_mask)
from polymatroid_ops import closure_of, parallel_extend, restrict, tighten_at

logger = logging.getLogger(__name__)

ALWAYS_USELESS = "ALWAYS_USELESS"
USELESS_FOR_TARGET = "USELESS_FOR_TARGET"
ENLARGE_OVER_SET = "ENLARGE_OVER_SET"
PARALLEL_SUFFICES = "PARALLEL_SUFFICES"


def fresh_label(label, taken, prime=False):
    """Next unused name for a copy of ``label``: c1 -> c2 style, else c -> c'."""
    m = re.fullmatch(r"([A-Za-z])(\d+)", label)
    if m and not prime:
        letter = m.group(1)
        used = [int(t[1:]) for t in taken if re.fullmatch(rf"{letter}\d+", t)]
        return f"{letter}{max(used, default=0) + 1}"
    name = label + "'"
    while name in taken:
        name += "'"
    return name


# =============================================================================
# SEQUENCES
# =============================================================================

@dataclass(frozen=True)
class CopyStep:
    copied: tuple    # labels of A
    over: tuple      # labels of D
    naming: tuple    # (old, new) label pairs, one per element of A

    def __post_init__(self):
        if not self.copied:
            raise GroundSetError("copied set must be non-empty")
        if set(self.copied) & set(self.over):
            raise GroundSetError("copied set and over set must be disjoint")
        names = dict(self.naming)
        if sorted(names) != sorted(self.copied):
            raise GroundSetError("one new name per copied element")
        if len(set(names.values())) != len(names):
            raise GroundSetError("new names must be distinct")

    @classmethod
    def auto(cls, copied, over, taken, prime=True):
        taken = set(taken)
        naming = []
        for a in copied:
            new = fresh_label(a, taken, prime)
            taken.add(new)
            naming.append((a, new))
        return cls(tuple(copied), tuple(over), tuple(naming))

    def new_name(self, label):
        return dict(self.naming)[label]

    def masks(self, ground):
        return ground.mask(list(self.copied)), ground.mask(list(self.over))

    def describe(self, ground=None):
        copied = self.copied
        if ground is not None:
            copied = [lab for lab in ground.labels if lab in self.copied]
        new = "".join(self.new_name(a) for a in copied)
        return f"{new}={''.join(copied)}:{''.join(self.over)}"


@dataclass(frozen=True)
class CopySequence:
    ground0: GroundSet
    steps: tuple
    full_copy_expansion: bool = False
    use_canonical_symmetry: bool = True
    inherit_symmetries: bool = True
    assume_symmetric_acopy: bool = False
    extra_inequalities: tuple = ()   # (step index, LinearFunctional on that step's ground)

    def __post_init__(self):
        self.grounds()

    def grounds(self):
        """Ground sets before the first step and after each step."""
        out = [self.ground0]
        ground = self.ground0
        for k, step in enumerate(self.steps, start=1):
            for lab in step.copied + step.over:
                if lab not in ground.labels:
                    raise GroundSetError(f"step {k}: {lab} is not in {ground}")
            new = [step.new_name(lab) for lab in ground.labels if lab in step.copied]
            clash = [lab for lab in new if lab in ground.labels]
            if clash:
                raise GroundSetError(f"step {k}: new labels {clash} already used")
            ground = ground.extend(*new)
            out.append(ground)
        return out

    @property
    def final_ground(self):
        return self.grounds()[-1]

    def expanded(self):
        """Same sequence with every step widened to a full copy."""
        if not self.full_copy_expansion:
            return self
        ground, steps = self.ground0, []
        for step in self.steps:
            over = set(step.over)
            naming = dict(step.naming)
            taken = set(ground.labels) | set(naming.values())
            copied = []
            for lab in ground.labels:
                if lab in over:
                    continue
                copied.append(lab)
                if lab not in naming:
                    naming[lab] = fresh_label(lab, taken)
                    taken.add(naming[lab])
            full = CopyStep(tuple(copied), step.over, tuple((a, naming[a]) for a in copied))
            steps.append(full)
            ground = ground.extend(*(naming[a] for a in copied))
        return replace(self, steps=tuple(steps), full_copy_expansion=False)

    def describe(self):
        grounds = self.grounds()
        return "; ".join(s.describe(g) for s, g in zip(self.steps, grounds))


def _iter_steps(seq):
    """(index, ground before, A mask, D mask, A' mask, canonical index table)."""
    grounds = seq.grounds()
    for k, step in enumerate(seq.steps):
        before, after = grounds[k], grounds[k + 1]
        a, d = step.masks(before)
        table = {i: i for i in range(after.n)}
        for i in bits(a):
            j = after.index(step.new_name(before.labels[i]))
            table[i], table[j] = j, i
        a_new = translate_mask(a, table)
        yield k, before, after, a, d, a_new, table


_STEP_RE = re.compile(r"^\s*(?:(?P<new>[^=:]+)=)?\s*(?P<old>[^=:]+):(?P<over>[^=:]*)$")


def parse_step(text, ground, prime=True):
    m = _STEP_RE.match(text)
    if not m:
        raise GroundSetError(f"cannot parse copy step {text!r}")
    old = tokenize_labels(m.group("old"))
    over = tokenize_labels(m.group("over"))
    if m.group("new"):
        new = tokenize_labels(m.group("new"))
        if len(new) != len(old):
            raise GroundSetError(f"step {text!r} names {len(new)} copies for {len(old)} elements")
        return CopyStep(tuple(old), tuple(over), tuple(zip(old, new)))
    return CopyStep.auto(old, over, ground.labels, prime=prime)


def _flag(value, filename, lineno):
    value = value.strip().lower()
    if value in ("yes", "on", "true", "1"):
        return True
    if value in ("no", "off", "false", "0"):
        return False
    raise FormatError(f"expected yes/no, got {value!r}", filename, lineno)


def parse_copy_sequence(text, filename=None):
    """``base:``, ``copy:`` (steps separated by ``;``), option and ``extra:`` lines."""
    ground = None
    steps, extras, options = [], [], {}
    option_keys = {"full": "full_copy_expansion", "canonical": "use_canonical_symmetry",
                   "inherit": "inherit_symmetries", "symmetric-acopy": "assume_symmetric_acopy"}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        key = key.strip().lower()
        if not sep:
            raise FormatError(f"unrecognised line {line!r}", filename, lineno)
        try:
            if key == "base":
                ground = current = GroundSet.of(value.split())
            elif key == "copy":
                if ground is None:
                    raise FormatError("copy line before base line", filename, lineno)
                for part in value.split(";"):
                    if part.strip():
                        step = parse_step(part, current)
                        steps.append(step)
                        current = CopySequence(ground, tuple(steps)).final_ground
            elif key in option_keys:
                options[option_keys[key]] = _flag(value, filename, lineno)
            elif key == "extra":
                index, _, expr = value.strip().partition(" ")
                extras.append((int(index), expr, lineno))
            else:
                raise FormatError(f"unknown key {key!r}", filename, lineno)
        except GroundSetError as exc:
            raise FormatError(str(exc), filename, lineno) from None
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(str(exc), filename, lineno) from None
    if ground is None:
        raise FormatError("copy sequence needs a 'base:' line", filename)
    seq = CopySequence(ground, tuple(steps), **options)
    grounds = seq.expanded().grounds()
    parsed = []
    for index, expr, lineno in extras:
        if not 0 <= index < len(grounds):
            raise FormatError(f"extra inequality at unknown step {index}", filename, lineno)
        try:
            e = to_functional(parse_expr(expr, grounds[index]), tag=f"extra{len(parsed)}")
        except GroundSetError as exc:
            raise FormatError(str(exc), filename, lineno) from None
        parsed.append((index, e))
    return replace(seq, extra_inequalities=tuple(parsed))


def read_copy_sequence(path):
    with open(path, "r") as fh:
        return parse_copy_sequence(fh.read(), str(path))


# =============================================================================
# SYMMETRIES
# =============================================================================

@dataclass(frozen=True)
class Generator:
    perm: PartialPermutation
    name: str


@dataclass
class SymmetryState:
    ground: GroundSet
    generators: list = field(default_factory=list)

    def describe(self):
        return [(g.name, g.perm.describe(self.ground)) for g in self.generators]


def _mapper(table, n):
    """Fast mask image for an index table, via per-byte lookup."""
    chunks = []
    for start in range(0, n, 8):
        sub = [0] * 256
        for v in range(256):
            out = 0
            for b in range(8):
                i = start + b
                if v >> b & 1 and i in table:
                    out |= 1 << table[i]
            sub[v] = out
        chunks.append(sub)

    def image(mask):
        out, c = 0, 0
        while mask:
            out |= chunks[c][mask & 255]
            mask >>= 8
            c += 1
        return out

    return image


def carry_symmetries(seq):
    """Generators after each step: the canonical map plus inherited extensions."""
    seq = seq.expanded()
    gens = []
    for k, before, after, a, d, a_new, table in _iter_steps(seq):
        full_copy = (a | d) == before.full
        carried = []
        for g in gens:
            perm = g.perm
            if (seq.inherit_symmetries and perm.is_total(before.n)
                    and perm.image(d) == d and perm.image(a) == a):
                ext = perm.as_dict()
                for i in bits(a):
                    ext[table[i]] = table[ext[i]]
                carried.append(Generator(PartialPermutation.from_dict(ext), g.name + "*"))
            else:
                carried.append(g)
        canonical = None
        if full_copy and seq.use_canonical_symmetry:
            canonical = Generator(PartialPermutation.from_dict(table), f"pi{k + 1}")
        elif not full_copy and seq.assume_symmetric_acopy:
            logger.warning("step %d: assuming a pi_A-symmetric A-copy; this is stronger "
                           "than the Copy Lemma guarantees", k + 1)
            canonical = Generator(PartialPermutation.from_dict(table), f"pi{k + 1}")
        gens = ([canonical] if canonical else []) + carried
    state = SymmetryState(seq.final_ground, gens)
    validate_symmetries(seq, state)
    return state


def validate_symmetries(seq, state):
    """Each generator permutes its domain; total ones fix the last over set and commute with its canonical map."""
    seq = seq.expanded()
    if not seq.steps:
        return
    *_, (k, before, after, a, d, a_new, table) = _iter_steps(seq)
    canon = PartialPermutation.from_dict(table)
    for g in state.generators:
        perm = g.perm
        dom = perm.domain
        if perm.image(dom) != dom:
            raise GroundSetError(f"symmetry generator {g.name} failing validation: not a permutation of its domain")
        if not perm.is_total(after.n):
            continue
        if perm.image(d) != d:
            raise GroundSetError(f"symmetry generator {g.name} failing validation: moves the over set")
        full_copy = (a | d) == before.full
        if full_copy and seq.use_canonical_symmetry and \
                perm.compose(canon).as_dict() != canon.compose(perm).as_dict():
            raise GroundSetError(f"symmetry generator {g.name} failing validation: "
                                 "does not commute with the canonical map")


# =============================================================================
# CLASSES
# =============================================================================

class _UnionFind:
    """Union-find over subset masks; the root of a class is its least mask."""

    def __init__(self, size):
        self.parent = list(range(size))

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb


def _merge_classes(seq, state):
    final = seq.final_ground
    uf = _UnionFind(final.full + 1)
    for k, before, after, a, d, a_new, table in _iter_steps(seq):
        image = _mapper(table, after.n)
        for j in submasks(a | d):
            if j & a:
                uf.union(j, image(j))
    for g in state.generators:
        image = _mapper(g.perm.as_dict(), final.n)
        for m in submasks(g.perm.domain):
            if m:
                uf.union(m, image(m))
    return uf


def symmetry_classes(seq):
    """Number of variable classes after isomorphism and symmetry merging."""
    seq = seq.expanded()
    uf = _merge_classes(seq, carry_symmetries(seq))
    return sum(1 for m in range(1, seq.final_ground.full + 1) if uf.find(m) == m)


# =============================================================================
# SYSTEMS
# =============================================================================

@dataclass
class CopySystem:
    system: ConstraintSystem
    symmetry: SymmetryState
    sequence: CopySequence
    class_count: int
    eliminated: int
    classes: object = field(repr=False, default=None)   # union-find over final masks
    _terms: dict = field(repr=False, default_factory=dict)
    _resolve: object = field(repr=False, default=None)

    @property
    def final_ground(self):
        return self.sequence.final_ground

    def class_of(self, mask):
        return self.classes.find(mask)

    def term(self, mask):
        """Coefficients over the system variables standing for subset ``mask``."""
        return self._resolve(mask)


def build_copy_system(seq, balanced=False):
    """Constraint system of the iterated copy with merged and eliminated variables."""
    seq = seq.expanded()
    ground0, final = seq.ground0, seq.final_ground
    full0 = ground0.full
    state = carry_symmetries(seq)
    uf = _merge_classes(seq, state)
    class_count = sum(1 for m in range(1, final.full + 1) if uf.find(m) == m)

    sys_ = ConstraintSystem(ground0, f"copy <{seq.describe()}>")
    sys_.declare_ground(ground0)

    def var(root):
        if root <= full0:
            return ground0.name(root)
        return sys_.declare(final.name(root))

    # main subsets merged by symmetries
    for m in range(1, full0 + 1):
        r = uf.find(m)
        if r != m:
            sys_.add_row({ground0.name(m): 1, ground0.name(r): -1}, EQ, f"sym[{ground0.name(m)}]")

    # conditional independence substitutions
    elim, kept = {}, []
    for k, before, after, a, d, a_new, table in _iter_steps(seq):
        e = before.full & ~d
        image = _mapper(table, after.n)
        for j in submasks(a):
            if not j:
                continue
            jn = image(j)
            for kk in submasks(e):
                if not kk:
                    continue
                rhs = {}
                for sign, m in ((1, jn | d), (1, kk | d), (-1, d)):
                    if m:
                        rhs[m] = rhs.get(m, 0) + sign
                target = jn | kk | d
                tag = f"copy{k + 1}[{after.name(jn)},{after.name(kk)}|{after.name(d) if d else ''}]"
                if j == a and kk == e:
                    kept.append((target, rhs, f"copy{k + 1}[independence]"))
                    continue
                r = uf.find(target)
                if r <= full0 or r in elim:
                    kept.append((target, rhs, tag))
                else:
                    elim[r] = rhs
    # the independence row itself may eliminate one more class
    for i, (target, rhs, tag) in enumerate(kept):
        if tag.endswith("[independence]"):
            r = uf.find(target)
            if r > full0 and r not in elim:
                elim[r] = rhs

    memo = {}

    def resolve(mask):
        r = uf.find(mask)
        if r in memo:
            return memo[r]
        if r in elim:
            out = {}
            for m, c in elim[r].items():
                for v, x in resolve(m).items():
                    out[v] = out.get(v, 0) + c * x
            out = {v: x for v, x in out.items() if x}
        else:
            out = {var(r): Fraction(1)}
        memo[r] = out
        return out

    def lower(coeffs):
        out = {}
        for m, c in coeffs.items():
            for v, x in resolve(m).items():
                out[v] = out.get(v, 0) + c * x
        return out

    for target, rhs, tag in kept:
        row = lower({target: 1})
        for v, x in lower(rhs).items():
            row[v] = row.get(v, 0) - x
        sys_.add_row(row, EQ, tag)
    for e in shannon_basic(final, balanced=balanced):
        sys_.add_row(lower(e.coeffs), GEQ, e.tag)
    grounds = seq.grounds()
    for index, e in seq.extra_inequalities:
        table = final.embed(grounds[index])
        coeffs = {translate_mask(m, table): c for m, c in e.coeffs.items()}
        sys_.add_row(lower(coeffs), GEQ, e.tag or f"extra@{index}")

    logger.info("copy system %s: %d subsets, %d classes, %d eliminated, %s",
                seq.describe(), final.full, class_count, len(elim), sys_.summary())
    return CopySystem(sys_, state, seq, class_count, len(elim), uf, memo, resolve)


# =============================================================================
# PRECONDITIONS
# =============================================================================

@dataclass(frozen=True)
class Advisory:
    code: str
    message: str


def precheck(step, ground, f=None):
    """Advisories telling when a copy step cannot produce anything new."""
    ground = GroundSet.of(ground)
    a, d = step.masks(ground)
    out = []
    nd = popcount(d)
    if nd <= 1 or nd == ground.n - 1:
        out.append(Advisory(ALWAYS_USELESS,
                            f"|D| = {nd}: every polymatroid has a copy over {ground.name(d)}"))
    if f is None:
        return out
    if f.ground != ground:
        raise GroundSetError("target lives on a different ground than the step")
    if sum(f(1 << i) for i in bits(d)) == f(d):
        out.append(Advisory(USELESS_FOR_TARGET,
                            f"{ground.name(d)} is modular in the target: an explicit copy exists"))
    closure = closure_of(f, d)
    extra = closure & ~d & ~a
    if extra:
        out.append(Advisory(ENLARGE_OVER_SET,
                            f"closure of {ground.name(d)} adds {ground.name(extra)}; "
                            f"copy over {ground.name(closure & ~a)} instead"))
    if f(a | d) == f(d):
        out.append(Advisory(PARALLEL_SUFFICES,
                            f"f({ground.name(a)}|{ground.name(d)}) = 0: a parallel extension is a copy"))
    return out


def precheck_sequence(seq, f=None):
    """Advisories per step; the target applies to the first step only."""
    seq = seq.expanded()
    grounds = seq.grounds()
    return [(k, precheck(step, grounds[k], f if k == 0 else None))
            for k, step in enumerate(seq.steps)]


# =============================================================================
# EXPLICIT COPIES
# =============================================================================

@dataclass
class CopyCheck:
    ok: bool
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def verify_copy(f, fstar, step):
    """Check the extension, isomorphism and independence clauses and polymatroidness."""
    ground = f.ground
    a, d = step.masks(ground)
    big = fstar.ground
    embed = big.embed(ground)
    failures = []
    if any(fstar(translate_mask(m, embed)) != f(m) for m in ground.subsets()):
        failures.append("extension")
    table = {i: i for i in range(big.n)}
    for i in bits(a):
        j = big.index(step.new_name(ground.labels[i]))
        table[embed[i]], table[j] = j, embed[i]
    ad = translate_mask(a | d, embed)
    for j in submasks(ad):
        if fstar(translate_mask(j, table)) != fstar(j):
            failures.append("isomorphism")
            break
    a_new = translate_mask(translate_mask(a, embed), table)
    lhs = fstar(big.full)
    rhs = f(a | d) - f(d) + f(ground.full)
    if a_new | translate_mask(ground.full, embed) != big.full or lhs != rhs:
        failures.append("independence")
    if not is_polymatroid(fstar):
        failures.append("polymatroid")
    return CopyCheck(not failures, failures)


def _modular_full_copy(f, d, names):
    """f*(I pi(J) K) = min over K <= L <= D of f(IL) + f(JL) - f(L)."""
    ground = f.ground
    e = ground.full & ~d
    e_idx = bits(e)
    big = ground.extend(*names)
    n = ground.n
    new_to_old = {n + t: i for t, i in enumerate(e_idx)}

    def rank(m):
        i_part = m & e
        k_part = m & d
        j_part = 0
        for t, old in new_to_old.items():
            if m >> t & 1:
                j_part |= 1 << old
        best = None
        for extra in submasks(d & ~k_part):
            ell = k_part | extra
            v = f(i_part | ell) + f(j_part | ell) - f(ell)
            if best is None or v < best:
                best = v
        return best

    return f.like(big, (rank(m) for m in big.subsets()))


def explicit_copy(f, step):
    """A concrete A-copy in the precondition cases, verified before it is returned."""
    ground = f.ground
    a, d = step.masks(ground)
    a_labels = [lab for lab in ground.labels if lab in step.copied]
    if f(a | d) == f(d):
        g = f
        for lab in a_labels:
            g = parallel_extend(g, lab, step.new_name(lab))
        case = "parallel"
    elif sum(f(1 << i) for i in bits(d)) == f(d):
        e_labels = [lab for lab in ground.labels if not d >> ground.index(lab) & 1]
        taken = set(ground.labels) | set(dict(step.naming).values())
        names = []
        for lab in e_labels:
            if lab in step.copied:
                names.append(step.new_name(lab))
            else:
                tmp = fresh_label(lab, taken, prime=True)
                taken.add(tmp)
                names.append(tmp)
        full = _modular_full_copy(f, d, names)
        keep = full.ground.mask(list(ground.labels) + [step.new_name(x) for x in a_labels])
        g = restrict(full, keep)
        case = "modular"
    elif popcount(d) == ground.n - 1:
        lab = a_labels[0]
        ai = ground.bit(lab)
        lam = f(ground.full) - f(ground.full & ~ai)
        tight = tighten_at(f, ai)
        g = parallel_extend(tight, lab, step.new_name(lab))
        both = g.ground.mask([lab, step.new_name(lab)])
        g = g.like(g.ground, (g(m) + (lam if m & ai else 0) + (lam if m & both & ~ai else 0)
                              for m in g.ground.subsets()))
        case = "complement"
    else:
        raise PreconditionFailed("no explicit construction: D is not modular, "
                                 "f(A|D) > 0 and |D| < |N| - 1")
    check = verify_copy(f, g, step)
    if not check:
        raise PreconditionFailed(f"{case} construction failed {check.failures}")
    logger.debug("explicit %s copy %s", case, step.describe(ground))
    return g

"""
Core objects: ground sets, subset masks, rank vectors, linear functionals,
information expressions and the basic Shannon inequalities.

Subsets are python ints: bit i set means element i is in the subset. The
empty set has no stored coordinate, coordinate index is ``mask - 1`` and
every formula uses f(empty) = 0 inline.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from defaults import LABEL_PATTERN, MAX_GROUND_SIZE, PROFILE_TOLERANCE
from errors import FormatError, GroundSetError

logger = logging.getLogger(__name__)

_LABEL_RE = re.compile(LABEL_PATTERN)


# =============================================================================
# SUBSET ARITHMETIC
# =============================================================================

def popcount(mask):
    return mask.bit_count()


def bits(mask):
    """Element indices of ``mask`` in increasing order."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def submasks(mask):
    """All submasks of ``mask`` (empty set included) in increasing order."""
    out = []
    s = mask
    while True:
        out.append(s)
        if s == 0:
            break
        s = (s - 1) & mask
    out.reverse()
    return out


def supersets_within(mask, full):
    """Masks B with mask ⊆ B ⊆ full, increasing."""
    free = full & ~mask
    return [mask | s for s in submasks(free)]


def to_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10 ** 12)
    return Fraction(value)


def format_number(value):
    """Text form of a rank or coefficient: ``p``, ``p/q`` or a decimal."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


# =============================================================================
# GROUND SETS
# =============================================================================

@dataclass(frozen=True)
class GroundSet:
    """Ordered list of distinct element labels."""

    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise GroundSetError("ground set must have at least one element")
        if len(labels) > MAX_GROUND_SIZE:
            raise GroundSetError(
                f"ground set has {len(labels)} elements, cap is {MAX_GROUND_SIZE}")
        if len(set(labels)) != len(labels):
            raise GroundSetError(f"duplicate labels in {' '.join(labels)}")
        for label in labels:
            if not _LABEL_RE.fullmatch(label):
                raise GroundSetError(f"bad element label {label!r}")

    @classmethod
    def of(cls, spec):
        """Build from ``"abcd"``, ``"a1 b1 c1"`` or an iterable of labels."""
        if isinstance(spec, GroundSet):
            return spec
        if isinstance(spec, str):
            return cls(tuple(tokenize_labels(spec)))
        return cls(tuple(spec))

    @property
    def n(self):
        return len(self.labels)

    @property
    def full(self):
        return (1 << self.n) - 1

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self.labels)

    def __str__(self):
        return " ".join(self.labels)

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise GroundSetError(f"unknown element {label!r} (ground: {self})") from None

    def bit(self, label):
        return 1 << self.index(label)

    def mask(self, spec):
        """Mask of a subset given as text, a label iterable or an int mask."""
        if isinstance(spec, int):
            if spec < 0 or spec > self.full:
                raise GroundSetError(f"mask {spec} outside ground {self}")
            return spec
        if isinstance(spec, str):
            spec = tokenize_labels(spec)
        m = 0
        for label in spec:
            m |= self.bit(label)
        return m

    def name(self, mask):
        """Concatenated labels in ground order; ``"∅"`` for the empty set."""
        if mask == 0:
            return "∅"
        return "".join(self.labels[i] for i in bits(mask))

    def spaced(self, mask):
        return " ".join(self.labels[i] for i in bits(mask))

    def subsets(self):
        return range(1, self.full + 1)

    def select(self, mask):
        """Sub-ground made of the labels in ``mask``, order kept."""
        if mask == 0:
            raise GroundSetError("cannot select the empty subset")
        return GroundSet(tuple(self.labels[i] for i in bits(mask)))

    def extend(self, *labels):
        return GroundSet(self.labels + tuple(labels))

    def embed(self, other):
        """Mask translation table from ``other``'s indices into this ground."""
        return [self.index(label) for label in other.labels]


def tokenize_labels(text):
    """Split ``"a1b1c"`` or ``"a1 b1, c"`` into labels."""
    cleaned = re.sub(r"[\s,{}]", "", text)
    if cleaned in ("", "∅", "0"):
        return []
    labels = _LABEL_RE.findall(cleaned)
    if "".join(labels) != cleaned:
        raise GroundSetError(f"cannot split {text!r} into element labels")
    return labels


def translate_mask(mask, table):
    """Move ``mask`` through an index table (old index -> new index)."""
    out = 0
    for i in bits(mask):
        out |= 1 << table[i]
    return out


# =============================================================================
# PERMUTATIONS
# =============================================================================

@dataclass(frozen=True)
class PartialPermutation:
    """Injective map between element indices; total when its domain is N."""

    mapping: tuple   # sorted (src, dst) pairs

    def __post_init__(self):
        pairs = tuple(sorted(dict(self.mapping).items()))
        object.__setattr__(self, "mapping", pairs)
        images = [d for _, d in pairs]
        if len(set(images)) != len(images):
            raise GroundSetError("permutation is not injective")

    @classmethod
    def from_dict(cls, mapping):
        return cls(tuple(mapping.items()))

    @classmethod
    def identity(cls, n):
        return cls(tuple((i, i) for i in range(n)))

    @classmethod
    def from_cycles(cls, ground, text, n=None):
        """Parse cycle notation ``(a b)(c d)``; unnamed elements are fixed."""
        n = ground.n if n is None else n
        mapping = {i: i for i in range(n)}
        for cycle in re.findall(r"\(([^)]*)\)", text):
            labels = [lab for part in cycle.split() for lab in tokenize_labels(part)]
            idx = [ground.index(lab) for lab in labels]
            for a, b in zip(idx, idx[1:] + idx[:1]):
                mapping[a] = b
        return cls.from_dict(mapping)

    @classmethod
    def swap(cls, ground, a, b):
        mapping = {i: i for i in range(ground.n)}
        ia, ib = ground.index(a), ground.index(b)
        mapping[ia], mapping[ib] = ib, ia
        return cls.from_dict(mapping)

    def as_dict(self):
        return dict(self.mapping)

    @property
    def domain(self):
        m = 0
        for src, _ in self.mapping:
            m |= 1 << src
        return m

    def is_total(self, n):
        return self.domain == (1 << n) - 1 and all(d < n for _, d in self.mapping)

    def image(self, mask):
        """Image of a subset contained in the domain."""
        table = dict(self.mapping)
        out = 0
        for i in bits(mask):
            if i not in table:
                raise GroundSetError(f"element {i} outside permutation domain")
            out |= 1 << table[i]
        return out

    def inverse(self):
        return PartialPermutation(tuple((d, s) for s, d in self.mapping))

    def compose(self, other):
        """``self`` after ``other``."""
        mine = dict(self.mapping)
        return PartialPermutation(tuple(
            (s, mine[d]) for s, d in other.mapping if d in mine))

    def describe(self, ground):
        """Cycle notation, fixed points omitted."""
        table = dict(self.mapping)
        seen, cycles = set(), []
        for start in sorted(table):
            if start in seen or table[start] == start:
                continue
            cycle, i = [], start
            while i in table and i not in seen:
                seen.add(i)
                cycle.append(ground.labels[i])
                i = table[i]
            cycles.append("(" + " ".join(cycle) + ("" if i == start else " ...") + ")")
        return "".join(cycles) or "()"


# =============================================================================
# SET FUNCTIONS
# =============================================================================

@dataclass(frozen=True)
class SetFunction:
    """Dense vector of values over the non-empty subsets of ``ground``."""

    ground: GroundSet
    ranks: tuple

    def __post_init__(self):
        values = tuple(self._coerce(v) for v in self.ranks)
        if len(values) != self.ground.full:
            raise GroundSetError(
                f"rank vector has {len(values)} entries, expected {self.ground.full}")
        object.__setattr__(self, "ranks", values)

    @staticmethod
    def _coerce(value):
        return value

    @classmethod
    def from_function(cls, ground, fn):
        ground = GroundSet.of(ground)
        return cls(ground, tuple(fn(m) for m in ground.subsets()))

    @classmethod
    def from_dict(cls, ground, values):
        """``values`` maps subset names (or masks) to numbers; all required."""
        ground = GroundSet.of(ground)
        table = {ground.mask(k): v for k, v in values.items()}
        missing = [ground.name(m) for m in ground.subsets() if m not in table]
        if missing:
            raise GroundSetError(f"missing subsets: {', '.join(missing[:8])}")
        return cls(ground, tuple(table[m] for m in ground.subsets()))

    @classmethod
    def zero(cls, ground):
        ground = GroundSet.of(ground)
        return cls(ground, (0,) * ground.full)

    def like(self, ground, values):
        """Same class, new data; ops use this so exact stays exact."""
        return type(self)(ground, tuple(values))

    def __call__(self, mask):
        if mask == 0:
            return self._coerce(0)
        return self.ranks[mask - 1]

    def value(self, subset):
        return self(self.ground.mask(subset))

    def cond(self, a, b):
        """f(A|B) = f(AB) - f(B)."""
        return self(a | b) - self(b)

    def mutual(self, a, b, c=0):
        """f(A,B|C) = f(AC) + f(BC) - f(C) - f(ABC)."""
        return self(a | c) + self(b | c) - self(c) - self(a | b | c)

    def as_dict(self):
        return {self.ground.name(m): self(m) for m in self.ground.subsets()}

    def __add__(self, other):
        if self.ground != other.ground:
            raise GroundSetError("cannot add set functions on different grounds")
        return self.like(self.ground, (x + y for x, y in zip(self.ranks, other.ranks)))

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, factor):
        return self.like(self.ground, (factor * x for x in self.ranks))

    def __rmul__(self, factor):
        return self.scaled(factor)

    def is_integer(self):
        return all(Fraction(v).denominator == 1 for v in self.ranks)

    def is_matroid(self):
        """Integer ranks with every singleton of rank 0 or 1."""
        return self.is_integer() and all(self(1 << i) in (0, 1) for i in range(self.ground.n))

    def loops(self):
        return [self.ground.labels[i] for i in range(self.ground.n) if self(1 << i) == 0]

    def relabel(self, labels):
        return self.like(GroundSet.of(labels), self.ranks)

    def close_to(self, other, tol=PROFILE_TOLERANCE):
        return self.ground == other.ground and all(
            abs(float(x) - float(y)) <= tol for x, y in zip(self.ranks, other.ranks))

    def to_text(self):
        lines = [f"base: {self.ground}"]
        for m in self.ground.subsets():
            lines.append(f"{self.ground.name(m)} {format_number(self(m))}")
        return "\n".join(lines) + "\n"


class Polymatroid(SetFunction):
    """Exact rank vector; being a polymatroid is checked, never assumed."""

    @staticmethod
    def _coerce(value):
        return to_fraction(value)


class EntropyProfile(SetFunction):
    """Floating point entropies in bits."""

    @staticmethod
    def _coerce(value):
        return float(value)

    def rounded(self):
        """Exact copy with decimal ranks, for the polyhedral pipeline."""
        return Polymatroid(self.ground, self.ranks)


# =============================================================================
# LINEAR FUNCTIONALS
# =============================================================================

@dataclass(frozen=True, eq=False)
class LinearFunctional:
    """The inequality sum coeffs[A] * x(A) >= 0 over non-empty subsets A."""

    ground: GroundSet
    coeffs: dict = field(default_factory=dict)
    tag: str = ""

    def __post_init__(self):
        clean = {}
        for mask, c in self.coeffs.items():
            if mask <= 0 or mask > self.ground.full:
                raise GroundSetError(f"coefficient on mask {mask} outside ground {self.ground}")
            c = to_fraction(c)
            if c != 0:
                clean[mask] = c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def from_vector(cls, ground, vector, tag=""):
        return cls(ground, {m: c for m, c in zip(ground.subsets(), vector) if c}, tag)

    @classmethod
    def from_names(cls, ground, values, tag=""):
        ground = GroundSet.of(ground)
        coeffs = {}
        for name, c in values.items():
            m = ground.mask(name)
            coeffs[m] = coeffs.get(m, 0) + to_fraction(c)
        return cls(ground, coeffs, tag)

    def __call__(self, f):
        return sum((c * f(m) for m, c in self.coeffs.items()), f._coerce(0))

    def evaluate(self, f):
        return self(f)

    def dot(self, vector):
        """Value on a plain coordinate vector indexed by mask - 1."""
        return sum((c * vector[m - 1] for m, c in self.coeffs.items()), Fraction(0))

    def to_vector(self):
        vec = [Fraction(0)] * self.ground.full
        for m, c in self.coeffs.items():
            vec[m - 1] = c
        return vec

    def is_zero(self):
        return not self.coeffs

    def retag(self, tag):
        return LinearFunctional(self.ground, self.coeffs, tag)

    def _combine(self, other, sign):
        if self.ground != other.ground:
            raise GroundSetError("functionals live on different grounds")
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0) + sign * c
        return LinearFunctional(self.ground, out)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self * -1

    def __mul__(self, factor):
        factor = to_fraction(factor)
        return LinearFunctional(self.ground, {m: factor * c for m, c in self.coeffs.items()}, self.tag)

    __rmul__ = __mul__

    def canonical(self):
        """Primitive integer multiple; positive scaling only, so the sign is kept."""
        if not self.coeffs:
            return self
        lcm = 1
        for c in self.coeffs.values():
            lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
        ints = {m: int(c * lcm) for m, c in self.coeffs.items()}
        g = 0
        for v in ints.values():
            g = math.gcd(g, v)
        return LinearFunctional(self.ground, {m: Fraction(v // g) for m, v in ints.items()}, self.tag)

    def key(self):
        """Hashable comparison key of the canonical form."""
        return tuple((m, int(c)) for m, c in self.canonical().coeffs.items())

    def __eq__(self, other):
        return (isinstance(other, LinearFunctional) and self.ground == other.ground
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.ground, tuple(self.coeffs.items())))

    def is_balanced(self):
        return all(self.dot_r(i) == 0 for i in range(self.ground.n))

    def dot_r(self, i):
        """Value on r_i: sum of coefficients over subsets containing i."""
        return sum((c for m, c in self.coeffs.items() if m >> i & 1), Fraction(0))

    def pretty(self):
        """Compact signed form, e.g. ``ac + bc - c - abc``."""
        if not self.coeffs:
            return "0"
        parts = []
        for m, c in self.coeffs.items():
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            coef = "" if mag == 1 else f"{format_number(mag)}*"
            parts.append(f"{sign} {coef}{self.ground.name(m)}")
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def to_text(self):
        lines = [f"base: {self.ground}"]
        if self.tag:
            lines.insert(0, f"# {self.tag}")
        for m, c in self.coeffs.items():
            lines.append(f"{self.ground.name(m)} {format_number(c)}")
        return "\n".join(lines) + "\n"


# =============================================================================
# INFORMATION EXPRESSIONS
# =============================================================================

H, H_COND, MI, MI_COND, INGLETON = "H", "H|", "I", "I|", "Ingleton"


@dataclass(frozen=True)
class Term:
    coef: Fraction
    kind: str
    args: tuple   # masks; Ingleton takes four singletons


@dataclass(frozen=True)
class InfoExpr:
    ground: GroundSet
    terms: tuple

    def __post_init__(self):
        full = self.ground.full
        for t in self.terms:
            for a in t.args:
                if a & ~full:
                    raise GroundSetError("expression argument outside the ground set")
            if t.kind == INGLETON:
                if len(t.args) != 4 or any(popcount(a) != 1 for a in t.args) \
                        or popcount(t.args[0] | t.args[1] | t.args[2] | t.args[3]) != 4:
                    raise GroundSetError("Ingleton needs four distinct elements")

    def __add__(self, other):
        return InfoExpr(self.ground, self.terms + other.terms)

    def scaled(self, factor):
        return InfoExpr(self.ground, tuple(
            Term(t.coef * to_fraction(factor), t.kind, t.args) for t in self.terms))

    def describe(self):
        parts = []
        for t in self.terms:
            names = [self.ground.name(a) for a in t.args]
            if t.kind == H:
                body = f"H({names[0]})"
            elif t.kind == H_COND:
                body = f"H({names[0]}|{names[1]})"
            elif t.kind == MI:
                body = f"I({names[0]};{names[1]})"
            elif t.kind == MI_COND:
                body = f"I({names[0]};{names[1]}|{names[2]})"
            else:
                body = "[" + ",".join(names) + "]"
            coef = "" if abs(t.coef) == 1 else format_number(abs(t.coef)) + " "
            parts.append(("- " if t.coef < 0 else "+ ") + coef + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else text


_TERM_RE = re.compile(
    r"\s*(?P<sign>[+-])?\s*(?P<coef>\d+(?:\.\d+)?(?:/\d+)?)?\s*\*?\s*"
    r"(?P<atom>(?:H|I|Ingleton)?\s*(?:\([^()]*\)|\[[^\[\]]*\]))")


def parse_expr(text, ground):
    """Parse an information expression such as ``[a,b,c,d] + (a,b|c) + 3 I(cd;z|ab)``."""
    ground = GroundSet.of(ground)
    body = text.replace("‖", "|").replace("||", "|").strip()
    body = re.sub(r"\s*>=\s*0\s*$", "", body)
    pos, terms = 0, []
    while pos < len(body):
        if not body[pos:].strip():
            break
        m = _TERM_RE.match(body, pos)
        if not m or (terms and not m.group("sign")):
            raise FormatError(f"cannot parse expression near {body[pos:pos + 20]!r}")
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if m.group("sign") == "-":
            coef = -coef
        terms.append(_parse_atom(m.group("atom").replace(" ", ""), coef, ground))
        pos = m.end()
    if not terms:
        raise FormatError(f"empty expression {text!r}")
    return InfoExpr(ground, tuple(terms))


def _parse_atom(atom, coef, ground):
    try:
        if atom.startswith("Ingleton") or atom.startswith("["):
            inner = atom[atom.index("[") + 1:-1]
            labels = [lab for lab in inner.split(",") if lab]
            return Term(coef, INGLETON, tuple(ground.mask([lab]) for lab in labels))
        inner = atom[atom.index("(") + 1:-1]
        main, _, given = inner.partition("|")
        if atom.startswith("H"):
            a = ground.mask(main)
            if given:
                return Term(coef, H_COND, (a, ground.mask(given)))
            return Term(coef, H, (a,))
        sep = ";" if ";" in main else ","
        left, _, right = main.partition(sep)
        if not right:
            raise FormatError(f"mutual information needs two arguments in {atom!r}")
        a, b = ground.mask(left), ground.mask(right)
        if given:
            return Term(coef, MI_COND, (a, b, ground.mask(given)))
        return Term(coef, MI, (a, b))
    except GroundSetError as exc:
        raise FormatError(f"{exc} in {atom!r}") from None


def _term_pieces(t):
    """(coefficient, mask) pieces of a single term, before scaling."""
    if t.kind == H:
        return [(1, t.args[0])]
    if t.kind == H_COND:
        a, b = t.args
        return [(1, a | b), (-1, b)]
    if t.kind in (MI, MI_COND):
        a, b = t.args[0], t.args[1]
        c = t.args[2] if t.kind == MI_COND else 0
        return [(1, a | c), (1, b | c), (-1, c), (-1, a | b | c)]
    a, b, c, d = t.args
    return ([(-1, a), (-1, b), (1, a | b)]
            + [(1, a | c), (1, b | c), (-1, c), (-1, a | b | c)]
            + [(1, a | d), (1, b | d), (-1, d), (-1, a | b | d)]
            + [(1, c), (1, d), (-1, c | d)])


def eval_expr(expr, f):
    """Exact value of ``expr`` on the rank vector ``f``."""
    if expr.ground != f.ground:
        raise GroundSetError("expression and rank vector have different grounds")
    total = f._coerce(0)
    for t in expr.terms:
        if t.kind == H:
            v = f(t.args[0])
        elif t.kind == H_COND:
            v = f.cond(*t.args)
        elif t.kind == MI:
            v = f.mutual(t.args[0], t.args[1])
        elif t.kind == MI_COND:
            v = f.mutual(*t.args)
        else:
            a, b, c, d = t.args
            v = -f.mutual(a, b) + f.mutual(a, b, c) + f.mutual(a, b, d) + f.mutual(c, d)
        total += t.coef * v
    return total


def to_functional(expr, ground=None, tag=""):
    """Lower an expression to its coefficient vector, scale unchanged."""
    ground = expr.ground if ground is None else GroundSet.of(ground)
    table = ground.embed(expr.ground)
    coeffs = {}
    for t in expr.terms:
        for sign, mask in _term_pieces(t):
            if mask:
                m = translate_mask(mask, table)
                coeffs[m] = coeffs.get(m, 0) + sign * t.coef
    return LinearFunctional(ground, coeffs, tag)


def ingleton(ground, a, b, c, d):
    """Ingleton functional -I(a,b) + I(a,b|c) + I(a,b|d) + I(c,d)."""
    ground = GroundSet.of(ground)
    term = Term(Fraction(1), INGLETON, tuple(ground.mask([x]) for x in (a, b, c, d)))
    return to_functional(InfoExpr(ground, (term,)), tag=f"Ingleton[{a},{b},{c},{d}]")


def ingleton_instances(ground):
    """The six Ingleton functionals of a 4 element ground, one per pair {a,b}."""
    ground = GroundSet.of(ground)
    if ground.n != 4:
        raise GroundSetError("Ingleton instances need a 4 element ground")
    out = []
    for a, b in combinations(ground.labels, 2):
        c, d = [x for x in ground.labels if x not in (a, b)]
        out.append(ingleton(ground, a, b, c, d))
    return out


def mutual_info(ground, a, b, c=0, tag=""):
    """Functional of f(A,B|C) for masks a, b, c."""
    coeffs = {}
    for sign, m in ((1, a | c), (1, b | c), (-1, c), (-1, a | b | c)):
        if m:
            coeffs[m] = coeffs.get(m, 0) + sign
    return LinearFunctional(ground, coeffs, tag)


# =============================================================================
# SHANNON INEQUALITIES
# =============================================================================

def monotone_basic(ground):
    """The n inequalities x(N) - x(N - i) >= 0."""
    full = ground.full
    out = []
    for i, label in enumerate(ground.labels):
        coeffs = {full: 1}
        if full ^ (1 << i):
            coeffs[full ^ (1 << i)] = -1
        out.append(LinearFunctional(ground, coeffs, f"B1[{label}]"))
    return out


def submodular_basic(ground):
    """x(aK) + x(bK) - x(K) - x(abK) >= 0, by (a, b) pair then K mask."""
    full = ground.full
    out = []
    for a, b in combinations(range(ground.n), 2):
        ab = (1 << a) | (1 << b)
        for k in submasks(full & ~ab):
            tag = f"B2[{ground.labels[a]},{ground.labels[b]}|{ground.name(k) if k else ''}]"
            out.append(mutual_info(ground, 1 << a, 1 << b, k, tag))
    return out


def shannon_basic(ground, balanced=False):
    """Basic Shannon inequalities, B1 first then B2; B2 only when ``balanced``."""
    ground = GroundSet.of(ground)
    if ground.n < 2:
        raise GroundSetError("need at least two elements")
    rows = [] if balanced else monotone_basic(ground)
    return rows + submodular_basic(ground)


def shannon_count(n):
    return n + math.comb(n, 2) * 2 ** (n - 2)


@dataclass(frozen=True)
class ShannonCheck:
    ok: bool
    witness: object = None

    def __bool__(self):
        return self.ok


def is_polymatroid(f, tol=None):
    """Check (B1) and (B2); returns a falsy result carrying a violated functional."""
    if tol is None:
        tol = PROFILE_TOLERANCE if isinstance(f, EntropyProfile) else 0
    if f.ground.n == 1:
        ok = f(1) >= -tol
        return ShannonCheck(ok, None if ok else LinearFunctional(f.ground, {1: 1}, "nonneg"))
    full = f.ground.full
    for i in range(f.ground.n):
        if f(full) - f(full ^ (1 << i)) < -tol:
            return ShannonCheck(False, monotone_basic(f.ground)[i])
    for a, b in combinations(range(f.ground.n), 2):
        ab = (1 << a) | (1 << b)
        for k in submasks(full & ~ab):
            if f(k | (1 << a)) + f(k | (1 << b)) - f(k) - f(k | ab) < -tol:
                tag = f"B2[{f.ground.labels[a]},{f.ground.labels[b]}|{f.ground.name(k) if k else ''}]"
                return ShannonCheck(False, mutual_info(f.ground, 1 << a, 1 << b, k, tag))
    return ShannonCheck(True)


# =============================================================================
# CONSTRUCTORS
# =============================================================================

def r_vector(ground, j):
    """rank(A) = 1 if A meets J else 0."""
    ground = GroundSet.of(ground)
    j = ground.mask(j)
    if j == 0:
        raise GroundSetError("r_J needs a non-empty J")
    return Polymatroid.from_function(ground, lambda m: 1 if m & j else 0)


def u_vector(ground, k=2):
    """rank(A) = min(|A|, k); k = 2 gives the u vector."""
    ground = GroundSet.of(ground)
    if ground.n < 2:
        raise GroundSetError("u vector needs at least two elements")
    return Polymatroid.from_function(ground, lambda m: min(popcount(m), k))


def free_vector(ground):
    ground = GroundSet.of(ground)
    return Polymatroid.from_function(ground, popcount)


def vamos_vector(ground, pair):
    """v(J) = 4 if J is ``pair``, else min(4, |J| + 1)."""
    ground = GroundSet.of(ground)
    if ground.n != 4:
        raise GroundSetError("Vamos vector needs a 4 element ground")
    p = ground.mask(pair)
    if popcount(p) != 2:
        raise GroundSetError("Vamos pair must have two elements")
    return Polymatroid.from_function(ground, lambda m: 4 if m == p else min(4, popcount(m) + 1))


# =============================================================================
# BALANCING AND PERMUTATIONS
# =============================================================================

def balance(e):
    """Split e into a balanced part and multiples of the monotone inequalities."""
    ground = e.ground
    mu = {}
    residual = e
    b1 = monotone_basic(ground)
    for i, label in enumerate(ground.labels):
        mu[label] = e.dot_r(i)
        if mu[label] < 0:
            logger.warning("balancing multiplier for %s is negative (%s); "
                           "input is not a valid entropy inequality", label, mu[label])
        if mu[label]:
            residual = residual - b1[i] * mu[label]
    return residual.retag(e.tag), mu


def _as_permutation(sigma, ground):
    if isinstance(sigma, PartialPermutation):
        perm = sigma
    elif isinstance(sigma, dict):
        perm = PartialPermutation.from_dict({
            ground.index(k) if isinstance(k, str) else k:
                ground.index(v) if isinstance(v, str) else v
            for k, v in sigma.items()})
    else:
        perm = PartialPermutation.from_dict(dict(enumerate(sigma)))
    if not perm.is_total(ground.n):
        raise GroundSetError("permutation must be total on the ground set")
    return perm


def apply_permutation(obj, sigma):
    """Move coordinates: result(sigma(B)) = input(B)."""
    ground = obj.ground
    perm = _as_permutation(sigma, ground)
    if isinstance(obj, LinearFunctional):
        return LinearFunctional(ground, {perm.image(m): c for m, c in obj.coeffs.items()}, obj.tag)
    values = [None] * ground.full
    for m in ground.subsets():
        values[perm.image(m) - 1] = obj(m)
    return obj.like(ground, values)


# =============================================================================
# TEXT FORMATS
# =============================================================================

def _rank_lines(text, filename):
    """Yield (line number, stripped line) without comments or blanks."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _parse_table(text, filename):
    ground, entries = None, {}
    for lineno, line in _rank_lines(text, filename):
        if line.startswith("base:"):
            try:
                ground = GroundSet.of(line[5:].split())
            except GroundSetError as exc:
                raise FormatError(str(exc), filename, lineno) from None
            continue
        if ground is None:
            raise FormatError("missing 'base:' header", filename, lineno)
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"expected '<subset> <value>', got {line!r}", filename, lineno)
        try:
            mask = ground.mask(parts[0])
            value = to_fraction(float(parts[1])) if ("." in parts[1] or "e" in parts[1]) \
                else Fraction(parts[1])
        except (GroundSetError, ValueError, ZeroDivisionError) as exc:
            raise FormatError(str(exc), filename, lineno) from None
        if mask == 0:
            raise FormatError("the empty set has no coordinate", filename, lineno)
        if mask in entries:
            raise FormatError(f"subset {parts[0]} given twice", filename, lineno)
        entries[mask] = value
    if ground is None:
        raise FormatError("missing 'base:' header", filename)
    return ground, entries


def parse_polymatroid(text, filename=None):
    ground, entries = _parse_table(text, filename)
    missing = [ground.name(m) for m in ground.subsets() if m not in entries]
    if missing:
        raise FormatError(f"missing subsets: {' '.join(missing[:8])}", filename)
    return Polymatroid(ground, tuple(entries[m] for m in ground.subsets()))


def parse_functional(text, filename=None, tag=""):
    ground, entries = _parse_table(text, filename)
    return LinearFunctional(ground, entries, tag or (filename or ""))


def read_polymatroid(path):
    with open(path, "r") as fh:
        return parse_polymatroid(fh.read(), str(path))


def read_functional(path):
    with open(path, "r") as fh:
        return parse_functional(fh.read(), str(path))

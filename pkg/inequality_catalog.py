"""
Named entropy inequalities.

Every entry is stored as expression text over its own ground set and lowered
to a LinearFunctional on lookup. Parametric names: ``fivek(k)``,
``fivek(k)-top``, ``fivek(k)-bottom`` and ``ingleton(a,b,c,d)``.
"""

import re
from dataclasses import dataclass
from fractions import Fraction

from errors import GroundSetError
from polymatroid import GroundSet, ingleton, parse_expr, to_functional

# =============================================================================
# REGISTRY
# =============================================================================

_ENTRIES = {
    "zy": ("abcd", "[a,b,c,d] + (a,b|c) + (a,c|b) + (b,c|a)",
           "Zhang-Yeung inequality; a c-copy over ab proves it"),
    "zy-strong-0.8": ("abcd", "[a,b,c,d] + 0.8(a,b|c) + (a,c|b) + (b,c|a)",
                      "strengthened Zhang-Yeung from the three-step symmetric full copy"),
    "mmrv": ("abcdz", "[a,b,c,d] + (a,b|z) + (a,z|b) + (b,z|a) + 3(cd,z|ab)",
             "Shannon inequality, a sum of 11 elemental basic ones"),
    "mmrv-variant": ("abcdz", "[a,c,b,d] + (a,b|z) + (a,z|b) + (b,z|a) + 3(cd,z|ab)",
                     "Shannon inequality, bottom bracket form of mmrv"),
    "mmrv-pair-1": ("abcdz", "[a,b,c,d] + (a,b|z) + (a,z|b) + (b,z|a)",
                    "follows from mmrv once (cd,z|ab) = 0"),
    "mmrv-pair-2": ("abcdz", "[a,c,b,d] + (a,b|z) + (a,z|b) + (b,z|a)",
                    "follows from mmrv-variant once (cd,z|ab) = 0"),
    "i-iv-3-xx": ("abcxy", "(a,x|c) + (a,b|x) + (a,b|y) + (c,y) + (b,x|ac) + (c,x|ab) - (a,b)",
                  "maximum entropy consequence of <x,y|abc>"),
    "i-iv-3-xy": ("abcxy", "(a,x|c) + (a,b|x) + (a,b|y) + (c,y) + (b,x|ac) + (c,y|ab) - (a,b)",
                  "maximum entropy consequence of <x,y|abc>"),
    "i-iv-3-yx": ("abcxy", "(a,x|c) + (a,b|x) + (a,b|y) + (c,y) + (b,y|ac) + (c,x|ab) - (a,b)",
                  "maximum entropy consequence of <x,y|abc>"),
    "i-iv-3-yy": ("abcxy", "(a,x|c) + (a,b|x) + (a,b|y) + (c,y) + (b,y|ac) + (c,y|ab) - (a,b)",
                  "maximum entropy consequence of <x,y|abc>"),
}

_ALIASES = {
    "mmineq": "mmrv-pair-1",
}

_FIVEK_RE = re.compile(r"fivek\((\d+)\)(?:-(top|bottom))?")
_INGLETON_RE = re.compile(r"ingleton(?:\(([^)]*)\))?")


@dataclass(frozen=True)
class NamedInequality:
    name: str
    ground: GroundSet
    text: str
    note: str
    functional: object

    @property
    def size(self):
        return self.ground.n


def _entry(name, labels, text, note):
    ground = GroundSet.of(labels)
    e = to_functional(parse_expr(text, ground), tag=name)
    return NamedInequality(name, ground, text, note, e)


def fivek(k, bracket="top"):
    """k[.] + k(k-1)/2 ((a,c|b) + (b,c|a)) + (a,b|z) + k ((a,z|b) + (b,z|a))."""
    if k < 0:
        raise GroundSetError("fivek needs k >= 0")
    if bracket not in ("top", "bottom"):
        raise GroundSetError("bracket is 'top' or 'bottom'")
    ground = GroundSet.of("abcdz")
    ing = "[a,b,c,d]" if bracket == "top" else "[a,c,b,d]"
    parts = [(k, ing), (Fraction(k * (k - 1), 2), "(a,c|b) + (b,c|a)"),
             (1, "(a,b|z)"), (k, "(a,z|b) + (b,z|a)")]
    name = f"fivek({k})-{bracket}"
    terms = [t if coef == 1 else f"{coef}{t}" for coef, text in parts if coef for t in text.split(" + ")]
    text = " + ".join(terms)
    e = to_functional(parse_expr(text, ground))
    return NamedInequality(name, ground, text, "five-variable family from <cd,z|ab>", e.retag(name))


def get(name):
    """Look up a catalog entry by name, alias or parametric form."""
    key = name.strip()
    key = _ALIASES.get(key, key)
    if key in _ENTRIES:
        return _entry(key, *_ENTRIES[key])
    m = _FIVEK_RE.fullmatch(key)
    if m:
        return fivek(int(m.group(1)), m.group(2) or "top")
    m = _INGLETON_RE.fullmatch(key)
    if m:
        labels = [x.strip() for x in (m.group(1) or "a,b,c,d").split(",")]
        if len(labels) != 4:
            raise GroundSetError("ingleton needs four labels")
        e = ingleton(labels, *labels)
        return NamedInequality(key, e.ground, "[{}]".format(",".join(labels)),
                               "Ingleton expression; valid for linear polymatroids only", e)
    raise GroundSetError(f"unknown inequality {name!r}; try one of: {', '.join(names())}")


def names():
    """Every fixed entry plus the first parametric instances."""
    out = sorted(_ENTRIES) + sorted(_ALIASES)
    out += [f"fivek({k})-{b}" for k in range(4) for b in ("top", "bottom")]
    out.append("ingleton(a,b,c,d)")
    return out

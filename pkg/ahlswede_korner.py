"""
Ahlswede-Korner style partial maps and their derivation gadget.

For a partition N = X + Y + z the map keeps f off z and lowers the
subsets z in A inside Yz by f(z|Y); elsewhere it is undefined. The gadget
encodes the proof: a z-copy over Y, then the transformed function glued
onto the copy system as auxiliary variables.
"""

import logging
from dataclasses import dataclass, field

from copy_lemma import CopySequence, CopyStep, build_copy_system, fresh_label
from defaults import PROFILE_TOLERANCE
from errors import GroundSetError
from exact_lp import GEQ
from polymatroid import GroundSet, bits, shannon_basic

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PartialRankMap:
    """Values on some subsets of the ground; absent subsets are undefined."""

    ground: GroundSet
    values: dict = field(default_factory=dict)

    def __call__(self, mask):
        if mask == 0:
            return 0
        return self.values[mask]

    def __contains__(self, mask):
        return mask == 0 or mask in self.values

    @property
    def domain(self):
        return sorted(self.values)

    def matches(self, f, tol=PROFILE_TOLERANCE):
        """Masks on the domain where ``f`` differs by more than ``tol``."""
        return [m for m in self.domain if abs(float(f(m)) - float(self.values[m])) > tol]

    def to_text(self):
        lines = [f"base: {self.ground}"]
        for m in self.ground.subsets():
            value = self.values.get(m)
            lines.append(f"{self.ground.name(m)} {'-' if value is None else value}")
        return "\n".join(lines) + "\n"


def _partition(f, parts):
    masks = [f.ground.mask(p) for p in parts]
    union = 0
    for m in masks:
        if union & m:
            raise GroundSetError("parts must be disjoint")
        union |= m
    if union != f.ground.full:
        raise GroundSetError("parts must cover the ground set")
    return masks


def ak2_apply(f, x, y, z):
    """f(A) if z is not in A, f(A) - f(z|Y) if z in A inside Yz."""
    x, y, zm = _partition(f, (x, y, z))
    if bin(zm).count("1") != 1:
        raise GroundSetError("z must be a single element")
    shift = f(y | zm) - f(y)
    values = {}
    for m in f.ground.subsets():
        if not m & zm:
            values[m] = f(m)
        elif m & (y | zm) == m:
            values[m] = f(m) - shift
    return PartialRankMap(f.ground, values)


def akz_apply(f, x, y, z):
    """f(A) off Z, min(f(A), f(AZ) - f(Z|Y)) for A inside YZ meeting Z."""
    x, y, zm = _partition(f, (x, y, z))
    if not zm:
        raise GroundSetError("Z must be non-empty")
    shift = f(y | zm) - f(y)
    values = {}
    for m in f.ground.subsets():
        if not m & zm:
            values[m] = f(m)
        elif m & (y | zm) == m:
            values[m] = min(f(m), f(m | zm) - shift)
    return PartialRankMap(f.ground, values)


def compare_ak_maps(f, x, y, z):
    """Masks where the singleton-Z forms of the two maps disagree."""
    a = ak2_apply(f, x, y, z)
    b = akz_apply(f, x, y, z)
    out = [m for m in a.domain if m not in b or a(m) != b(m)]
    if out:
        logger.info("AK maps disagree on %d subsets", len(out))
    return out


# =============================================================================
# DERIVATION GADGET
# =============================================================================

@dataclass
class AkGadget:
    system: object
    copy: object
    star: dict   # mask -> coefficients over the system variables


def ak2_gadget(ground, x, y, z, inequalities=(), balanced=False):
    """Copy system of z over Y plus the transformed function, with ``inequalities`` imposed on it."""
    ground = GroundSet.of(ground)
    x, y, zm = ground.mask(x), ground.mask(y), ground.mask(z)
    if x & y or (x | y) & zm or (x | y | zm) != ground.full or bin(zm).count("1") != 1:
        raise GroundSetError("X, Y, z must partition the ground set")
    zlabel = ground.labels[bits(zm)[0]]
    zcopy = fresh_label(zlabel, ground.labels, prime=True)
    step = CopyStep((zlabel,), tuple(ground.labels[i] for i in bits(y)), ((zlabel, zcopy),))
    built = build_copy_system(CopySequence(ground, (step,)), balanced=balanced)
    sys_ = built.system
    final = built.final_ground
    zc = final.bit(zcopy)

    def shifted(m):
        out = dict(built.term(m))
        for v, c in built.term(y | zm).items():
            out[v] = out.get(v, 0) - c
        if y:
            for v, c in built.term(y).items():
                out[v] = out.get(v, 0) + c
        return out

    star = {}
    for m in ground.subsets():
        if not m & zm:
            star[m] = dict(built.term(m))
        elif m & (y | zm) == m:
            star[m] = shifted(m)
        else:
            v = sys_.declare(ground.name(m) + "*")
            star[m] = {v: 1}
            # the transformed value never exceeds either branch of the GAK minimum
            b = (m & ~zm) | zc
            upper = dict(built.term(b))
            upper[v] = upper.get(v, 0) - 1
            sys_.add_row(upper, GEQ, f"AK2[{ground.name(m)}<=copy]")
            shift = shifted(b)
            shift[v] = shift.get(v, 0) - 1
            sys_.add_row(shift, GEQ, f"AK2[{ground.name(m)}<=shift]")

    def lower(coeffs):
        out = {}
        for m, c in coeffs.items():
            for v, x_ in star[m].items():
                out[v] = out.get(v, 0) + c * x_
        return out

    for e in shannon_basic(ground, balanced=balanced):
        sys_.add_row(lower(e.coeffs), GEQ, f"AK2 {e.tag}")
    for e in inequalities:
        if e.ground != ground:
            raise GroundSetError("imposed inequality lives on a different ground")
        sys_.add_row(lower(e.coeffs), GEQ, f"AK2 {e.tag or 'extra'}")
    logger.info("AK2 gadget on %s: %s", ground, sys_.summary())
    return AkGadget(sys_, built, star)

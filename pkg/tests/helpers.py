"""Shared fixtures: seeded random polymatroids and small named vectors."""

import random

from polymatroid import GroundSet, Polymatroid, r_vector, u_vector


def random_polymatroid(ground, rng, terms=4, max_weight=3):
    """Non-negative integer combination of r_J and u-type vectors."""
    ground = GroundSet.of(ground)
    f = Polymatroid.zero(ground)
    for _ in range(terms):
        j = rng.randrange(1, ground.full + 1)
        f = f + r_vector(ground, j).scaled(rng.randint(0, max_weight))
    if ground.n >= 2 and rng.random() < 0.5:
        f = f + u_vector(ground, rng.randint(1, ground.n)).scaled(rng.randint(1, max_weight))
    return f


def rng_for(test):
    """A generator seeded by the test id, so failures reproduce."""
    return random.Random(test.id())

"""Seeded generator of small random catalytic systems for self-checks."""

from __future__ import annotations

import random
from fractions import Fraction

from .algebra import UniPolynomial
from .model import CatalyticSystem, canonicalize_and_validate

COEFFICIENTS = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2))


def _poly(rng: random.Random, max_degree: int) -> UniPolynomial:
    while True:
        deg = rng.randint(0, max_degree)
        coeffs = [rng.choice(COEFFICIENTS) for _ in range(deg + 1)]
        p = UniPolynomial(tuple(coeffs))
        if not p.is_zero():
            return p


def random_system(
    seed: int,
    max_d: int = 2,
    max_L: int = 2,
    max_J: int = 3,
    max_degree: int = 2,
    density: float | None = None,
    random_p: bool = False,
) -> CatalyticSystem:
    """A canonical random system; the same seed always gives the same system."""
    rng = random.Random(seed)
    d = rng.randint(1, max_d)
    L = rng.randint(1, max_L)
    J = rng.randint(1, max_J)
    if density is None:
        density = 0.45 if d == 1 else 0.25
    Q = {}
    for s in range(1, d + 1):
        for t in range(1, d + 1):
            for l in range(L + 1):
                for j in range(J + 1):
                    if rng.random() < density:
                        Q[(s, t, l, j)] = _poly(rng, 1 if max_degree > 1 and rng.random() < 0.7 else max_degree)
    if not Q:
        Q[(1, 1, L, 0)] = UniPolynomial((1,))
        Q[(1, 1, 0, J)] = UniPolynomial((1,))
    P = {}
    for s in range(1, d + 1):
        if random_p:
            for m in range(rng.randint(0, 1) + 1):
                p = _poly(rng, 1)
                if rng.random() < 0.8:
                    P[(s, m)] = p
        else:
            P[(s, 0)] = UniPolynomial((1,))
    sys = CatalyticSystem(d, L, J, dict(sorted(Q.items())), dict(sorted(P.items())))
    return canonicalize_and_validate(sys)[0]

#!/usr/bin/env python3
"""Finite symmetry bookkeeping: orbits, isotropy, and maps up to refinement.

A finite group acting on sampled charts enumerates into an explicit morphism
table on which every category axiom is checked exactly. Isotropy groups,
their effective parts, and the local representation capturing all nearby
morphisms come out of the table; generalized maps compose through a finite
fibered product.
"""

import numpy as np

from scfold.groupoids import (
    Diagram,
    EpGroupoid,
    FiniteGroup,
    Functor,
    compose_generalized,
    isotropy,
    natural_representation,
    orbit_space,
)

# the reflection groupoid on a sampled line
z2 = FiniteGroup.cyclic(2)


def reflect(g, cid, c):
    return cid, (-1.0) ** g * np.asarray(c, dtype=float)


x = EpGroupoid.from_translation_action(
    z2, [("line", np.array([p])) for p in (-1.0, -0.5, 0.0, 0.5, 1.0)], reflect)

orbits = orbit_space(x)
print("objects:", len(x.objects), "| morphisms:", len(x.morphisms),
      "| orbits:", orbits.orbit_count())

zero = x.find_object("line", np.array([0.0]))
one = x.find_object("line", np.array([1.0]))
print("isotropy at 0:", isotropy(x, zero).order,
      "| at 1:", isotropy(x, one).order)
print("effective part at 0:", isotropy(x, zero).effective_order)

# the trivial action: the whole group acts invisibly, effective part collapses
def still(g, cid, c):
    return cid, np.asarray(c, dtype=float)


xt = EpGroupoid.from_translation_action(
    z2, [("line", np.array([0.0])), ("line", np.array([1.0]))], still)
iso_t = isotropy(xt, 0)
print("trivial action: isotropy", iso_t.order,
      "effective", iso_t.effective_order)

# the local representation: every nearby morphism comes from the stabilizer,
# exactly once
rep = natural_representation(x, zero)
print("natural representation at the fixed point passes:", rep.passed)

# generalized maps compose through the finite fibered product
d = Diagram.from_functor(Functor.identity(x))
composite = compose_generalized(d, d)
print("composite apex size:", len(composite.apex.objects),
      "| orbit map preserved:", composite.orbit_map() == d.orbit_map())

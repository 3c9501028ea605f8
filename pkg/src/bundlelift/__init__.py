"""bundlelift: lifting diffeomorphisms to vector-bundle automorphisms.

Concrete bundle models (tautological bundles over Grassmannians and
projective spaces, torus line bundles, sphere tangent bundles), lift
constructors, a universal lift checker, and numerical obstructions
(lattice Chern numbers, holonomy signs, integer lattice criteria).
"""

__version__ = "0.1.0"

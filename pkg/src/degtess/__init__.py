"""Tessellations and semiconjugacies for degenerating quadratic dynamics.

The package computes, renders and verifies the structures attached to a
hyperbolic-to-parabolic degeneration pair (f -> g) of quadratic maps:
tessellations of the filled Julia set interiors, the pinching semiconjugacy
h, natural-extension lifts, quotient fundamental regions with their gluing
tables, and a small-Jacobian Henon shadowing module.
"""

from .angles import (RationalAngle, angle, cycle_angles, orbit_meta,
                     ptilde, in_theta, characteristic_angles)
from .dynamics import (QuadMap, Cycle, DegenerationPair, attracting_cycle,
                       solve_multiplier, make_pair, parse_pair_spec,
                       beta_fixed_point, classify_case,
                       cauliflower, rabbit_a, rabbit_b, airplane)

__all__ = [
    "RationalAngle", "angle", "cycle_angles", "orbit_meta", "ptilde",
    "in_theta", "characteristic_angles",
    "QuadMap", "Cycle", "DegenerationPair", "attracting_cycle",
    "solve_multiplier", "make_pair", "parse_pair_spec", "beta_fixed_point",
    "classify_case", "cauliflower", "rabbit_a", "rabbit_b", "airplane",
]

__version__ = "0.1.0"

"""
Tracing a ray with a length budget
==================================

A ray leaves the BS at a given departure angle and stops once it has
travelled a fixed distance, bouncing off walls and splitting at the
semi-transparent buses.
"""

import numpy as np

from mapcsi import trace_path
from mapcsi.harness import default_map

env = default_map("mixed")

# at 45 degrees the ray meets the first bus at (5, 5) and splits in two
for term in trace_path(env, np.pi / 4, 12.0):
    kind = "through" if term.attenuation_branch else "reflected"
    print(f"{kind:9s} -> ({term.point.x:.2f}, {term.point.y:.2f}) after {term.bounces} bounce(s)")

# a shallow ray along the street bounces between the walls
term = trace_path(env, np.radians(20), 80.0)[-1]
print("vertices:", [(round(v.x, 2), round(v.y, 2)) for v in term.vertices])

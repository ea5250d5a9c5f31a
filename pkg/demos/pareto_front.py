# coding: utf-8

# # Trading one dimension against the other
#
# With the satisfaction constraints held fixed, which expectation vectors are
# achievable on the running example?

# In[1]:

from fractions import Fraction

import numpy as np

from meanpayoff import fixtures, pareto_approx
from meanpayoff.pareto import maximize_threshold

m, q = fixtures.running_example(), fixtures.running_query()
front = pareto_approx(m, q, Fraction(1, 10))
pts = np.array([[float(x) for x in p.value] for p in front.points])
print(front.directions, "weight directions")
print(pts)


# Single coordinates can be pushed to their exact maximum.

# In[2]:

for coord in ("exp[1]", "exp[2]"):
    best, _ = maximize_threshold(m, q, coord)
    print(coord, best)


# The satisfaction thresholds have their own front.

# In[3]:

sat_front = pareto_approx(m, q, Fraction(1, 5), free="sat")
for p in sat_front.points:
    print([str(x) for x in p.value])

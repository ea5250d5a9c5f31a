# coding: utf-8

# # The running example, end to end
#
# A five-state MDP with two reward dimensions. From `s` the action `l` flips a
# coin between `s` and `u`, while `r` jumps to `v`. State `u` is a dead end
# paying (4, 0). States `v` and `w` form a loop whose actions pay different
# mixes of the two dimensions.

# In[1]:

from fractions import Fraction

import numpy as np

from meanpayoff import build, fixtures, mec_decomposition, solve, synthesize, verify
from meanpayoff.lp import dump_lp, variable_counts

m = fixtures.running_example()
q = fixtures.running_query()
print(q)


# End components first. `u` on its own and the pair `{v, w}` are the only
# places a run can stay forever.

# In[2]:

dec = mec_decomposition(m)
for c in dec.mecs:
    print(c.states, c.actions)
print("outside every end component:", dec.non_mec_actions)


# The linear program has one transient variable per action, one switch
# variable per (state, mode) and one recurrent variable per (MEC action, mode).

# In[3]:

lp = build(m, q)
print(variable_counts(lp), len(lp.constraints), "constraints")
print("\n".join(dump_lp(lp).splitlines()[:6]))


# In[4]:

out = solve(lp)
print(out.status, out.stats.pivots, "pivots")
nonzero = {k: v for k, v in out.assignment.items() if v}
for k in sorted(nonzero):
    print(f"{k:>10} = {nonzero[k]}")


# Pruning drops modes that can never carry flow. The verdict does not change.

# In[5]:

small = build(m, q, prune=True)
print(variable_counts(small), solve(small).feasible)


# A strategy with epsilon = 1/100. Memory is one transient element plus one
# element per mode that actually receives flow.

# In[6]:

sigma = synthesize(m, q, out.assignment, Fraction(1, 100))
print(sigma.memory)
print("switch at v:", sigma.switch["v"])


# Exact evaluation builds the product chain and solves it over the rationals.

# In[7]:

v = verify(m, sigma, q)
print(v.passed, [str(x) for x in v.evaluation.expectation])
print("as floats:", np.array([float(x) for x in v.evaluation.sat_probability]))

# coding: utf-8

# # From CNF formulas to joint-satisfaction queries
#
# Each propositional variable becomes a state with two actions, one per
# literal. Rewards count how often a clause or a literal is hit. A strategy
# meets the joint threshold exactly when the formula has a satisfying
# assignment.

# In[1]:

import itertools

from meanpayoff import build, solve
from meanpayoff.reduction import Cnf, parse_dimacs, sat_to_instance

f = parse_dimacs("""c two clauses over two variables
p cnf 2 2
1 2 0
-1 2 0
""")
m, q = sat_to_instance(f)
print(len(m.states), "states,", len(m.actions), "actions,", m.dimension, "dimensions")
for a in m.actions:
    print(a.name, [int(x) for x in a.reward])


# In[2]:

print("realizable:", solve(build(m, q, prune=True)).feasible)
print("contradiction:", solve(build(*sat_to_instance(Cnf.of(1, [(1,), (-1,)])), prune=True)).feasible)


# Compare against truth tables for every three-clause formula over two
# variables.

# In[3]:

def brute(p, clauses):
    return any(all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses)
               for bits in itertools.product((False, True), repeat=p))

pool = [c for k in (1, 2) for c in itertools.combinations([1, -1, 2, -2], k)
        if not any(-l in c for l in c)]
agree = 0
formulas = list(itertools.combinations(pool, 3))
for clauses in formulas:
    mm, qq = sat_to_instance(Cnf.of(2, clauses))
    agree += solve(build(mm, qq, prune=True)).feasible == brute(2, clauses)
print(agree, "of", len(formulas), "agree")

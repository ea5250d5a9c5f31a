# coding: utf-8

# # Sampling runs of a synthesized strategy
#
# The exact analysis says what the long-run averages converge to. Simulation
# checks the same numbers from the other side.

# In[1]:

from fractions import Fraction

import numpy as np

from meanpayoff import build, evaluate, fixtures, simulate, solve, synthesize

m, q = fixtures.randomization_example(), fixtures.randomization_query()
sigma = synthesize(m, q, solve(build(m, q)).assignment, Fraction(1, 100))
exact = evaluate(m, sigma, q)
print("exact expectation", exact.expectation[0], "=", float(exact.expectation[0]))
print("exact satisfaction", exact.sat_probability[0])


# Here the only coin is tossed at the first step, so the horizon hardly
# matters. On the running example the strategy keeps randomizing inside the
# `{v, w}` loop and short runs are noisy. Only the second half of each run
# enters the averages. The loop leaves `v` rarely (the perturbation is
# small) so the satisfaction rates need long runs to settle.

# In[2]:

rm, rq = fixtures.running_example(), fixtures.running_query()
rsigma = synthesize(rm, rq, fixtures.running_fixture_assignment(), Fraction(1, 10))
print("exact", [float(x) for x in evaluate(rm, rsigma, rq).expectation])
for horizon in (10, 100, 1000, 10000):
    rep = simulate(rm, rsigma, runs=500, horizon=horizon, seed=7, query=rq)
    print(horizon, np.round(rep.empirical_expectation, 3), np.round(rep.empirical_sat_rate, 3))


# Same seed, same numbers. Run k always uses its own stream.

# In[3]:

a = simulate(m, sigma, 50, 200, seed=1, query=q)
b = simulate(m, sigma, 50, 200, seed=1, query=q)
print(a.to_dict() == b.to_dict())
print(a.empirical_action_frequency)

"""Compare the stochastic cost model with simulation at the Nyquist rate.

Run: python3 demos/cost_model.py
"""
from agslm.analytics import expected_ag_cost, pmf_au
from agslm.harness import fig7_compare

d = pmf_au(2, 64)
print(f"A_2 at N=64: mean {d.mean:.1f} samples, mass dropped below PAPR 1: {d.truncated_mass:.1e}")
print("model expected cost for U=16:", round(expected_ag_cost(16, 64), 3), "T")

# The model treats candidates as independent; real candidates share the same
# data, so simulation sits a little above the model as U grows.
res = fig7_compare(64, range(2, 17, 2), trials=5000)
print("\n  U   model  simulated")
for row in res.rows():
    print(f"{row['U']:>3}  {row['analytic']:.3f}  {row['simulated']:.3f}")

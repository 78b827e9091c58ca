"""Run every SLM scheme on one block, with and without adaptive generation.

Run: python3 demos/slm_schemes.py
"""
from agslm import SlmConfig, random_symbols, run_slm
from agslm.ofdm import trial_streams

sym_seed, phase_seed = trial_streams(master_seed=1, trial=0)
X = random_symbols(256, sym_seed)

setups = [
    SlmConfig(256, 4, 16, "conventional", seed=7),
    SlmConfig(256, 4, 16, "lim", r=5, seed=7),
    SlmConfig(256, 4, 8, "wang", seed=7),
    SlmConfig(256, 4, 16, "baxley", gamma0_db=8.0, seed=7),
]

print(f"{'scheme':<14}{'picked':>7}{'PAPR dB':>9}{'cost':>12}{'AG cost':>12}  unit")
for cfg in setups:
    base = run_slm(X, cfg)
    ag = run_slm(X, cfg.replace(ag=True))
    # the early abort never changes which candidate wins
    assert ag.selected_u == base.selected_u
    assert (ag.selected_signal.samples == base.selected_signal.samples).all()
    print(
        f"{cfg.scheme.value:<14}{ag.selected_u:>7}{ag.papr_db:>9.2f}"
        f"{base.cost.mean:>12.4g}{ag.cost.mean:>12.4g}  {ag.cost.unit}"
    )

# How far each candidate got before it was abandoned:
ag = run_slm(X, setups[0].replace(ag=True))
print("\nsamples produced per candidate (conventional):", ag.produced.tolist())

# %% [markdown]
# # Histories and counterfactuality
#
# Each insertion gets a hypothetical reading: `f` (the computer did not
# run) or `n` (it ran).  A success is counterfactual when only the all-`f`
# history carries it and the other output cannot produce it.

# %%
from counterfactual import ProtocolParams, TallyMode, counterfactuality_report, run_with_tally
from counterfactual.histories import enumerate_histories, is_counterfactual_outcome
from counterfactual.zeno import Final, format_events, success_record

p = ProtocolParams(2, 2, x=0)
record = success_record(p) + (Final(0),)
for h in enumerate_histories(p, record):
    if h.norm2 > 1e-20:
        print(f"{format_events(h.events):40s} |v|^2={h.norm2:.3e}")
ok, witness = is_counterfactual_outcome(p, record)
print("output-0 success counterfactual:", ok)

# %% [markdown]
# Counterfactuality c_i is the weight of the all-`f` history.  For output 1
# it equals the success probability exactly.

# %%
rep = counterfactuality_report(ProtocolParams(700, 70))
print(rep.as_dict())

# %% [markdown]
# A tally register that counts every run exposes the output-0 protocol: the
# zero-tally branch is tiny.

# %%
r = run_with_tally(ProtocolParams(100, 10, x=0, tally=TallyMode.ALL_RUNS))
print("p(m0) with an all-runs tally:", r.p_success_0)

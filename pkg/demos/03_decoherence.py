# %% [markdown]
# # A decoherent computer
#
# Each run flips the output with amplitude sqrt(2 eps - eps^2) and leaves a
# record in a fresh environment mode.  Two representations are available:
# an 8x8 density operator and an ensemble of pure branches.

# %%
from counterfactual import ProtocolParams, Variant, run_noisy
from counterfactual.noise import crosscheck_representations

for n, nprime in [(700, 70), (40, 70), (40, 700)]:
    for x in (0, 1):
        r = run_noisy(ProtocolParams(n, nprime, x=x, variant=Variant.MODIFIED, epsilon=0.2))
        print(f"N={n} N'={nprime} x={x}: p(m|x)={r.p_m_given_x:.4f} "
              f"p(m0|m)={r.p_mi_given_m_x[0]:.4f} p(m1|m)={r.p_mi_given_m_x[1]:.4f}")

# %%
p = ProtocolParams(4, 3, x=1, variant=Variant.MODIFIED, epsilon=0.3)
print("largest density/ensemble gap:", crosscheck_representations(p))
print("ensemble branches:", run_noisy(p, "ensemble").branches)

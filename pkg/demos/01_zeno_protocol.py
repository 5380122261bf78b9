# %% [markdown]
# # The chained-Zeno protocol
#
# A routine of N' small rotations of q1 wraps a subroutine of N small
# rotations of q2.  The computer writes its output into q3 whenever q2 is
# on, and every q3 reading is post-selected on 0.  The final q1 reading
# reports the output.

# %%
from counterfactual import ProtocolParams, Variant, run_ideal

for n, nprime in [(2, 2), (10, 10), (40, 70), (700, 70)]:
    for x in (0, 1):
        r = run_ideal(ProtocolParams(n, nprime, x=x))
        print(f"N={n:4d} N'={nprime:3d} x={x}  p(m0)={r.p_success_0:.4f}  "
              f"p(m1)={r.p_success_1:.4f}  p(fail)={r.p_fail:.4f}")

# %% [markdown]
# For x=1 a larger N pins q2 to 0 more firmly, so c1 and p(m1) grow.  The
# modified variant undoes each insertion after a sign change on |111>.

# %%
for x in (0, 1):
    r = run_ideal(ProtocolParams(40, 70, x=x, variant=Variant.MODIFIED))
    print(f"modified x={x}: p(m0)={r.p_success_0:.4f} p(m1)={r.p_success_1:.4f}")

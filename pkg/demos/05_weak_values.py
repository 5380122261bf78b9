# %% [markdown]
# # Weak values
#
# In the nested interferometer the photon enters the inner loop, yet the
# weak values on the connecting arms vanish.  A small phase on one arm
# shifts the detector amplitude by i*w*A.

# %%
from counterfactual.interfero import build_nested_interferometer, detector_amplitude, perturb_path, weak_value

net = build_nested_interferometer(0)
print("P(D) =", abs(detector_amplitude(net)) ** 2)
for path in "ABCEF":
    r = perturb_path(net, path, 0.01)
    print(f"w_{path} = {weak_value(net, path).value.real:+.3f}  "
          f"dA/ddelta = {r.derivative:.4f}")

# %% [markdown]
# The two-qubit protocol wraps the computer between two U gates.  The weak
# value of the switch being on vanishes right before the computer.

# %%
from counterfactual.jozsa import PLACEMENTS, run_protocol, weak_value_at_computer

print(run_protocol(1))
for placement in PLACEMENTS:
    on = weak_value_at_computer("switch-on", placement).value
    out = weak_value_at_computer("output-on", placement).value
    print(f"{placement:16s} switch={on.real:+.3f} output={out.real:+.3f}")

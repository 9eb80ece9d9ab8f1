"""
=====================================
2 - Ranking actions by expected gain
=====================================
"""

# %%
# Before acting, each candidate action is scored by how much it is expected
# to lower the entropy of the nodes we care about. Categorical actions are
# scored through their confusion matrix, continuous ones by blurring the
# current belief with the sensor noise.

from objexplore import init_network, load_reference_data
from objexplore.infogain import expected_information_gain, sample_entropy_vector

data = load_reference_data()
state = init_network(data.tables, data.edges)

for mode in (["Category"], ["Material"], ["Elasticity", "Density", "Volume"]):
    print("target", "+".join(mode))
    for action in data.actions:
        ev = expected_information_gain(state, action, mode)
        print(f"  {action.name:<12} {ev.expected_ig:+.4f} bits")

# %%
# The vision classifier for categories is right 63% of the time. Every row of
# its confusion matrix has the same entropy, about 2.106 bits, so on a
# uniform prior the expected gain is log2(10) - 2.106.

cat_vision = data.action("cat-vision")
print(sample_entropy_vector(cat_vision.confusion)[:3])

# %%
# A continuous action can never sharpen its own node in emulation: blurring
# with noise only spreads the belief. Its expected gain on that node alone is
# zero or negative, and any benefit has to come through neighbouring nodes.

squeeze = data.action("squeezing")
print(expected_information_gain(state, squeeze, ["Elasticity"]).expected_ig)
print(expected_information_gain(state, squeeze, ["Material"]).expected_ig)

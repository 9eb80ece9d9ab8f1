"""
===========================
1 - Priors and node beliefs
===========================
"""

# %%
# The network has two categorical nodes (what the object looks like, what it
# is made of) and three continuous ones. Each continuous node starts as a
# Gaussian mixture over its parent's labels, weighted by the parent's PMF.
# With nothing observed both PMFs are uniform.

import numpy as np

from objexplore import init_network, load_reference_data
from objexplore.network import network_entropy, summarize
from objexplore.experiment import format_summary

data = load_reference_data()
state = init_network(data.tables, data.edges)
print(format_summary(summarize(state)))

# %%
# Entropies are in bits. Category has 10 labels and Material 8, so the
# fresh values are log2(10) and 3.

print(network_entropy(state, ["Category"]), np.log2(10))
print(network_entropy(state, ["Material"]))

# %%
# Telling the network the object is metal sharpens the Material PMF. The
# message travels to Density, whose mixture collapses onto the metal
# component near 7900 kg/m3, and on to Category through the edge matrix.

from objexplore.network import apply_categorical_measurement

metal = np.zeros(8)
metal[data.tables.material_labels.index("metal")] = 1.0
after = apply_categorical_measurement(state, "Material", metal, np.eye(8))
print("density mode", after.density.mode(), "kg/m3")
print("category top", after.category.top(3))

# %%
# Continuous measurements multiply a likelihood into the gridded belief. The
# posterior is then reduced to mixture weights by EM and sent to Material. A
# soft squeeze reading of 20 kPa is best explained by the foam component, so
# almost all Material mass lands there.

from objexplore.beliefs import gaussian_likelihood
from objexplore.network import apply_continuous_measurement

grid = state.model.grids["Elasticity"]
squeezed = apply_continuous_measurement(state, "Elasticity", gaussian_likelihood(grid, 20.0, 10.0))
print(squeezed.material.top(3))

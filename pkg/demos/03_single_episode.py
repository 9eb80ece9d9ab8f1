"""
===================================
3 - One episode with a trick object
===================================
"""

# %%
# The plastic banana looks like fruit but is made of hard plastic. We run the
# greedy selector on it, optimizing Material, and print what happens after
# each step.

from objexplore import init_network, load_reference_data
from objexplore.planner import EpisodeConfig, run_episode

data = load_reference_data()
state = init_network(data.tables, data.edges)
banana = data.object("plastic-banana")

trace = run_episode(banana, EpisodeConfig("Material", seed=3), state, data.actions, keep_states=True)

for step, after in zip(trace.steps, trace.states[1:]):
    gains = ", ".join(f"{e.action} {e.expected_ig:+.3f}" for e in step.evaluations)
    print(f"step {step.step}: [{gains}]")
    o = step.outcome
    reading = o.label if o.label is not None else f"{o.value:.1f} {o.units}" + (" (censored)" if o.censored else "")
    print(f"  -> {step.chosen}: {reading}; IG {step.experimental_ig:+.3f} bits;"
          f" material top {after.material.top(2)}")

# %%
# The cross-entropy to the true labels shows whether the network is heading
# the right way, even when measured gain is negative for a step.

print([round(s.cross_entropies["Material"], 3) for s in trace.steps])

# %%
# With termination on, the selector stops as soon as no remaining action has
# positive expected gain.

stopped = run_episode(banana, EpisodeConfig("Elasticity", terminate_on_nonpositive_ig=True, seed=3),
                      state, data.actions)
print(stopped.actions, "terminated" if stopped.terminated else "ran out of actions")

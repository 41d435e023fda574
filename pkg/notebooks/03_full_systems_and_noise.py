# %% [markdown]
# # Within-block quartets, noise, and the exhaustive check
#
# A full system also lists quartets inside each block.  Random flips usually
# make a system incompatible; the exhaustive search over all trees agrees
# with the solver on small inputs.

# %%
from collections import Counter

from mpquartet.generate import generate
from mpquartet.oracle import compatible_oracle
from mpquartet.pipeline import solve

inst = generate(11, 8, 2, "full")
rep = solve(inst.system)
print(inst.tree, "->", rep.newick, rep.phases)

# %%
tally = Counter()
for seed in range(200):
    inst = generate(seed, 7, 2, "full", noise=seed % 4)
    rep = solve(inst.system)
    truth = compatible_oracle(inst.system) is not None
    tally[(rep.compatible, truth)] += 1
    if not rep.compatible:
        tally[rep.phase] += 1
for k, v in sorted(tally.items(), key=str):
    print(k, v)

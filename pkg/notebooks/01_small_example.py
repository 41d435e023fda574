# %% [markdown]
# # Solving a small four-block system
#
# Nine taxa in four blocks, twelve listed quartets.  Quartets within one
# block pair are all we get; the solver decides whether a single tree shows
# every one of them and builds it.

# %%
from mpquartet import TaxonPartition, QuartetSystem, solve_complete
from mpquartet.io import parse_quartets

P = TaxonPartition.from_blocks([list("abc"), list("de"), list("fg"), list("hi")])
text = """
a b | d e
a d || c e
b d || c e
a g || b f
a g || c f
b g || c f
a b | h i
a c | h i
b c | h i
d g || e f
d i || e h
f i || g h
"""
Q = parse_quartets(text, P)

# %%
rep = solve_complete(Q)
print(rep.phases)
print("display family:", [c.format(P) for c in rep.display_family])
print("laminar sets:  ", [P.names_of(x) for x in rep.laminar])
print("tree:", rep.newick)

# %% [markdown]
# Flipping one quartet breaks it.  The report names the phase that noticed.

# %%
broken = parse_quartets(text.replace("a d || c e", "a e || c d"), P)
bad = solve_complete(broken)
print(bad.compatible, bad.phase, bad.message)

"""
Partitions and coarsening
=========================

Walks through the partition calculus on five parties: parsing, the two
kinds of coarsening move, and the Xi set of coarser partitions that keep
only part of a reference partition's subsystems.
"""
from gmekit import Coarsen, Partition, all_bipartitions, is_coarser, xi_set

labels = "ABCDE"
p = lambda text: Partition.parse(text, labels)  # noqa: E731

# %%
# Bipartitions of four parties, in the library's canonical order.
for cut in all_bipartitions(4):
    print(cut.format())

# %%
# A chain of coarsenings. Combining merges blocks; discarding drops
# subsystems (traces them out).
chain = [
    ("A|B|C|D|E", "A|B|C|DE", Coarsen.COMBINE),
    ("A|B|C|DE", "A|B|C|D", Coarsen.DISCARD),
    ("A|B|C|D", "AB|C|D", Coarsen.COMBINE),
    ("AB|C|D", "AB|CD", Coarsen.COMBINE),
]
for finer, coarser, mode in chain:
    print(f"{finer:>10} -> {coarser:<10} {mode.value:8} {is_coarser(p(finer), p(coarser), mode)}")

# %%
# Discarding a single party from inside a block can be switched off.
print(is_coarser(p("AB|C"), p("A|C"), Coarsen.DISCARD, inner_discard=True))
print(is_coarser(p("AB|C"), p("A|C"), Coarsen.DISCARD, inner_discard=False))

# %%
# The Xi set for x = A|B|CD|E and y = A|B. Single-block partitions are
# left out because no entanglement measure is defined on them.
xs = xi_set(p("A|B|CD|E"), p("A|B"))
print(len(xs))
print(", ".join(z.format(labels) for z in xs))

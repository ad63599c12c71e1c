"""
Cells and eigenvalues in C2
===========================

Compare the ordinary cells of C2 with the 2-cells coming from the built-in
2-canonical basis.
"""

# %%
from pcells import pcan
from pcells.cells import cell_partition, diff, stats
from pcells.coxeter import build
from pcells.twist import verify

W = build("C2")
table = pcan.builtin(W, 2)
print(pcan.dumps(table))

# %%
# Two-sided cells, top to bottom, with their eigenvalue pairs.
for basis in (None, table):
    rep = verify(W, basis)
    two = rep.two
    print("p =", rep.p)
    for i in range(len(two)):
        print("  ", two.label(i), two.words(i), rep.two_sided_values[i])
    print("   stats:", tuple(stats(rep.left, rep.two, rep)))

# %%
# The middle cell loses ``1``, which becomes its own 2-cell.
report = diff(cell_partition(W, None, "two-sided"), cell_partition(W, table, "two-sided"))
print(report.splits)

# %%
# Distinguished involutions: one winner per left 2-cell.
from pcells.cells import distinguished

for r in distinguished(W, table, cell_partition(W, table, "left")):
    print(r.label, [str(x) for x in r.winners])

"""
A partial 2-canonical table in C3
=================================

Only four 2-canonical elements of C3 are built in.  That is enough to act
with the half twist on two of them and to watch their eigenvalues swap.
"""

# %%
from pcells import pcan
from pcells.coxeter import build
from pcells.twist import covered_identities, swap_probe

W = build("C3")
table = pcan.builtin(W, 2)
print("complete:", table.complete, "| listed:", [str(W[i]) for i in table.listed()])

# %%
# Every element whose image stays inside the table's domain.
for w, h, problem in covered_identities(W, table):
    print(f"H_w0 c_{w} =", h if h is not None else f"(not covered: {problem})")

# %%
# The x-values read off the full twist, in the KL basis and the 2-canonical basis.
(r,) = swap_probe(W, None, table, [(W.canonicalize("121"), W.canonicalize("121321"))])
print("p=0:", r.x0, " p=2:", r.xp, " swapped:", r.swapped)

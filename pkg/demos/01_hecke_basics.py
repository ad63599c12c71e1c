"""
Hecke algebra basics
====================

Build a Weyl group, look at its Kazhdan-Lusztig basis and let the half
twist ``H_{w0}`` act on it.
"""

# %%
# Laurent polynomials in ``v`` are exact and sparse.
from pcells.laurent import parse

f = parse("v^-1 + 2 + v^3")
print(f, "| val", f.val(), "| deg", f.deg())
print("bar:", f.bar())

# %%
# The group C2 has eight elements, listed in ShortLex order of their words.
from pcells.coxeter import build

W = build("C2")
print(W.order, [str(w) for w in W])
print("longest element:", W.longest(), "of length", W.longest().length)

# %%
# KL basis elements expanded in the standard basis ``H_x``.
from pcells.hecke import kl_table

T = kl_table(W)
for word in ("1", "12", "121", "1212"):
    print(f"b_{word} =", T.element(W.canonicalize(word)))

# %%
# The half twist on ``b_1``: modulo the lower cell only ``-c_121`` survives,
# so the eigenvalue pair of that cell is (0, -).
from pcells.twist import act_half, eigen_extract

print("H_w0 b_1 =", act_half(W, None, W.canonicalize("1")))
d = eigen_extract(W, None, W.canonicalize("1"))
print("x =", d.x, "sign =", d.sign, "partner =", d.schu)

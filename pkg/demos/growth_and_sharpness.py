"""The two experiment drivers: a growing counterexample and a log-bump sharpness scan.

Run: python3 demos/growth_and_sharpness.py
"""
from soblab.lab import counterexample_growth, sharpness_scan

g = counterexample_growth((4, 8, 16, 32))
print("R      lhs        rhs        increment")
for r in g.rows:
    inc = "" if r.increment is None else f"{r.increment:.4f}"
    print(f"{r.R:<6g} {r.lhs:<10.4f} {r.rhs:<10.4f} {inc}")
print(f"expected increment per doubling {g.expected_increment:.4f}, ok = {g.ok}")

s = sharpness_scan(q=2.0, p=2.0)
print("\n|x|     normalized  divergence(eps=0)  divergence(eps=1)")
for r in s.rows:
    print(f"{r.x:<7.1f} {r.normalized:<11.4f} {r.divergence:<18.4g} {r.divergence_cmp:.4g}")
print(f"spread {s.spread:.3f}, ok = {s.ok}")

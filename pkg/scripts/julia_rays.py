"""
Julia sets and external rays
============================

Draws the filled Julia set of z^2 - 1 with the two rays of angle 1/3 and 2/3.
Both rays land on the alpha fixed point, which is marked.
"""
import sys
from fractions import Fraction

from zerotemp.render import View, render_scene, write_ppm

out = sys.argv[1] if len(sys.argv) > 1 else "basilica_rays.ppm"

view = View(0j, 1.8, 480, 360)
img, meta = render_scene("rays", -1, view, angles=(Fraction(1, 3), Fraction(2, 3)), max_iter=300)
write_ppm(out, img)

print("alpha =", meta["alpha"])
for r in meta["rays"]:
    # landing error should be tiny for these rational angles
    print(f"ray {r['angle']:>4}: lands at {r['landing']:.6f}  certified={r['certified']}")
print("wrote", out)

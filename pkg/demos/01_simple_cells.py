"""What a simple cell is, and why flipping one is always safe.

A cell is "simple" when toggling it between foreground and background
leaves every component, loop, and cavity of the whole mask intact. The
check is local (a ring lookup), but the guarantee is global.
"""
import numpy as np

import topowarp as tw


def show(mask, marks=()):
    for r in range(mask.shape[0]):
        row = ""
        for c in range(mask.shape[1]):
            ch = "#" if mask[r, c] else "."
            row += ("[" + ch + "]") if (r, c) in marks else (" " + ch + " ")
        print(row)
    print()


mask = np.zeros((7, 9), np.uint8)
mask[2, 1:8] = 1
mask[3, 1] = mask[3, 7] = 1
mask[4, 1:8] = 1
grid = tw.Grid.from_array(mask)

print("a one-pixel-thick ring (b0=1 component, b1=1 loop):")
show(mask)
print("betti:", tw.betti(grid).as_tuple())

print("per-cell verdicts (1 = flip is topology-safe):")
field = tw.simple_mask(grid)
show(field)

# every ring cell is load-bearing: removing one would break the loop,
# so none of them are simple; the cells AROUND the ring can be added
# freely, except the hole's interior, which would start filling the loop
print("ring cells simple? ", bool(field[2, 1:8].any()))
print("outside corner simple?", bool(field[0, 0]))
print("hole center simple?   ", bool(field[3, 4]))

print()
print("flipping a simple cell, then checking the books:")
grown = mask.copy()
grown[1, 4] = 1          # verdict above says this one is safe
show(grown, marks={(1, 4)})
print("betti before:", tw.betti(grid).as_tuple(),
      " after:", tw.betti(tw.Grid.from_array(grown)).as_tuple())

print()
print("the same machinery in 3D (a hollow 3x3x3 shell):")
shell = np.ones((3, 3, 3), np.uint8)
shell[1, 1, 1] = 0
g3 = tw.Grid.from_array(shell)
print("betti (b0, b1, b2):", tw.betti(g3).as_tuple())
print("is the shell wall cell (0,1,1) simple?",
      tw.is_simple_at(g3, (0, 1, 1)))
print("(no: removing it would pierce the cavity)")

"""Critical cells: the handful of pixels where a prediction is wrong in a
way that changes connectivity, found by warping each mask toward the other
and keeping whatever refuses to move.

Plain overlap metrics treat every wrong pixel alike; the critical mask
singles out the breaks and bridges and ignores cosmetic thickness errors.
"""
import numpy as np

import topowarp as tw


def show(mask, crit=None):
    for r in range(mask.shape[0]):
        row = ""
        for c in range(mask.shape[1]):
            if crit is not None and crit[r, c]:
                row += " X"
            else:
                row += " #" if mask[r, c] else " ."
        print(row)
    print()


print("--- a broken line ------------------------------------------")
gt = np.zeros((7, 7), np.uint8)
gt[3, :] = 1
pred = gt.copy()
pred[3, 2:5] = 0
print("reference (a road, say):")
show(gt)
print("prediction (the road has a 3-cell break):")
show(pred)

crit = tw.critical_mask(pred, gt)
print("growing the prediction absorbs the two cut ends; only the middle")
print("cell still separates the halves. X marks the critical cells:")
show(pred, crit.mask.to_array())
print("reference-side residual:", int(crit.from_gt_warp.data.sum()),
      "cells; prediction-side:", int(crit.from_pred_warp.data.sum()), "cell")

print("--- thickness errors do not matter --------------------------")
gt2 = np.zeros((16, 24), np.uint8)
gt2[6:10, 2:22] = 1
pred2 = gt2.copy()
pred2[6:10, 12] = 0        # a one-column cut through the bar
pred2[10:14, 4:10] = 1     # plus a fat lump the reference never had
print("prediction = reference bar, cut in the middle, lump added below:")
show(pred2)
crit2 = tw.critical_mask(pred2, gt2, tw.WarpConfig(passes=8))
m = crit2.mask.to_array()
print("critical cells:")
show(pred2, m)
print("all", int(m.sum()), "critical cells sit in the cut column;")
print("the lump contributes", int(m[10:14, 4:10].sum()),
      "(it is connectivity-neutral, so the warp flattens it for free)")

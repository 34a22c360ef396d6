"""
Choosing the quantization step
==============================

Control cost grows like ``step**2`` and the privacy loss like ``1/step``.
The weighted sum ``w1 step^2 + w2 / step`` has a closed-form minimiser,
and the non-dominated pairs lie on ``f1 = f2**-2``.
"""

import numpy as np

from qplatoon.tradeoff import TradeoffWeights, objectives, optimal_step, pareto_front

front = pareto_front(np.geomspace(0.25, 4, 5))
print("f2      f1")
for f2, f1 in front:
    print(f"{f2:5.2f}  {f1:7.4f}")

for w1, w2 in [(1, 2), (1, 16), (4, 1)]:
    step, cost = optimal_step(TradeoffWeights(w1, w2))
    f1, f2 = objectives(step)
    print(f"w=({w1}, {w2}): step*={step:.4f}  f1={f1:.4f}  f2={f2:.4f}  cost={cost:.4f}")

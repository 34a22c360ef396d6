"""
Tracking error versus quantization step
=======================================

Coarser steps hide more information but degrade tracking.  The sweep
below compares both quantizers on the bidirectional-leader topology.
"""

from qplatoon import QuantizerSpec, ScenarioConfig
from qplatoon.analysis import delta_sweep

steps = [0.25, 0.5, 0.75, 1.0]
base = ScenarioConfig().build_sim()

det = delta_sweep(base.with_(quantizer=QuantizerSpec("deterministic", 1.0)), steps)
prob = delta_sweep(base.with_(quantizer=QuantizerSpec("probabilistic", 1.0)), steps, replicas=20)

print(" step   det RMS   prob RMS")
for d, p in zip(det.rows, prob.rows):
    print(f"{d.step:5.2f}  {d.rms:8.4f}  {p.rms:9.4f}")
print("nondecreasing:", det.monotone, prob.monotone)

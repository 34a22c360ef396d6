"""
Platoon under deterministic quantization
========================================

Ten followers track a head vehicle that cruises at 20 m/s, accelerates at
2 m/s^2 between t=5 s and t=10 s and then cruises at 30 m/s.  Every
broadcast is rounded to the nearest multiple of the step.  The tracking
errors never converge but stay inside the ultimate bound.
"""

import numpy as np

from qplatoon import QuantizerSpec, ScenarioConfig
from qplatoon.analysis import check_uub, steady_rms
from qplatoon.sim import run

for kind in ("BD", "BDL", "PF", "PLF", "TPF", "TPLF"):
    cfg = ScenarioConfig(topology={"kind": kind, "n": 10}, quantizer=QuantizerSpec("deterministic", 1.0)).build_sim()
    trace = run(cfg)
    check = check_uub(trace, cfg.gains, 1.0)
    late = trace.time >= 30
    print(
        f"{kind:>4s}: spacing error range after 30 s "
        f"[{trace.spacing_error[late].min():+.2f}, {trace.spacing_error[late].max():+.2f}] m, "
        f"steady RMS {steady_rms([trace]):.3f}, {check}"
    )

# %%
# A closer look at the first follower in the bidirectional-leader graph:
# the spacing error keeps switching between quantization levels.

cfg = ScenarioConfig(quantizer=QuantizerSpec("deterministic", 1.0)).build_sim()
trace = run(cfg)
for t in (0, 5, 10, 15, 30, 45, 60):
    k = int(np.argmin(np.abs(trace.time - t)))
    print(f"t={t:4.1f} s  spacing_1={trace.spacing_error[k, 0]:+.3f} m  u_1={trace.control[k, 0]:+.3f}")

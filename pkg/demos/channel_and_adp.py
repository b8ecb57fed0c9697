"""
From a street map to an angle-delay profile
===========================================

Place a user in the canyon, list the propagation paths, synthesize the CSI
matrix and read the paths back from the peaks of the angle-delay profile.
"""

import numpy as np

from mapcsi import SystemConfig, compute_adp, enumerate_paths, extract_peaks, synthesize_csi
from mapcsi.adp import bin_to_aod, bin_to_delay
from mapcsi.harness import default_map

# the bundled LOS map: two reflective walls, BS on the upper one
env = default_map("los")
cfg = SystemConfig()
user = (40.0, 0.0)

# direct path plus wall bounces up to second order
paths = enumerate_paths(env, user, max_order=2)
for p in paths:
    print(f"{p.bounces} bounce(s): AoD {np.degrees(p.aod):6.2f} deg, "
          f"ToA {p.toa * 1e9:6.1f} ns, |gain| {abs(p.gain):.4f}")

# 60 antennas x 60 subcarriers
h = synthesize_csi(paths, cfg)
print("CSI", h.shape)

# the ADP folds delays into one 120 ns window
a = compute_adp(h, cfg)
for peak in extract_peaks(a, 5):
    print(f"peak at AoD {np.degrees(bin_to_aod(peak.angle_bin, cfg)):6.2f} deg, "
          f"delay {bin_to_delay(peak.delay_bin, cfg) * 1e9:6.1f} ns (mod {cfg.window * 1e9:.0f} ns)")

"""
Error versus ADP size
=====================

Sweep the ADP grid over a sample of the Mixed scenario and print the CSV
table, split by LOS and NLOS positions.
"""

from mapcsi.harness import build_scenario, rows_to_csv, sweep

# 5 x 1000 grid positions; half of them sit behind a bus
scenario = build_scenario("mixed")
print(f"{(~scenario.los_mask).mean():.0%} of positions are NLOS")

# 40 stratified samples keep this to a few seconds
rows = sweep(scenario, sizes=((60, 60), (120, 120), (180, 180)), sample_limit=40, seed=0)
print(rows_to_csv(rows))

"""
Choosing the duty cycle
=======================

At a fixed SNR, sweep the duty cycle and see where OOFSK stops beating
plain FSK. The sweep and crossover helpers are the same ones the CLI uses.
"""

from oofsk.experiment import Axis, Curve, SweepSpec, crossover, run_sweep

base = {"M": 8, "L": 2, "v": 1.0, "K": 1.0, "snr_db": 0.0, "normalization": "unit_diffuse"}
spec = SweepSpec(base, Axis.DUTY_CYCLE, 0.05, 1.0, 96, curves=(Curve(()),))
rows = run_sweep(spec)

v = [r.axis for r in rows]
pe = [r.report.pe for r in rows]
fsk = pe[-1]
print(f"FSK (v = 1): pe = {fsk:.4e}")
for x, p in list(zip(v, pe))[::10]:
    print(f"v = {x:.2f}: pe = {p:.4e}")

# where the curve meets the FSK level
hits = crossover(v[:-1], pe[:-1], [fsk] * (len(pe) - 1))
print("pe(v) = pe(1) at v =", ", ".join(f"{x:.3f}" for x in hits.points))

###############################################################################
# The last crossing is the largest duty cycle that still improves on FSK.

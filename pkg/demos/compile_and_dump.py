"""Compile one Trotter step in both modes and inspect the schedules.

Shows gate counts, substep windows, and the first lines of the
text serialization that `zngauge compile` writes.
"""

from zngauge.algebra import Couplings
from zngauge.lattice import LatticeGeometry, build_layout
from zngauge.schedule import compile_step, dump_schedule

layout = build_layout(LatticeGeometry(2, 2), 3)
cpl = Couplings()

for mode in ("choreography", "direct"):
    for order in (1, 2):
        sched = compile_step(layout, cpl, 0.1, mode, order)
        busy = sum(1 for op in sched.ops if op.name != "idle")
        print(f"{mode} order {order}: {len(sched.ops)} ops, {busy} non-idle")
        for label, lo, hi in sched.substeps:
            print(f"    {label:<32s} ops [{lo:3d}, {hi:3d})")

sched = compile_step(layout, cpl, 0.1, "choreography", 1)
text = dump_schedule(sched)
print("serialized header (first 8 lines):")
for line in text.splitlines()[:8]:
    print("   ", line)
print(f"total {len(text.splitlines())} lines")

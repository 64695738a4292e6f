"""Walkthrough: per-stage timing across market sizes.

Each method is charged only for the stages it needs: random assignment skips
straight to the draw, skill-only matching pays for extraction and similarity,
and the willingness-aware matcher pays for everything.

Run with:  python demos/04_scaling_benchmark.py
"""

from swati import bench_scaling, load_builtin_ontology

sizes = [25, 50, 100]
result = bench_scaling(
    sizes, ["random", "skill", "swati"], seed=3, repetitions=3,
    ontology=load_builtin_ontology(),
)

print(f"{'size':>5} {'method':8} {'median':>9} {'min':>9} {'max':>9}  stages")
for report in result.timings:
    lo, med, hi = report.dispersion()
    stages = ",".join(report.stage_seconds)
    print(f"{report.market_size:5d} {report.method:8} {med:9.4f} {lo:9.4f} {hi:9.4f}  {stages}")

print("\nquality at each size:")
for size, report in result.quality:
    print(f"  size={size:4d} {report.method:8} total={report.total_utility:7.2f} "
          f"coverage={report.coverage:.2f}")

# Doubling the market roughly quadruples pair count; the matcher should track
# that without superlinear blowup.
medians = {(r.market_size, r.method): r.median_total() for r in result.timings}
for small, big in zip(sizes, sizes[1:]):
    ratio = medians[(big, "swati")] / medians[(small, "swati")]
    print(f"swati time({big})/time({small}) = {ratio:.2f}")

"""Refinement study for the radial interface solution with k = 10.

Runs the full pipeline on N = 10, 20, 40, 80 (pass larger N on the command
line, e.g. ``python demos/convergence_table.py 10 20 40 80 160``) and prints
the error table next to the reference values for the same meshes.
"""

import sys

from ppife import StudyConfig, run_study
from ppife.study import format_table

# reference L2 / H1-seminorm errors for the triangular mesh
REFERENCE = {10: (3.6019e-02, 5.2313e-01), 20: (1.6412e-02, 2.5292e-01),
             40: (6.6539e-03, 1.1802e-01), 80: (1.3425e-03, 5.1500e-02),
             160: (2.7744e-04, 2.4983e-02), 320: (7.7328e-05, 1.2427e-02)}

N_list = tuple(int(a) for a in sys.argv[1:]) or (10, 20, 40, 80)

# defaults: beta- = 1 inside r0 = pi/6.28, beta+ = 10 outside, alpha = 1.5,
# penalty 30 * max(beta), triangular mesh of (-1, 1)^2
config = StudyConfig(N_list=N_list)
report = run_study(config)
print(format_table(report))
print()

# how far is each computed error from the reference value?
print(f"{'N':>6} {'L2 / ref':>10} {'H1 / ref':>10}")
for rec in report.records:
    if rec.N in REFERENCE:
        l2_ref, h1_ref = REFERENCE[rec.N]
        print(f"{rec.N:>6} {rec.L2 / l2_ref:>10.3f} {rec.H1semi / h1_ref:>10.3f}")

# the same problem on rectangles uses bilinear IFE shapes
config_rect = StudyConfig(N_list=N_list[:3], element_type="rect")
print()
print(format_table(run_study(config_rect)))

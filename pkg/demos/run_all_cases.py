"""Run the five built-in demonstration cases and print their reports.

Traces and reports land in ./case_output; each report carries one CHECK
line per claim with the measured value and its tolerance.
"""

from cascade_droop.cases import run_case

for case_id in range(1, 6):
    report = run_case(case_id, "case_output")
    print(report.render())
    print()

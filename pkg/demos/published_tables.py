"""Measure the four cost tables next to their published values (quick mode).

Run: python3 demos/published_tables.py      (about two minutes)
The command-line equivalent is `python3 -m agslm table I --quick`; drop
--quick for the full 10^5 trials.
"""
from agslm.harness import reproduce_table

for which in ("I", "II", "III", "IV"):
    print(reproduce_table(which, quick=True).to_text())
    print()

"""Two plots separated by END_RUN; only the first reads data.csv."""

import os
import time

CONTROL = os.environ["YPROV_CONTROL"]


def directive(line):
    with open(CONTROL, "a", encoding="utf-8") as f:
        f.write(line + "\n")


directive("INPUT\tdata.csv")
with open("data.csv", encoding="utf-8") as f:
    data = f.read()
with open("first.png", "w", encoding="utf-8") as f:
    f.write("first " + data)

# File timestamps are coarse; keep writes clear of the boundary.
time.sleep(0.05)
directive("END_RUN\tfirst_plot")
time.sleep(0.05)

with open("second.png", "w", encoding="utf-8") as f:
    f.write("second")

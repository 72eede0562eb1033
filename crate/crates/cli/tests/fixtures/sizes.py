import os

control = os.environ["YPROV_CONTROL"]
with open(control, "a", encoding="utf-8") as f:
    for name in ("big.bin", "small.bin"):
        f.write(f"INPUT\t{name}\n")
total = 0
for name in ("big.bin", "small.bin"):
    with open(name, "rb") as f:
        total += len(f.read())
with open("total.txt", "w", encoding="utf-8") as f:
    f.write(str(total))

"""Reads a small CSV and draws its values as a grayscale bar chart PNG."""

import os
import struct
import zlib


def log_input(path):
    control = os.environ.get("YPROV_CONTROL")
    if control:
        with open(control, "a", encoding="utf-8") as f:
            f.write(f"INPUT\t{path}\n")


def png(width, height, rows):
    def chunk(kind, data):
        body = kind + data
        return struct.pack(">I", len(data)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)

    raw = b"".join(b"\x00" + bytes(row) for row in rows)
    header = struct.pack(">IIBBBBB", width, height, 8, 0, 0, 0, 0)
    # Level 0 emits stored blocks, so the bytes do not depend on the zlib build.
    idat = zlib.compress(raw, 0)
    return b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", header) + chunk(b"IDAT", idat) + chunk(b"IEND", b"")


def main():
    log_input("assets/results.csv")
    with open("assets/results.csv", encoding="utf-8") as f:
        rows = [line.strip().split(",") for line in f if line.strip()][1:]
    values = [float(v) for _, v in rows]
    top = max(values)
    height = 16
    pixels = [
        [255 if height - y <= round(v / top * height) else 0 for v in values]
        for y in range(height)
    ]
    with open("example.png", "wb") as f:
        f.write(png(len(values), height, pixels))


if __name__ == "__main__":
    main()

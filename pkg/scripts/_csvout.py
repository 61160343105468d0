"""CSV writer shared by the experiment scripts (same layout as the CLI)."""

import csv
import sys


def write_csv(schema, header, rows, path=None):
    fh = open(path, "w", encoding="utf-8", newline="") if path else sys.stdout
    try:
        fh.write(f"# schema: {schema}/v1\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if path:
            fh.close()

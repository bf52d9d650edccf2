import argparse
import csv
from pathlib import Path

RESULTS = Path(__file__).resolve().parent.parent / "results"


def parser(doc: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=doc)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--outdir", type=Path, default=RESULTS)
    return p


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([f"{x:.10g}" if isinstance(x, float) else x for x in r])
    print(f"wrote {path}")

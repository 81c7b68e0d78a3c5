#!/usr/bin/env python3
"""Convert rt-polarity.pos / rt-polarity.neg into the corpus TSV format.

usage: convert_mr.py rt-polarity.pos rt-polarity.neg > mr.tsv
"""
import argparse
import sys


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("pos")
    ap.add_argument("neg")
    args = ap.parse_args()
    out = sys.stdout
    for label, path in (("pos", args.pos), ("neg", args.neg)):
        with open(path, encoding="latin-1") as f:
            for n, line in enumerate(f, 1):
                text = " ".join(line.split())
                if text:
                    out.write(f"{label}-{n}\t{label}\t-\t{text}\n")


if __name__ == "__main__":
    main()

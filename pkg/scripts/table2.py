"""Convergence sweep with dt = h^2 over [0, 0.125] from unit sphere data (about 20 s)."""
import sys

from axismcf.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "out/table2"
    sys.exit(main(["eoc-sweep", "--dt-mode", "h2", "--T", "0.125", "--Js", "32,64,128,256,512",
                   "--output-dir", out]))

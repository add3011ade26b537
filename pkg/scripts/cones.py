"""Surface with an outward and an inward cone at the poles; both smooth out at once."""
import sys

from axismcf.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "out/cones"
    sys.exit(main(["run", "--family", "cones", "--J", "512", "--dt-mode", "fixed:1e-4", "--T", "0.1",
                   "--snapshot-times", "0,0.01,0.05,0.1", "--record-every", "10",
                   "--output-dir", out]))

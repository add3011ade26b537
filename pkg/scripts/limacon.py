"""Torus inscribed in a sphere, evolved through the pinch-off of the inner loop."""
import sys

from axismcf.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "out/limacon"
    sys.exit(main(["run", "--family", "limacon", "--J", "1024", "--dt-mode", "fixed:1e-4", "--T", "0.2",
                   "--snapshot-times", "0,0.1,0.14,0.2", "--record-every", "10",
                   "--track-intersections", "--output-dir", out]))

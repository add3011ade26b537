"""Search for the three-intersection self-shrinker and evolve it (a few minutes)."""
import sys

from axismcf.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "out/shrinker"
    sys.exit(main(["shrinker-search", "--intersections", "3", "--J", "512", "--evolve", "--dt", "1e-4",
                   "--T", "0.95", "--output-dir", out]))

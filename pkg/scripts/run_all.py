#!/usr/bin/env python3
"""Run the full experiment battery with the default acceptance-grade configs.

Equivalent to `fuzzytorus all`, but handy to tweak inline while exploring.
"""

import sys

from fuzzytorus.cli import main

if __name__ == "__main__":
    sys.exit(main(["all", *sys.argv[1:]]))

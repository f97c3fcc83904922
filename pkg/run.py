#!/usr/bin/env python3
"""
Phase-Space Quasiprobability Toolkit
Command-line entry point
"""

import sys

from phasespace.commands import main

if __name__ == '__main__':
    sys.exit(main(sys.argv[1:]))

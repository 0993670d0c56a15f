#!/usr/bin/env python3
"""
GHZ to W conversion toolkit entry point script
"""
import sys
from app.scripts.cli import main

if __name__ == '__main__':
    sys.exit(main())

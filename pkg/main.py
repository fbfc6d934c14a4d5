"""
Coupled-microring single-photon source designer
Entry point: python main.py {delay,jsa,optimize,reproduce} [--config PATH] [--out DIR]
"""

import sys

from cli import main

if __name__ == "__main__":
    sys.exit(main())

import sys

from Cli.cli import run

if __name__ == "__main__":
    sys.exit(run())

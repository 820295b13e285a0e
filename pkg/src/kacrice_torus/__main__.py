"""Main entry point for python -m kacrice_torus."""

from .cli import main

if __name__ == "__main__":
    main()

"""naqkit: minimum realizer complexity, advice burden and NAQ on a bounded reference machine."""

__version__ = "0.1.0"

"""mdpattern: extract machine-independent RTL patterns from GCC-style
machine description files and measure cross-architecture similarity."""

__version__ = "0.1.0"

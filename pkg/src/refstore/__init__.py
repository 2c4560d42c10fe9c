"""A workbench for a monadic language with general references: interpreter,
equivalence checking and a checked rewriting engine."""

__version__ = "0.1.0"

"""relog: a probabilistic relational programming language and runtime."""

__version__ = "0.1.0"

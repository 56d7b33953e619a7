"""Monadic datalog over labeled trees, with automata compilers, ATM encodings and hardness reductions."""

__version__ = "0.1.0"

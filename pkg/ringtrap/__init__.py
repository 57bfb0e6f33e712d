"""Design-and-simulation toolkit for microring resonators coupled to trapped atoms.
"""

__version__ = "0.1.0"

"""LTE random access collision simulator and SIB2 record analyzer."""

__version__ = "0.1.0"

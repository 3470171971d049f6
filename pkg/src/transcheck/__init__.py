"""Checks for translations between interpreted term languages, plus a pi-calculus workbench."""

__version__ = "0.1.0"

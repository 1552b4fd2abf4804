"""Kummer Asymptotics Modules"""

__version__ = "1.0"

"""Biologically inspired real-time visual tracker."""
__version__ = '0.1.0'

"""
rigidpath - static-background trajectory identification for moving-camera videos
"""

__version__ = "0.1.0"

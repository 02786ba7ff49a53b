"""
attsync
Attitude synchronization of networked rigid bodies over directed graphs:
multiplicative-quaternion-error protocol, frame-change constructions and diagnostics
"""

__version__ = "1.0.0"

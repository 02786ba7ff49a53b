"""
API routers for attsync
"""
from . import experiments

__all__ = ["experiments"]

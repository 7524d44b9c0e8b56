"""
grassgeo - differential geometry of nondegenerate grassmannians.
"""
__version__ = "1.0.0"

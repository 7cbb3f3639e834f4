"""
Alpha-Eta Exposure Simulator

Monte Carlo and closed-form analysis of an eavesdropper's entropy on the seed
key of the alpha-eta (Y-00) stream cipher.
"""

__version__ = "1.0.0"

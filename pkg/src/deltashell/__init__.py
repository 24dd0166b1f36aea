"""Resolvent differences for delta and delta-prime shell interactions."""

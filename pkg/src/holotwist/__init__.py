"""Twisted principal bundles with connection as local Cech data, their
surface holonomy valued in the categorical group of a central extension,
and the reconstruction of the bundle data from a holonomy oracle."""

__version__ = "0.1.0"

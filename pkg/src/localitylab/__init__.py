"""Locality toolkit: graphs, label checkers, execution engines, and the
statistical / adversarial experiments built on them.

Submodules are imported explicitly by consumers; importing the package
itself stays cheap.
"""

__version__ = "0.1.0"

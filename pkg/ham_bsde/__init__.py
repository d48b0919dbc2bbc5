# __init__.py

__version__ = "0.3.0"
VERSION = tuple(map(int, __version__.split(".")))

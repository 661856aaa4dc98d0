from importlib.metadata import version, PackageNotFoundError

try:
    __version__ = version("coordination_milp")
except PackageNotFoundError:
    __version__ = "unknown version"

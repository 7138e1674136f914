"""structqn bench - Suite runner, CSV traces and performance profiles."""

__version__ = "0.1.0"

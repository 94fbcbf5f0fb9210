"""Cluster recorded performances of a movement into tempo traditions and
measure each tradition's drift over recording year."""

__version__ = "0.1.0"


class DomainError(ValueError):
    """Raised when an operation's inputs fall outside its domain."""

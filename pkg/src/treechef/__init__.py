"""treechef: kitchen-teaming workbench with editable tree policies."""

__version__ = "0.1.0"

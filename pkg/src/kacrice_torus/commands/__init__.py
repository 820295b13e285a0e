"""Subcommands of the kacrice CLI."""

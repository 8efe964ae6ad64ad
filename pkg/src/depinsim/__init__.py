"""Simulator and measurement toolkit for a decentralized serverless compute network."""

__version__ = "0.1.0"

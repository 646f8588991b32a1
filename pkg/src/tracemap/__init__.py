"""Batch traceroute analysis: cleaning, geolocation, per-hop statistics,
MPLS link detection and country-to-country link maps."""

__version__ = "0.1.0"

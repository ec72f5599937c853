"""Subdivision-rule tile complexes, tree connections, and the circle
parametrization of the curve approximations they generate."""

from importlib import resources


def bundled_rule_path(name: str):
    """Path to a bundled rule file, e.g. ``lattes_g`` or
    ``lattes_h_alt_orders/reversed``."""
    return resources.files(__name__) / "rules" / f"{name}.json"

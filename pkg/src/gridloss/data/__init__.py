"""Bundled fixtures: feeder cases, a wind-plant capability curve, a daily
profile, and a sag scenario. Load them with importlib.resources."""

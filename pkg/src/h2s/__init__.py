"""h2s: turn part-segmented 3D models into perspective drawing tutorials."""

__version__ = "0.1.0"

"""2D LiDAR line and corner extraction with propagated uncertainty."""

__version__ = "0.1.0"

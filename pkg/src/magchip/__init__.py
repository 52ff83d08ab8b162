"""Design and simulation studio for transparent permanent-magnet atom chips."""

__version__ = "0.1.0"

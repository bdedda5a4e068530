"""Speech emotion recognition with MFCC+LPC features and manta-ray feature selection."""

__version__ = "0.1.0"

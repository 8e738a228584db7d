"""Category-of-paths model of an Effros-Shen AF algebra and its spectral triple."""

__version__ = "0.1.0"

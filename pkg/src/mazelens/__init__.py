"""mazelens: interpretability workbench for a maze-solving
convolutional policy network."""

__version__ = "0.1.0"

"""Parameter docstring generation: corpus filtering, extraction, datasets,
directive generation, composition and evaluation."""

__version__ = "0.1.0"

"""Neural SPARQL Machine toolkit: generator, learner and interpreter."""

__version__ = "0.1.0"

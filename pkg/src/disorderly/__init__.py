"""Disorderly update semantics, well-founded evaluation and transducer networks."""

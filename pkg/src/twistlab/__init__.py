"""twistlab: quadratic twists, half-integral weight q-expansions and twist densities."""

__version__ = "0.1.0"

"""hypercox: enumeration and certification of finite-volume non-compact
hyperbolic Coxeter n-polytopes with n+3 facets."""

__version__ = "0.1.0"

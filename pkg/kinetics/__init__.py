"""Wave-turbulence kinetic library: collision operator, blow-up fits and closure diagnostics"""

__version__ = "0.1.0"

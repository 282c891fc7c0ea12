"""Training-time proxy-subset selection: metrics, schedulers, selection, analysis."""

try:
    from ._asp import *  # noqa: F401,F403 -- installed package layout
except ImportError:  # extension built next to the sources
    from _asp import *  # noqa: F401,F403

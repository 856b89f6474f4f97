"""Timeseries-aware uncertainty wrappers for fused classifier outcomes."""

try:
    from ._tauw import *  # noqa: F401,F403
    from ._tauw import __version__  # noqa: F401
except ImportError:  # build-tree layout: extension sits on sys.path directly
    from _tauw import *  # noqa: F401,F403
    from _tauw import __version__  # noqa: F401

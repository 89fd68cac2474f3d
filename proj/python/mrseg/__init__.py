"""Multi-resolution point cloud segmentation.

The compiled core lives in ``mrseg._core`` in an installed package; when
working from a build tree it sits alone on ``PYTHONPATH`` instead.
"""

try:
    from mrseg._core import *  # noqa: F401,F403
    from mrseg._core import __doc__  # noqa: F401
except ImportError:  # build-tree layout
    from _core import *  # noqa: F401,F403
    from _core import __doc__  # noqa: F401

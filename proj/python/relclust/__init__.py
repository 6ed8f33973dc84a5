"""Approximate k-median / k-means clustering over join query results.

The heavy lifting lives in the compiled extension ``_relclust``; this
package adds small path-based conveniences.  Query specs are JSON text:
see the repository README for the format.
"""

import os

try:  # installed layout: extension lives inside the package
    from ._relclust import count, run
except ImportError:  # build-tree layout: extension sits next to the package
    from _relclust import count, run

__all__ = ["run", "count", "run_file", "count_file"]


def run_file(path, **kwargs):
    """Like :func:`run`, reading the JSON spec from ``path``.

    Relative ``csv`` references inside the spec resolve against the spec
    file's directory.
    """
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return run(text, base_dir=os.path.dirname(os.path.abspath(path)), **kwargs)


def count_file(path, **kwargs):
    """Like :func:`count`, reading the JSON spec from ``path``."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return count(text, base_dir=os.path.dirname(os.path.abspath(path)), **kwargs)

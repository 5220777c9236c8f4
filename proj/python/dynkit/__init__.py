"""Chain recurrence, attractors, shadowing and invariant manifolds on box grids."""

import json as _json

from ._dynkit import *  # noqa: F401,F403
from ._dynkit import __version__, run as _run


def run(subcommand, config, out_dir, seed=None):
    """Run a CLI subcommand on a config dict; returns (exit code, report dict)."""
    code, text = _run(subcommand, _json.dumps(config), str(out_dir), seed)
    return code, _json.loads(text)

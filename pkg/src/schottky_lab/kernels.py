"""Backend selection for the numerical kernels.

The compiled extension is used when it imports cleanly; otherwise, or when
``SCHOTTKY_LAB_PURE_PYTHON=1`` is set, the numpy reference implementation is
used.  ``BACKEND`` names the active choice.
"""
import os

from . import _kernels_py

if os.environ.get("SCHOTTKY_LAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

PURE_LOG = _kernels_py.PURE_LOG
LEMMA22 = _kernels_py.LEMMA22
REMARK24 = _kernels_py.REMARK24
NEWTON_MAX_ITER = _kernels_py.NEWTON_MAX_ITER
NEWTON_RTOL = _kernels_py.NEWTON_RTOL

smoothstep = _impl.smoothstep
profile_eval = _impl.profile_eval
profile_excess = _impl.profile_excess
profile_invert = _impl.profile_invert
height_log = _impl.height_log
height_excess = _impl.height_excess
log_T = _impl.log_T
profile_eval_array = _impl.profile_eval_array
profile_excess_array = _impl.profile_excess_array
profile_invert_array = _impl.profile_invert_array
height_excess_array = _impl.height_excess_array
log_T_array = _impl.log_T_array
parabolic_partial_sum = _impl.parabolic_partial_sum
shell_counts = _impl.shell_counts
shell_sum = _impl.shell_sum
enumerate_words_sum = _impl.enumerate_words_sum


def backends():
    """Return ``{name: module}`` for every importable backend."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels
        found["cython"] = _kernels
    except ImportError:
        pass
    return found

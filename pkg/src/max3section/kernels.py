"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-Python backend
is the fallback.  Set ``MAX3SECTION_BACKEND=python`` (or ``compiled``) to
force a choice; forcing ``compiled`` raises if the extension is missing.
"""

import os

_requested = os.environ.get("MAX3SECTION_BACKEND", "").strip().lower()

if _requested == "python":
    from . import _pykernels as _impl

    BACKEND = "python"
elif _requested == "compiled":
    from . import _kernels as _impl  # type: ignore[no-redef]

    BACKEND = "compiled"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import _pykernels as _impl  # type: ignore[no-redef]

        BACKEND = "python"

norm_cdf = _impl.norm_cdf
norm_ppf = _impl.norm_ppf
gamma_cdf = _impl.gamma_cdf
perm_term = _impl.perm_term
cut_prob = _impl.cut_prob
cut_prob_fixed = _impl.cut_prob_fixed
cut_prob_fill = _impl.cut_prob_fill

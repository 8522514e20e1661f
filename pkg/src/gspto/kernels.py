"""Backend selection for the hot kernels.

At import time the compiled extension is preferred when present; otherwise the
numpy fallback takes over. ``GSPTO_BACKEND=python`` forces the fallback,
``GSPTO_BACKEND=compiled`` insists on the extension (import error if absent).
The two backends agree to floating-point roundoff, not bitwise: summation
order differs. Objectives without a builtin-kernel descriptor (external
scorers, attack losses, custom domain predicates) always take the numpy path.
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import _kernels_py as _py

_choice = os.environ.get("GSPTO_BACKEND", "auto").lower()
_cy = None
if _choice in ("auto", "compiled"):
    try:
        from . import _kernels_cy as _cy  # type: ignore[no-redef]
    except ImportError:
        if _choice == "compiled":
            raise
        _cy = None
elif _choice != "python":
    raise RuntimeError(f"GSPTO_BACKEND must be auto|python|compiled, got {_choice!r}")

BACKEND = "compiled" if _cy is not None else "python"


def _compiled_route(objective):
    """Kind id + params when the compiled core can evaluate this objective."""
    if _cy is None or objective.kernel is None or objective.in_domain is not None:
        return None
    if not math.isfinite(objective.box) or objective.dimension > 64:
        return None
    kind = _cy.KIND_IDS.get(objective.kernel.kind)
    if kind is None:
        return None
    return kind, np.ascontiguousarray(objective.kernel.params, dtype=float)


def gspto_estimate(objective, z, mu, sigma, mode):
    route = _compiled_route(objective)
    if route is not None:
        kind, params = route
        return _cy.gspto_estimate(
            z, mu, float(sigma), kind, params, float(objective.shift),
            float(objective.box), mode.kind == "epgs", float(mode.power),
            mode.stable_weighting,
        )
    return _py.gspto_estimate(z, mu, sigma, objective, mode)


def sphere_estimate(objective, v, mu, sigma, f_mu, forward_difference):
    route = _compiled_route(objective)
    if route is not None:
        kind, params = route
        return _cy.sphere_estimate(
            v, mu, float(sigma), kind, params, float(objective.shift),
            float(f_mu), bool(forward_difference),
        )
    return _py.sphere_estimate(v, mu, sigma, objective, f_mu, forward_difference)

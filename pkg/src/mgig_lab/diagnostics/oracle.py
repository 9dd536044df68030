#!/usr/bin/env python3
"""
Closed-form GIG moments, used as independent test oracles.

E[Xʳ] = (b/a)^(r/2) K_{ν+r}(√(ab)) / K_ν(√(ab)) for a, b > 0. The ratio is
taken with SciPy's exponentially scaled ``kve`` so the scaling cancels and
large √(ab) does not underflow.
"""

import math

from scipy.special import gammaln, kve

from mgig_lab.core.exceptions import BoundaryParamsError, InvalidParamsError
from mgig_lab.utils.type_definitions import GigParams


def gig_moment_oracle(params: GigParams, r: int) -> float:
    """
    r-th raw moment of GIG(ν, a, b) with a, b > 0.

    Raises:
        BoundaryParamsError: If a or b is zero
    """
    if params.a == 0.0 or params.b == 0.0:
        raise BoundaryParamsError(
            "Bessel moments need a > 0 and b > 0; use gig_boundary_moment",
            {"a": params.a, "b": params.b},
        )
    if r == 0:
        return 1.0
    omega = math.sqrt(params.a * params.b)
    ratio = float(kve(params.nu + r, omega)) / float(kve(params.nu, omega))
    return (params.b / params.a) ** (r / 2.0) * ratio


def gig_boundary_moment(params: GigParams, r: int) -> float:
    """
    r-th raw moment in the Gamma (b = 0) or inverse-Gamma (a = 0) limit.

    Raises:
        BoundaryParamsError: If both a and b are positive
        InvalidParamsError: If the moment does not exist
    """
    if r == 0:
        return 1.0
    if params.b == 0.0:
        shape, scale = params.nu, 2.0 / params.a
        if shape + r <= 0:
            raise InvalidParamsError("moment does not exist", {"nu": shape, "r": r})
        return math.exp(gammaln(shape + r) - gammaln(shape) + r * math.log(scale))
    if params.a == 0.0:
        shape, rate = -params.nu, params.b / 2.0
        if shape - r <= 0:
            raise InvalidParamsError("moment does not exist", {"nu": params.nu, "r": r})
        return math.exp(gammaln(shape - r) - gammaln(shape) + r * math.log(rate))
    raise BoundaryParamsError("parameters are not on the boundary")


def gig_moment(params: GigParams, r: int) -> float:
    """Dispatch to the Bessel or boundary closed form."""
    if params.a == 0.0 or params.b == 0.0:
        return gig_boundary_moment(params, r)
    return gig_moment_oracle(params, r)

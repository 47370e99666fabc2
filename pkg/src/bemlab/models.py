"""Named model spacetimes and weights used by tests, certificates and the CLI."""

from __future__ import annotations

import math

from . import profiles as P
from .errors import ConfigurationError
from .geometry import SpaceForm, WarpedSpacetime, WeightProfile
from .profiles import Interval


def minkowski_torus(n=4):
    return WarpedSpacetime(n, P.constant(1.0), SpaceForm(n - 1, 0), name="minkowski_torus")


def product(n=4, kappa=0):
    return WarpedSpacetime(n, P.constant(1.0), SpaceForm(n - 1, kappa), name=f"product[kappa={kappa}]")


def einstein_static(n=4):
    return WarpedSpacetime(n, P.constant(1.0), SpaceForm(n - 1, 1), name="einstein_static")


def de_sitter(n=4):
    return WarpedSpacetime(n, P.cosh(), SpaceForm(n - 1, 1), name="de_sitter")


def einstein_de_sitter(n=4):
    """Flat dust FLRW, ``a = t^(2/3)`` on ``(0, inf)``."""
    return WarpedSpacetime(n, P.power(2.0 / 3.0), SpaceForm(n - 1, 0), name="einstein_de_sitter")


def lcdm(n=4):
    """Flat dust plus cosmological constant normalised so that ``a = sinh(3t/2)^(2/3)``."""
    return WarpedSpacetime(n, P.sinh_power(), SpaceForm(n - 1, 0), name="lcdm")


def warped_exp(n=4, rate=-1.0, kappa=0):
    """``a = exp(rate * t)``; ``rate=-1`` is the borderline model of the warped splitting."""
    return WarpedSpacetime(n, P.exponential(rate), SpaceForm(n - 1, kappa), name=f"warped_exp[{rate:g}]")


def oscillating(n=4, amp=0.1, kappa=1, tdomain=Interval.closed(0.0, math.pi)):
    return WarpedSpacetime(n, P.sinusoid(1.0, amp), SpaceForm(n - 1, kappa), tdomain,
                           name=f"oscillating[{amp:g}]")


MODELS = {
    "minkowski_torus": minkowski_torus,
    "product": product,
    "einstein_static": einstein_static,
    "de_sitter": de_sitter,
    "einstein_de_sitter": einstein_de_sitter,
    "lcdm": lcdm,
    "warped_exp": warped_exp,
    "oscillating": oscillating,
}


def constant_weight(c=0.0):
    return WeightProfile(P.constant(c), sup_bound=float(c))


def exp_weight(rate=1.0, amp=1.0):
    """``f = amp * exp(rate t)``: unbounded above for ``rate > 0``, so no ``k`` is declared."""
    return WeightProfile(P.exponential(rate, amp))


def linear_weight(slope, offset=0.0):
    return WeightProfile(P.polynomial([offset, slope]))


WEIGHTS = {
    "constant": constant_weight,
    "exp": exp_weight,
    "linear": linear_weight,
}


def build_model(name, **params):
    try:
        return MODELS[name](**params)
    except KeyError:
        raise ConfigurationError(f"unknown model {name!r}; valid: {sorted(MODELS)}") from None


def build_weight(name, **params):
    try:
        return WEIGHTS[name](**params)
    except KeyError:
        raise ConfigurationError(f"unknown weight {name!r}; valid: {sorted(WEIGHTS)}") from None

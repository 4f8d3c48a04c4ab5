"""Named tori.

The irrational presets use inverse squared sides (1, x, y) where {1, x, y}
is a basis of a number field, so the three coefficients are linearly
independent over Q and distinct vectors never share a norm.  The ratio
of the first to the last coefficient is algebraic, hence of type 1.
"""

from __future__ import annotations

from .lattice import TorusSpec

PRESETS = {
    "standard": (("1", "1", "1"), None),
    # 1, sqrt 2, sqrt 3: basis of the biquadratic field Q(sqrt 2, sqrt 3) (with sqrt 6)
    "sqrt23": (("1", "1.4142135623730950488016887242097", "1.7320508075688772935274463415059"), 1.0),
    # 1, 2^(1/3), 4^(1/3): power basis of Q(2^(1/3))
    "cbrt2": (("1", "1.2599210498948731647672106072782", "1.5874010519681994747517056392723"), 1.0),
}
PRESETS["irrational"] = PRESETS["sqrt23"]


def get_preset(name: str) -> TorusSpec:
    try:
        values, tau = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown torus preset {name!r}; choose from {sorted(PRESETS)}") from None
    if name == "standard":
        return TorusSpec.standard()
    return TorusSpec.parse(values, finite_type_hint=tau, label=name)

"""Vector-field specifications for the invariant-forms pipeline.

Two field kinds are supported:

* ``zero`` — the deformation vanishes; the graded complex is the full cochain
  complex split by parity.
* ``rotation(s=<speed>, L=<circle length>)`` — a free circle action with
  generating field of pointwise speed ``s``; the manifold is modelled as
  ``base x S^1`` and all computations happen on the invariant (pair) complex
  over the base.  ``s`` is kept as an exact rational so the invariant-Betti
  oracle can decide s = 0 versus s != 0 without tolerances.
"""

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import UnsupportedConfiguration

# which generator shape serves as the base of <shape-or-product> = base x S^1
ROTATION_BASE = {
    "annulus": "interval",
    "square": "square",
    "solid_torus": "disk",
}


@dataclass(frozen=True)
class VectorFieldSpec:
    kind: str  # "zero" | "rotation"
    s: Fraction = Fraction(0)
    L: Fraction = Fraction(1)

    @property
    def is_zero(self):
        return self.kind == "zero" or (self.kind == "rotation" and self.s == 0)


_ROT = re.compile(r"^rotation\((.*)\)$")


def parse_field(text):
    """Parse 'zero' or 'rotation(s=<rational>, L=<rational>)'."""
    text = text.strip()
    if text == "zero":
        return VectorFieldSpec("zero")
    m = _ROT.match(text)
    if not m:
        raise UnsupportedConfiguration(f"cannot parse field spec {text!r}")
    params = {"s": Fraction(1), "L": Fraction(1)}
    body = m.group(1).strip()
    if body:
        for item in body.split(","):
            if "=" not in item:
                raise UnsupportedConfiguration(f"bad field parameter {item!r}")
            key, val = (t.strip() for t in item.split("=", 1))
            if key not in params:
                raise UnsupportedConfiguration(f"unknown field parameter {key!r}")
            try:
                params[key] = Fraction(val)
            except (ValueError, ZeroDivisionError) as exc:
                raise UnsupportedConfiguration(f"bad value for {key}: {val!r}") from exc
    if params["L"] <= 0:
        raise UnsupportedConfiguration("circle length L must be positive")
    return VectorFieldSpec("rotation", s=params["s"], L=params["L"])


def rotation_base_shape(shape):
    """Base shape of `shape` (or shape x S^1) under the rotation action."""
    if shape not in ROTATION_BASE:
        raise UnsupportedConfiguration(
            f"shape {shape!r} carries no built-in rotation action; "
            f"supported: {sorted(ROTATION_BASE)}"
        )
    return ROTATION_BASE[shape]


def rotation_base_resolution(shape, res):
    """Resolution of the base mesh matching generator conventions."""
    if shape == "annulus":
        return max(2, res // 4)
    if shape == "square":
        return res
    if shape == "solid_torus":
        return max(1, res // 4)
    raise UnsupportedConfiguration(f"no rotation base for {shape!r}")

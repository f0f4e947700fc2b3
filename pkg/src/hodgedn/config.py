"""Tolerance configuration shared by all verification routines."""

from dataclasses import dataclass, field, fields, replace


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances.  Names are stable: the CLI exposes --tol.<name>.

    rank        relative singular-value cutoff for numerical ranks
    gap         required ratio sigma_accepted/sigma_rejected at a rank cutoff
    green       integration-by-parts identity residual (roundoff only)
    star        Hodge-star accuracy constant C in C*h (mesh dependent)
    harm        harmonic-space constraint residual (relative)
    bvp         boundary value problem residual (relative)
    decomp      orthogonal decomposition residual (relative)
    dn          boundary-map identity residual (relative)
    angle       principal-angle tolerance for subspace equality (radians)
    angle_min   required separation between transversal subspaces (radians)
    seq         exact-sequence / diagram commutativity residual
    cup         boundary cup-product residual at the finer resolution
    cup_factor  required residual decrease factor under one refinement
    """

    rank: float = 1e-8
    gap: float = 1e3
    green: float = 1e-10
    star: float = 2.0
    harm: float = 1e-8
    bvp: float = 1e-8
    decomp: float = 1e-8
    dn: float = 1e-7
    angle: float = 1e-6
    angle_min: float = 1e-3
    seq: float = 1e-6
    cup: float = 5e-2
    cup_factor: float = 1.33

    def with_overrides(self, overrides: dict) -> "Tolerances":
        known = {f.name for f in fields(self)}
        for name in overrides:
            if name not in known:
                raise KeyError(f"unknown tolerance {name!r}; known: {sorted(known)}")
        return replace(self, **{k: float(v) for k, v in overrides.items()})


DEFAULT_TOLERANCES = Tolerances()

"""Harmonic-oscillator model: Hamiltonian, Lax matrices, and the half-angle machinery.

The structure-constant flow of the oscillator linearizes in four phase
functions (A+, A-, D+, D-).  They are half-angle functions of the phase-space
point: writing z = p + i*omega*q, the pair (A+, A-) is sqrt(2)*sqrt(z) and
(D+, D-) is z**(3/2)/sqrt(2) split into real and imaginary parts.  Being
half-angle objects they are double-valued over phase space; this module
provides both the single-valued principal branch (for pointwise work such as
PDE stencils) and a branch-continuous evaluation driven by an unwrapped phase
angle (for comparisons along trajectories).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calculus import LawReport, trial_rng
from .errors import DegenerateStateError, DimensionMismatchError
from .multilinear import Operation, make_operation

__all__ = [
    "OscState",
    "AuxFunctions",
    "MuParams",
    "GammaMatrix",
    "hamiltonian",
    "hamilton_rhs",
    "lax_matrices",
    "principal_theta",
    "aux_functions_principal",
    "aux_functions_continuous",
    "g_functions",
    "mu_family",
    "gamma_matrix",
    "gamma_structural_zeros",
    "proof_identity_residuals",
    "random_state",
    "proof_identity_suite",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OscState:
    """One phase-space point (q, p) of an oscillator with angular frequency omega."""

    omega: float
    q: float
    p: float

    def __post_init__(self):
        if not (self.omega > 0.0 and math.isfinite(self.omega)):
            raise ValueError(f"omega must be positive and finite, got {self.omega}")
        if not (math.isfinite(self.q) and math.isfinite(self.p)):
            raise ValueError("q and p must be finite")


@dataclass(frozen=True)
class AuxFunctions:
    """Phase functions (A+, A-, D+, D-) at one state, tagged with the angle used.

    theta is the (possibly unwrapped) phase angle that produced the values;
    on the principal branch it lies in (-pi, pi].  The D values must always
    equal their cubic expressions in the A values, which is checked here
    because it is the one defining relation visible from the fields alone.
    """

    a_plus: float
    a_minus: float
    d_plus: float
    d_minus: float
    theta: float

    def __post_init__(self):
        ap, am = self.a_plus, self.a_minus
        scale = 1e-12 * (1.0 + max(abs(ap), abs(am)) ** 3)
        if abs(self.d_plus - 0.5 * ap * (ap * ap - 3.0 * am * am)) > scale:
            raise ValueError("d_plus inconsistent with its cubic expression in A+/A-")
        if abs(self.d_minus - 0.5 * am * (3.0 * ap * ap - am * am)) > scale:
            raise ValueError("d_minus inconsistent with its cubic expression in A+/A-")


@dataclass(frozen=True)
class MuParams:
    """The eight real parameters C1..C8 of the solution family (one-based labels)."""

    c: tuple

    def __post_init__(self):
        c = tuple(float(x) for x in self.c)
        if len(c) != 8:
            raise ValueError(f"need exactly 8 parameters, got {len(c)}")
        if not all(math.isfinite(x) for x in c):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "c", c)

    @classmethod
    def zeros(cls) -> "MuParams":
        return cls((0.0,) * 8)


@dataclass(frozen=True)
class GammaMatrix:
    """The 8x8 constraint matrix assembled from the four G values."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.shape != (8, 8):
            raise DimensionMismatchError(f"expected an 8x8 matrix, got {e.shape}")
        e = e.copy()
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)


def hamiltonian(s: OscState) -> float:
    """H = (p^2 + omega^2 q^2) / 2."""
    return 0.5 * (s.p * s.p + s.omega * s.omega * s.q * s.q)


def hamilton_rhs(s: OscState) -> tuple:
    """Canonical equations of motion: (dq/dt, dp/dt) = (p, -omega^2 q)."""
    return (s.p, -s.omega * s.omega * s.q)


def lax_matrices(s: OscState) -> tuple:
    """Classical Lax pair: L = [[p, wq], [wq, -p]], M = (w/2)[[0, -1], [1, 0]]."""
    w, q, p = s.omega, s.q, s.p
    L = make_operation(2, 1, [p, w * q, w * q, -p])
    M = make_operation(2, 1, [0.0, -w / 2.0, w / 2.0, 0.0])
    return L, M


def _aux_values(theta, h):
    # ufunc form shared by the scalar API and the vectorized trajectory path
    r = math.sqrt(2.0) * (2.0 * h) ** 0.25
    ap = r * np.cos(0.5 * theta)
    am = r * np.sin(0.5 * theta)
    dp = 0.5 * ap * (ap * ap - 3.0 * am * am)
    dm = 0.5 * am * (3.0 * ap * ap - am * am)
    return ap, am, dp, dm


def _aux_from_theta(s: OscState, theta: float) -> AuxFunctions:
    ap, am, dp, dm = _aux_values(theta, hamiltonian(s))
    return AuxFunctions(float(ap), float(am), float(dp), float(dm), theta)


def principal_theta(s: OscState) -> float:
    """Phase angle atan2(omega*q, p) in (-pi, pi]; zero at the origin."""
    if s.q == 0.0 and s.p == 0.0:
        return 0.0
    return math.atan2(s.omega * s.q, s.p)


def aux_functions_principal(s: OscState) -> AuxFunctions:
    """Single-valued branch: A+ >= 0, theta in (-pi, pi].

    The half-angle construction A+/- = sqrt(2) (2H)^(1/4) (cos, sin)(theta/2)
    satisfies all three defining relations (sum of squares, difference of
    squares, product) and is the unique choice with A+ >= 0 on this range.
    At H = 0 everything is zero.
    """
    return _aux_from_theta(s, principal_theta(s))


def aux_functions_continuous(s: OscState, theta_unwrapped: float) -> AuxFunctions:
    """Branch-continuous evaluation at an unwrapped phase angle.

    theta_unwrapped must agree with atan2(omega*q, p) modulo 2*pi; no
    reduction to the principal range is applied, so consecutive sheets give
    opposite signs for all four phase functions.
    """
    if hamiltonian(s) > 0.0:
        delta = theta_unwrapped - principal_theta(s)
        if abs(delta - TWO_PI * round(delta / TWO_PI)) > 1e-9:
            raise ValueError(
                f"theta {theta_unwrapped!r} does not wrap onto the state's phase angle"
            )
    return _aux_from_theta(s, theta_unwrapped)


def _a_dots(omega, dq, dp, ap, am):
    # Cramer solution of  A+ dA+ - A- dA- = dp,  A- dA+ + A+ dA- = w dq;
    # the determinant A+^2 + A-^2 = 2 sqrt(2H) is positive away from H = 0.
    det = ap * ap + am * am
    da_p = (ap * dp + am * omega * dq) / det
    da_m = (ap * omega * dq - am * dp) / det
    return da_p, da_m


def _g_values(omega, dq, dp, ap, am, d_plus, d_minus):
    da_p, da_m = _a_dots(omega, dq, dp, ap, am)
    dd_p = 0.5 * da_p * (ap * ap - 3.0 * am * am) + ap * (ap * da_p - 3.0 * am * da_m)
    dd_m = 0.5 * da_m * (3.0 * ap * ap - am * am) + am * (3.0 * ap * da_p - am * da_m)
    return (
        da_p + 0.5 * omega * am,
        da_m - 0.5 * omega * ap,
        dd_p + 1.5 * omega * d_minus,
        dd_m - 1.5 * omega * d_plus,
    )


def g_functions(s: OscState, dq: float, dp: float) -> tuple:
    """The four linear-flow residuals for candidate time derivatives (dq, dp).

    Solves for dA+/dt, dA-/dt from the differentiated defining relations,
    chains to dD+/dt, dD-/dt, and returns

        (dA+ + (w/2) A-,  dA- - (w/2) A+,
         dD+ + (3w/2) D-, dD- - (3w/2) D+).

    All four vanish exactly when (dq, dp) are the canonical equations of
    motion; away from that they measure how far the candidate flow is from
    the oscillator flow.  Requires H > 0.
    """
    h = hamiltonian(s)
    if h <= 0.0:
        raise DegenerateStateError("phase functions have no derivatives at H = 0")
    aux = aux_functions_principal(s)
    out = _g_values(s.omega, dq, dp, aux.a_plus, aux.a_minus, aux.d_plus, aux.d_minus)
    return tuple(float(v) for v in out)


# One token per entry; p/m are the half-frequency G values, P/M the
# 3/2-frequency ones.  Zeros here are structural: they hold for any state.
_GAMMA_PATTERN = [
    "0 +p -p 0 0 +m -m 0",
    "0 +m -m 0 0 -p +p 0",
    "0 0 -p -m +p +m 0 0",
    "0 0 -m +p +m -p 0 0",
    "+m 0 -p 0 0 +m 0 -p",
    "+p 0 +m 0 0 +p 0 +m",
    "+M -P -P -M -P -M -M +P",
    "+P +M +M -P +M -P -P -M",
]


def _gamma_from_g(g: tuple) -> np.ndarray:
    lookup = {"p": g[0], "m": g[1], "P": g[2], "M": g[3]}
    out = np.zeros((8, 8))
    for a, row in enumerate(_GAMMA_PATTERN):
        for b, tok in enumerate(row.split()):
            if tok != "0":
                out[a, b] = lookup[tok[1]] * (1.0 if tok[0] == "+" else -1.0)
    return out


def gamma_structural_zeros() -> np.ndarray:
    """Boolean 8x8 mask of the entries that are zero for every state."""
    return np.array([[tok == "0" for tok in row.split()] for row in _GAMMA_PATTERN])


def gamma_matrix(s: OscState, dq: float, dp: float) -> GammaMatrix:
    """Assemble the 8x8 constraint matrix from the G values at (dq, dp)."""
    return GammaMatrix(_gamma_from_g(g_functions(s, dq, dp)))


def _family_coeffs(ap, am, dp, dm, c) -> np.ndarray:
    # structure constants in flat order (output index first, one-based labels
    # mu_111, mu_112, ..., mu_222); works elementwise on arrays as well
    c1, c2, c3, c4, c5, c6, c7, c8 = c
    return np.stack(
        [
            c5 * am + c6 * ap + c7 * dm + c8 * dp,
            c1 * ap + c2 * am - c7 * dp + c8 * dm,
            -c1 * ap - c2 * am - c3 * ap - c4 * am - c5 * ap + c6 * am - c7 * dp + c8 * dm,
            -c3 * am + c4 * ap - c7 * dm - c8 * dp,
            c3 * ap + c4 * am - c7 * dp + c8 * dm,
            c1 * am - c2 * ap + c3 * am - c4 * ap + c5 * am + c6 * ap - c7 * dm - c8 * dp,
            -c1 * am + c2 * ap - c7 * dm - c8 * dp,
            -c5 * ap + c6 * am + c7 * dp - c8 * dm,
        ],
        axis=-1,
    )


def mu_family(s: OscState, params: MuParams, aux: AuxFunctions | None = None) -> Operation:
    """Eight-parameter family of evolving binary multiplications on 2-dim V.

    Each structure constant is a fixed signed combination of the phase
    functions with the caller's C coefficients; the map C -> mu is linear.
    Uses the principal branch unless an AuxFunctions (e.g. an unwrapped
    continuous-branch evaluation) is supplied.
    """
    if aux is None:
        aux = aux_functions_principal(s)
    coeffs = _family_coeffs(aux.a_plus, aux.a_minus, aux.d_plus, aux.d_minus, params.c)
    return make_operation(2, 2, coeffs)


def proof_identity_residuals(s: OscState) -> tuple:
    """Raw residuals of the three determinant identities at a state.

    Returns (Delta - 2H, (D- p - D+ w q) - 2 A- H, (D+ p + D- w q) - 2 A+ H)
    with Delta the 2x2 Cramer determinant p^2 + (w q)^2, all on the principal
    branch.  Callers scale by 1 + H^(3/2) before comparing to a tolerance.
    """
    w, q, p = s.omega, s.q, s.p
    h = hamiltonian(s)
    aux = aux_functions_principal(s)
    delta = p * p + (w * q) * (w * q)
    r_delta = delta - 2.0 * h
    r_minus = (aux.d_minus * p - aux.d_plus * w * q) - 2.0 * aux.a_minus * h
    r_plus = (aux.d_plus * p + aux.d_minus * w * q) - 2.0 * aux.a_plus * h
    return (r_delta, r_minus, r_plus)


def random_state(
    rng: np.random.Generator,
    omega_range: tuple = (0.5, 2.0),
    h_range: tuple = (0.1, 10.0),
) -> OscState:
    """State with omega uniform in omega_range and energy uniform in h_range."""
    w = float(rng.uniform(*omega_range))
    h = float(rng.uniform(*h_range))
    theta = float(rng.uniform(-math.pi, math.pi))
    r = math.sqrt(2.0 * h)
    return OscState(w, r * math.sin(theta) / w, r * math.cos(theta))


def proof_identity_suite(trials: int, seed: int, tol: float) -> list:
    """Randomized verification of every pointwise identity behind the mu family.

    Residuals are magnitude-scaled before aggregation: the defining relations
    by 1 + sqrt(2H), the determinant identities by 1 + H^(3/2), and the G and
    Gamma checks by 1 + H.
    """
    names = [
        "aux-defining-relations",
        "aux-derivative-row1",
        "cramer-identities",
        "g-onshell",
        "gamma-onshell",
        "gamma-sparsity",
    ]
    worst = {n: (0.0, -1) for n in names}

    def note(name, value, k):
        if value >= worst[name][0]:
            worst[name] = (value, k)

    zero_mask = gamma_structural_zeros()
    for k in range(trials):
        rng = trial_rng(seed, k)
        s = random_state(rng)
        h = hamiltonian(s)
        aux = aux_functions_principal(s)
        sq2h = math.sqrt(2.0 * h)

        rel = max(
            abs(aux.a_plus ** 2 + aux.a_minus ** 2 - 2.0 * sq2h),
            abs(aux.a_plus ** 2 - aux.a_minus ** 2 - 2.0 * s.p),
            abs(aux.a_plus * aux.a_minus - s.omega * s.q),
        )
        note("aux-defining-relations", rel / (1.0 + sq2h), k)

        r_delta, r_minus, r_plus = proof_identity_residuals(s)
        note("cramer-identities", max(map(abs, (r_delta, r_minus, r_plus))) / (1.0 + h ** 1.5), k)

        g_on = g_functions(s, *hamilton_rhs(s))
        note("g-onshell", max(map(abs, g_on)) / (1.0 + h), k)
        note("gamma-onshell", float(np.max(np.abs(_gamma_from_g(g_on)))) / (1.0 + h), k)

        dq, dp = rng.uniform(-2.0, 2.0, size=2)
        da_p, da_m = _a_dots(s.omega, dq, dp, aux.a_plus, aux.a_minus)
        row1 = (aux.a_plus * da_p + aux.a_minus * da_m) - (
            s.p * dp + s.omega ** 2 * s.q * dq
        ) / sq2h
        note("aux-derivative-row1", abs(row1) / (1.0 + h), k)

        gamma_off = _gamma_from_g(g_functions(s, dq, dp))
        note("gamma-sparsity", float(np.max(np.abs(gamma_off[zero_mask]))), k)

    return [
        LawReport(name, trials, worst[name][0], worst[name][0] <= tol, worst[name][1])
        for name in names
    ]

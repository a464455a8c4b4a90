"""n-ary multilinear operations on a finite-dimensional real vector space.

An ``Operation`` of arity n on a d-dimensional space V is a multilinear map
V^n -> V stored as a dense rank-(n+1) coefficient tensor.  These objects are
the concrete carrier for everything else in the package: binary
multiplications, linear operators, and all of their compositions live here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError

__all__ = [
    "Operation",
    "make_operation",
    "identity_operation",
    "evaluate",
    "linear_combine",
    "operation_to_dict",
    "operation_from_dict",
]


@dataclass(frozen=True, eq=False)
class Operation:
    """A multilinear map f: V^arity -> V with dense coefficients.

    Coefficients are stored flat in row-major order over the index tuple
    (i, j1, ..., jn): the output index i is most significant, input indices
    follow left to right, all zero based.  The flat position of f^i_{j1...jn}
    is therefore ((i*d + j1)*d + j2)*d + ... for d = dim.  Human-facing labels
    (documentation, CSV headers) use one-based subscripts, so ``mu_111`` is
    the coefficient with i = j1 = j2 = 0.

    The reduced degree ``arity - 1`` drives every sign convention in the
    composition calculus.  Arity 0 is not representable: a nullary part is
    never needed here and keeping arity >= 1 simplifies the index algebra.
    """

    dim: int
    arity: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionMismatchError(f"dim must be >= 1, got {self.dim}")
        if self.arity < 1:
            raise DimensionMismatchError(f"arity must be >= 1, got {self.arity}")
        coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1)
        expected = self.dim ** (self.arity + 1)
        if coeffs.size != expected:
            raise DimensionMismatchError(
                f"need {expected} coefficients for dim={self.dim}, "
                f"arity={self.arity}, got {coeffs.size}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must all be finite")
        coeffs = coeffs.copy()
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def reduced_degree(self) -> int:
        return self.arity - 1

    @property
    def tensor(self) -> np.ndarray:
        """Coefficients reshaped to (d,)*(arity+1): axis 0 output, axes 1..n inputs."""
        return self.coeffs.reshape((self.dim,) * (self.arity + 1))

    def __repr__(self):
        return f"Operation(dim={self.dim}, arity={self.arity})"


def make_operation(dim: int, arity: int, coeffs) -> Operation:
    """Build an Operation from a flat coefficient array in the layout above."""
    return Operation(dim, arity, np.asarray(coeffs, dtype=float))


def identity_operation(dim: int) -> Operation:
    """The arity-1 unit: coefficient tensor is the d x d identity matrix."""
    return Operation(dim, 1, np.eye(dim).reshape(-1))


def _as_vector(x, dim: int) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (dim,):
        raise DimensionMismatchError(f"expected a vector of length {dim}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def evaluate(f: Operation, args) -> np.ndarray:
    """Apply f to a sequence of arity(f) vectors.

    result[i] = sum over j1..jn of f^i_{j1...jn} * args[0][j1] * ... * args[n-1][jn].
    """
    if len(args) != f.arity:
        raise DimensionMismatchError(f"operation of arity {f.arity} got {len(args)} arguments")
    res = f.tensor
    for a in args:
        res = np.tensordot(res, _as_vector(a, f.dim), axes=([1], [0]))
    return res


def linear_combine(a: float, f: Operation, b: float, g: Operation) -> Operation:
    """Coefficient-wise a*f + b*g; f and g must have equal dim and arity."""
    if (f.dim, f.arity) != (g.dim, g.arity):
        raise DimensionMismatchError(
            f"cannot combine (dim={f.dim}, arity={f.arity}) with (dim={g.dim}, arity={g.arity})"
        )
    return Operation(f.dim, f.arity, a * f.coeffs + b * g.coeffs)


def operation_to_dict(f: Operation) -> dict:
    """JSON-ready form: {"dim": d, "arity": n, "coeffs": [...]} in flat layout order."""
    return {"dim": f.dim, "arity": f.arity, "coeffs": [float(c) for c in f.coeffs]}


def operation_from_dict(obj: dict) -> Operation:
    try:
        dim, arity, coeffs = obj["dim"], obj["arity"], obj["coeffs"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"operation object needs dim/arity/coeffs: {exc}") from exc
    return make_operation(int(dim), int(arity), coeffs)

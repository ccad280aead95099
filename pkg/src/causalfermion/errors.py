"""Exception types raised across the package."""

from __future__ import annotations


class CausalFermionError(Exception):
    """Base class for all errors raised by this package."""


class NotHermitian(CausalFermionError, ValueError):
    pass


class TraceNotOne(CausalFermionError, ValueError):
    pass


class SignatureViolation(CausalFermionError, ValueError):
    def __init__(self, n_positive: int, n_negative: int, n: int):
        self.n_positive = n_positive
        self.n_negative = n_negative
        self.n = n
        super().__init__(
            f"operator has {n_positive} positive and {n_negative} negative "
            f"eigenvalues; spin dimension n={n} allows at most {n} of each"
        )


class TauBelowOne(CausalFermionError, ValueError):
    pass


class EigensolverFailure(CausalFermionError, RuntimeError):
    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        self.pair = pair
        if pair is not None:
            message = f"{message} (pair {pair})"
        super().__init__(message)


class DegenerateTrace(CausalFermionError, ValueError):
    """|Gamma_i| is too small to normalize the spectrum of point i."""

    def __init__(self, index: int, gamma: float):
        self.index = index
        self.gamma = gamma
        super().__init__(f"point {index}: spectral normalization {gamma:.3e} is degenerate")


class NonFinite(CausalFermionError, ValueError):
    pass


class UnsupportedSpin(CausalFermionError, ValueError):
    pass


class NotCausallyTrivial(CausalFermionError, ValueError):
    def __init__(self, offending: list[tuple[int, int]]):
        self.offending = offending
        super().__init__(f"{len(offending)} timelike pairs among distinct points, e.g. {offending[:3]}")


class DimensionTooSmall(CausalFermionError, ValueError):
    pass


class DegenerateImage(CausalFermionError, ValueError):
    pass


class NotSpinOne(CausalFermionError, ValueError):
    pass


class LineSearchFailure(CausalFermionError, RuntimeError):
    pass


class RescaleSingular(CausalFermionError, ValueError):
    pass

"""Sinusoid detection statistics on classical and standardized periodograms.

Every statistic has an array-level form operating along the last axis (used
by the Monte Carlo harness on stacks of trials) and a typed wrapper taking a
:class:`Periodogram`.  Each returns the statistic together with the grid
index k (1-based, as on the Fourier grid) of the ordinate it is built on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateInputError, InvalidInputError
from .periodogram import CLASSICAL, STANDARDIZED, Periodogram


class Kind(str, enum.Enum):
    FISHER = "fisher"
    ROBUST_FISHER = "robust_fisher"
    CHIU = "chiu"
    T_TILDE = "t_tilde"
    T_TILDE_FISHER = "t_tilde_fisher"
    T_TILDE_NC = "t_tilde_nc"

    @property
    def needs_n_c(self) -> bool:
        return self in (Kind.ROBUST_FISHER, Kind.CHIU, Kind.T_TILDE_NC)

    @property
    def standardized(self) -> bool:
        return self in (Kind.T_TILDE, Kind.T_TILDE_FISHER, Kind.T_TILDE_NC)

    @property
    def analytic(self) -> bool:
        return self in (Kind.T_TILDE, Kind.T_TILDE_NC)


@dataclass(frozen=True)
class TestKind:
    """A test statistic and, where it has one, its contamination count N_c."""

    __test__ = False  # not a pytest class

    kind: Kind
    n_c: Optional[int] = None

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind.needs_n_c:
            if self.n_c is None or int(self.n_c) != self.n_c or self.n_c < 1:
                raise InvalidInputError(f"{kind.value} needs an integer n_c >= 1, got {self.n_c}")
            object.__setattr__(self, "n_c", int(self.n_c))
        elif self.n_c is not None:
            raise InvalidInputError(f"{kind.value} takes no n_c")

    @property
    def label(self) -> str:
        return self.kind.value if self.n_c is None else f"{self.kind.value}:{self.n_c}"

    @classmethod
    def parse(cls, label: str) -> "TestKind":
        name, _, nc = label.partition(":")
        return cls(Kind(name), int(nc) if nc else None)

    def check(self, eta: int) -> None:
        """Validate n_c against a grid with ``eta`` ordinates."""
        if self.n_c is None:
            return
        hi = eta if self.kind is Kind.T_TILDE_NC else eta - 1
        if not 1 <= self.n_c <= hi:
            raise InvalidInputError(f"{self.label}: n_c must lie in [1, {hi}] for eta={eta}")

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class TestReport:
    __test__ = False

    kind: TestKind
    statistic: float
    threshold: float
    decision: str  # "H0" or "H1"
    argmax_index: int
    analytic_pfa: Optional[float] = None

    @property
    def detected(self) -> bool:
        return self.decision == "H1"


# -- array level -----------------------------------------------------------

def _descending_order(x: np.ndarray) -> np.ndarray:
    # stable sort on -x keeps lower indices first among ties
    return np.argsort(-x, axis=-1, kind="stable")


def _kth_largest(x: np.ndarray, k: int):
    order = _descending_order(x)
    idx = order[..., k - 1]
    return np.take_along_axis(x, idx[..., None], axis=-1)[..., 0], idx


def _sum_smallest(x: np.ndarray, n_c: int) -> np.ndarray:
    """Sum of all but the n_c largest ordinates."""
    m = x.shape[-1] - n_c
    return np.sort(x, axis=-1)[..., :m].sum(axis=-1)


def _guard(den, what):
    if np.any(~(den > 0)):
        raise DegenerateInputError(f"{what}: denominator is zero (all-zero periodogram?)")


def fisher_array(x):
    x = np.asarray(x, dtype=float)
    den = x.sum(axis=-1)
    _guard(den, "fisher")
    idx = np.argmax(x, axis=-1)
    return np.take_along_axis(x, idx[..., None], -1)[..., 0] / den, idx


def robust_fisher_constants(eta: int, n_c: int) -> tuple[float, float]:
    """(r, b_r) of the robust Fisher statistic for eta ordinates."""
    r = (eta - n_c) / eta
    b_r = 1.0 + (1.0 - r) * np.log1p(-r) / r
    return r, b_r


def robust_fisher_array(x, n_c: int):
    x = np.asarray(x, dtype=float)
    eta = x.shape[-1]
    r, b_r = robust_fisher_constants(eta, n_c)
    den = _sum_smallest(x, n_c)
    _guard(den, "robust_fisher")
    idx = np.argmax(x, axis=-1)
    top = np.take_along_axis(x, idx[..., None], -1)[..., 0]
    return b_r * eta * r * top / den, idx


def chiu_array(x, n_c: int):
    x = np.asarray(x, dtype=float)
    den = _sum_smallest(x, n_c)
    _guard(den, "chiu")
    top, idx = _kth_largest(x, n_c)
    return top / den, idx


def t_tilde_array(x):
    x = np.asarray(x, dtype=float)
    idx = np.argmax(x, axis=-1)
    return np.take_along_axis(x, idx[..., None], -1)[..., 0], idx


def t_tilde_fisher_array(x):
    return fisher_array(x)


def t_tilde_nc_array(x, n_c: int):
    return _kth_largest(np.asarray(x, dtype=float), n_c)


def statistic_array(test: TestKind, x):
    """Statistic and 0-based argmax position for ``test`` along the last axis."""
    k = test.kind
    if k is Kind.FISHER:
        return fisher_array(x)
    if k is Kind.ROBUST_FISHER:
        return robust_fisher_array(x, test.n_c)
    if k is Kind.CHIU:
        return chiu_array(x, test.n_c)
    if k is Kind.T_TILDE:
        return t_tilde_array(x)
    if k is Kind.T_TILDE_FISHER:
        return t_tilde_fisher_array(x)
    return t_tilde_nc_array(x, test.n_c)


# -- typed API ---------------------------------------------------------------

def order_statistics(p) -> np.ndarray:
    """Ascending copy of the ordinates (P_(1) <= ... <= P_(eta))."""
    x = p.ordinates if isinstance(p, Periodogram) else np.asarray(p, dtype=float)
    if x.size == 0:
        raise InvalidInputError("empty periodogram")
    return np.sort(x, kind="stable")


def _need(p: Periodogram, kind: str, what: str):
    if not isinstance(p, Periodogram) or p.kind != kind:
        got = p.kind if isinstance(p, Periodogram) else type(p).__name__
        raise InvalidInputError(f"{what} needs a {kind} periodogram, got {got}")


def _check_nc(n_c, hi, what):
    if int(n_c) != n_c or not 1 <= n_c <= hi:
        raise InvalidInputError(f"{what}: n_c must be an integer in [1, {hi}], got {n_c}")


def fisher_stat(p: Periodogram) -> float:
    _need(p, CLASSICAL, "fisher_stat")
    return float(fisher_array(p.ordinates)[0])


def robust_fisher_stat(p: Periodogram, n_c: int) -> float:
    _need(p, CLASSICAL, "robust_fisher_stat")
    _check_nc(n_c, len(p) - 1, "robust_fisher_stat")
    return float(robust_fisher_array(p.ordinates, int(n_c))[0])


def chiu_stat(p: Periodogram, n_c: int) -> float:
    _need(p, CLASSICAL, "chiu_stat")
    _check_nc(n_c, len(p) - 1, "chiu_stat")
    return float(chiu_array(p.ordinates, int(n_c))[0])


def t_tilde(p: Periodogram) -> float:
    _need(p, STANDARDIZED, "t_tilde")
    return float(p.ordinates.max())


def t_tilde_fisher(p: Periodogram) -> float:
    _need(p, STANDARDIZED, "t_tilde_fisher")
    return float(fisher_array(p.ordinates)[0])


def t_tilde_nc(p: Periodogram, n_c: int) -> float:
    _need(p, STANDARDIZED, "t_tilde_nc")
    _check_nc(n_c, len(p), "t_tilde_nc")
    return float(t_tilde_nc_array(p.ordinates, int(n_c))[0])


def evaluate(test: TestKind, p: Periodogram) -> tuple[float, int]:
    """Statistic of ``test`` on ``p`` and the grid index k it points at."""
    _need(p, STANDARDIZED if test.kind.standardized else CLASSICAL, test.label)
    test.check(len(p))
    stat, idx = statistic_array(test, p.ordinates)
    return float(stat), int(idx) + 1


def decide(test: TestKind, statistic: float, threshold: float, argmax: int,
           n_training: Optional[int] = None, eta: Optional[int] = None) -> TestReport:
    """Threshold decision (H1 iff statistic > threshold).

    For the two tests with a closed-form false-alarm law, pass ``n_training``
    and ``eta`` to attach the analytic P_FA of ``threshold``.
    """
    if not (np.isfinite(statistic) and np.isfinite(threshold)):
        raise InvalidInputError("statistic and threshold must be finite")
    pfa = None
    if test.kind.analytic and n_training is not None and eta is not None:
        from .performance import pfa_t_tilde, pfa_t_tilde_nc
        if test.kind is Kind.T_TILDE:
            pfa = pfa_t_tilde(threshold, n_training, eta)
        else:
            pfa = pfa_t_tilde_nc(threshold, n_training, eta, test.n_c)
    return TestReport(test, float(statistic), float(threshold),
                      "H1" if statistic > threshold else "H0", int(argmax), pfa)

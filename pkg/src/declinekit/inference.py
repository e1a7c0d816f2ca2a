"""Beta-binomial machinery for the probability that an exceedance rate fell.

For a candidate changepoint ``t_hat`` and size threshold ``m`` the events
before (and including) ``t_hat`` give a Beta(a, b) prior on the proportion
of events of size at least ``m``; the later events update it to
Beta(y + a, n - y + b). The probability of decline is the share of paired
draws in which the posterior value lies below the prior value.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate, special

from .data import SizedEventSet
from .errors import DataError, InvariantError

DEFAULT_DRAWS = 10_000

ROLE_PRIOR = 0
ROLE_POSTERIOR = 1
ROLE_PREDICTIVE = 2


@dataclass(frozen=True)
class PartitionCounts:
    a: int
    b: int
    y: int
    n_minus_y: int
    t_hat: int
    m: float

    @property
    def k(self) -> int:
        return self.a + self.b

    @property
    def n(self) -> int:
        return self.y + self.n_minus_y

    @property
    def prior(self) -> "BetaParams":
        return BetaParams(self.a, self.b)

    @property
    def posterior(self) -> "BetaParams":
        return BetaParams(self.y + self.a, self.n_minus_y + self.b)


@dataclass(frozen=True)
class BetaParams:
    """Beta shape parameters; a single zero shape denotes a point mass."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise DataError(f"Beta shapes must be finite and nonnegative, got ({self.alpha}, {self.beta})")
        if self.alpha == 0 and self.beta == 0:
            raise DataError("Beta(0, 0) is undefined")

    @property
    def point_mass(self) -> float | None:
        if self.beta == 0:
            return 1.0
        if self.alpha == 0:
            return 0.0
        return None

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def variance(self) -> float:
        s = self.alpha + self.beta
        return self.alpha * self.beta / (s * s * (s + 1))


@dataclass(frozen=True)
class DeclineEstimate:
    t_hat: int
    m: float
    pr_decline: float
    n_draws: int
    seed: int
    degenerate: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def derive_seed(seed: int, counts: PartitionCounts, role: int) -> np.random.SeedSequence:
    """Independent stream for one (changepoint, partition, role) cell.

    The stream depends only on the master seed, the changepoint year and
    the four counts. A grid therefore gives the same draws in any
    evaluation order, and rescaling sizes and thresholds together (which
    leaves the counts alone) leaves every estimate unchanged.
    """
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    words = [counts.t_hat & 0xFFFFFFFF, counts.a, counts.b, counts.y, counts.n_minus_y, role]
    return np.random.SeedSequence([int(seed), *(int(w) for w in words)])


def partition_counts(events: SizedEventSet, t_hat: int, m: float, threshold_kind: str | None = None) -> PartitionCounts:
    """Split events at ``t_hat`` (onset <= t_hat is "before") and at size ``m`` (inclusive).

    ``threshold_kind`` may be passed to assert the scale ``m`` is expressed in.
    """
    if threshold_kind is not None and threshold_kind != events.threshold_kind:
        raise DataError(f"threshold kind {threshold_kind!r} does not match event set ({events.threshold_kind!r})")
    if len(events) == 0:
        raise DataError("event set is empty")
    before = events.years <= t_hat
    big = events.exceeds(m)
    a = int(np.count_nonzero(before & big))
    y = int(np.count_nonzero(~before & big))
    k = int(np.count_nonzero(before))
    return PartitionCounts(a=a, b=k - a, y=y, n_minus_y=len(events) - k - y, t_hat=int(t_hat), m=float(m))


def sample_beta(params: BetaParams, n_draws: int, seed) -> np.ndarray:
    """Draw ``n_draws`` values from ``params``; ``seed`` is an int or SeedSequence."""
    if n_draws < 1:
        raise ValueError("n_draws must be at least 1")
    mass = params.point_mass
    if mass is not None:
        return np.full(n_draws, mass)
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.beta(params.alpha, params.beta, size=n_draws)


def probability_of_decline(counts: PartitionCounts, n_draws: int = DEFAULT_DRAWS, seed: int = 0) -> DeclineEstimate:
    """Monte Carlo estimate of P(theta_post < theta_prior).

    Prior and posterior draws come from separate streams derived from
    ``seed`` and the cell coordinates. Ties count as no decline.
    ``degenerate`` is set when either distribution is a point mass.

    Raises
    ------
    DataError
        If there are no events before the changepoint.
    """
    if counts.k == 0:
        raise DataError(f"no events at or before {counts.t_hat}; prior is undefined")
    prior, posterior = counts.prior, counts.posterior
    prior_draws = sample_beta(prior, n_draws, derive_seed(seed, counts, ROLE_PRIOR))
    post_draws = sample_beta(posterior, n_draws, derive_seed(seed, counts, ROLE_POSTERIOR))
    decline = np.count_nonzero(post_draws - prior_draws < 0)
    return DeclineEstimate(
        t_hat=counts.t_hat,
        m=counts.m,
        pr_decline=decline / n_draws,
        n_draws=n_draws,
        seed=seed,
        degenerate=prior.point_mass is not None or posterior.point_mass is not None,
    )


def _decline_integer(prior: BetaParams, posterior: BetaParams) -> float:
    # P(prior > posterior) as a finite sum over the prior's integer alpha
    a_post, b_post = posterior.alpha, posterior.beta
    a_pri, b_pri = prior.alpha, prior.beta
    i = np.arange(int(a_pri), dtype=np.float64)
    log_terms = (
        special.betaln(a_post + i, b_post + b_pri)
        - np.log(b_pri + i)
        - special.betaln(1 + i, b_pri)
        - special.betaln(a_post, b_post)
    )
    return float(np.exp(special.logsumexp(log_terms)))


_BREAK_LEVELS = np.array(
    [1e-12, 1e-9, 1e-6, 1e-4, 1e-3, 0.01, 0.05, 0.2, 0.5, 0.8, 0.95, 0.99, 1 - 1e-3, 1 - 1e-4, 1 - 1e-6, 1 - 1e-9, 1 - 1e-12]
)


def _decline_quadrature(prior: BetaParams, posterior: BetaParams) -> float:
    # E[F_post(X_prior)] with X_prior = Q_prior(u): a bounded integrand on [0, 1],
    # split where the posterior CDF moves so each piece is smooth
    def integrand(u):
        x = special.betaincinv(prior.alpha, prior.beta, u)
        if math.isnan(x):
            # betaincinv gives up for u within ~1e-100 of either end
            x = 0.0 if u < 0.5 else 1.0
        return special.betainc(posterior.alpha, posterior.beta, x)

    probes = special.betaincinv(posterior.alpha, posterior.beta, _BREAK_LEVELS)
    breaks = np.unique(np.clip(special.betainc(prior.alpha, prior.beta, probes), 0.0, 1.0))
    edges = [0.0, *(float(b) for b in breaks if 0.0 < b < 1.0), 1.0]
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(edges, edges[1:]):
            total += integrate.quad(integrand, lo, hi, limit=200, epsabs=1e-15, epsrel=1e-12)[0]
    return total


def exact_decline_probability(prior: BetaParams, posterior: BetaParams, method: str = "auto") -> float:
    """Deterministic P(theta_post < theta_prior) for independent Beta variables.

    ``method`` is ``"integer"`` (closed-form finite sum, integer prior
    alpha only), ``"quadrature"`` (adaptive integration of the posterior
    CDF over prior quantiles) or ``"auto"``.
    """
    if prior.point_mass is not None or posterior.point_mass is not None:
        raise DataError("exact_decline_probability requires strictly positive shapes")
    integer_ok = float(prior.alpha).is_integer() and prior.alpha <= 100_000
    if method == "auto":
        method = "integer" if integer_ok else "quadrature"
    if method == "integer":
        if not integer_ok:
            raise ValueError("integer method needs an integer prior alpha")
        value = _decline_integer(prior, posterior)
    elif method == "quadrature":
        value = _decline_quadrature(prior, posterior)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not math.isfinite(value):
        raise InvariantError(f"oracle failed for prior {prior} and posterior {posterior}")
    return min(1.0, max(0.0, value))

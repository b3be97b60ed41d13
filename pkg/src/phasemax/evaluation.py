"""Assessment protocol: association, correlation and Monte-Carlo RMS.

Separated sources come back in arbitrary order, scale and sign, so
before any error can be quoted the estimates have to be normalized to
unit magnitude, matched to the true sources by highest absolute
correlation, and sign-aligned to the source's own polarity.  Errors are
then reported per sample as RMS over many seeded noise realizations,
which is how the bundled noise-robustness experiment compares the
maximum method against the PCA baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidSpecError,
    ZeroSeriesError,
    ZeroVarianceError,
)
from .pca import pca_separate
from .separation import SeparationResult, separate_maximum
from .signals import (
    MultichannelSignal,
    NoiseSpec,
    PulseTrainSpec,
    add_noise,
    generate_sources,
    mix,
)


def normalize_unit(series) -> np.ndarray:
    """Rescale a series to unit sample norm (sum of squares = 1)."""
    x = np.asarray(series, dtype=float)
    n = np.sqrt(np.dot(x, x))
    if n == 0.0:
        raise ZeroSeriesError("cannot normalize an all-zero series")
    return x / n


def pearson(x, y) -> float:
    """Centered Pearson correlation coefficient of two equal-length series."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionMismatchError(f"series lengths differ: {x.shape} vs {y.shape}")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt(np.dot(xc, xc))
    sy = np.sqrt(np.dot(yc, yc))
    if sx == 0.0 or sy == 0.0:
        raise ZeroVarianceError("correlation undefined for a zero-variance series")
    return float(np.clip(np.dot(xc, yc) / (sx * sy), -1.0, 1.0))


@dataclass(frozen=True)
class AssociationReport:
    """Bijective source/estimate pairing with signed correlations.

    ``pairs`` holds ``(source_index, estimate_index, correlation)``
    triples with 0-based indices, sorted by source index, and each
    correlation equals ``correlation_matrix[source, estimate]``.
    """

    pairs: tuple
    correlation_matrix: np.ndarray


def associate(truth: MultichannelSignal, estimates: MultichannelSignal) -> AssociationReport:
    """Pair estimates with sources greedily by absolute correlation.

    The largest unmatched absolute correlation is paired first; exact
    ties go to the lowest (source, estimate) index pair.  Requires equal
    channel counts and nonzero variance everywhere.
    """
    if truth.n_channels != estimates.n_channels:
        raise DimensionMismatchError(
            f"{truth.n_channels} sources vs {estimates.n_channels} estimates"
        )
    n = truth.n_channels
    matrix = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            matrix[i, j] = pearson(truth.data[i], estimates.data[j])

    candidates = sorted(
        ((i, j) for i in range(n) for j in range(n)),
        key=lambda ij: (-abs(matrix[ij]), ij[0], ij[1]),
    )
    taken_sources: set = set()
    taken_estimates: set = set()
    pairs = []
    for i, j in candidates:
        if i in taken_sources or j in taken_estimates:
            continue
        pairs.append((i, j, float(matrix[i, j])))
        taken_sources.add(i)
        taken_estimates.add(j)
    pairs.sort(key=lambda p: p[0])
    return AssociationReport(tuple(pairs), matrix)


def cross_method_correlations(a: SeparationResult, b: SeparationResult) -> AssociationReport:
    """Associate the estimates of two separation results with each other."""
    if len(a.estimates) != len(b.estimates):
        raise DimensionMismatchError(
            f"results have {len(a.estimates)} and {len(b.estimates)} estimates"
        )
    return associate(
        MultichannelSignal(a.series_matrix), MultichannelSignal(b.series_matrix)
    )


@dataclass(frozen=True)
class MethodSpec:
    """One separation method entry in a Monte-Carlo comparison.

    ``name`` is ``"maximum"`` or ``"pca"``.  ``whitening``/``order``
    apply to the maximum method, ``centered`` to the PCA baseline.
    """

    name: str
    whitening: str = "gram_schmidt"
    order: tuple | None = None
    centered: bool = False

    def __post_init__(self):
        if self.name not in ("maximum", "pca"):
            raise InvalidSpecError(f"unknown method {self.name!r}")

    @property
    def label(self) -> str:
        if self.name == "maximum":
            return f"maximum-{self.whitening.replace('_', '')}"
        return "pca-centered" if self.centered else "pca"

    def run(self, signal: MultichannelSignal) -> SeparationResult:
        if self.name == "maximum":
            return separate_maximum(signal, whitening=self.whitening, order=self.order)
        return pca_separate(signal, centered=self.centered)


@dataclass(frozen=True)
class MonteCarloConfig:
    """Everything a noise-robustness sweep needs to be reproducible."""

    fixture: PulseTrainSpec
    noise_sds: tuple
    n_runs: int
    base_seed: int
    methods: tuple
    mixing: np.ndarray | None = None  # None mixes with the identity

    def __post_init__(self):
        if self.n_runs < 1:
            raise InvalidSpecError(f"n_runs must be >= 1, got {self.n_runs}")
        for sd in self.noise_sds:
            if sd < 0:
                raise InvalidSpecError(f"noise sd must be >= 0, got {sd}")
        if len(self.methods) < 1:
            raise InvalidSpecError("at least one method is required")


@dataclass(frozen=True)
class RmsReport:
    """Per-sample RMS estimation error for each source, one method+sd."""

    method: str
    noise_sd: float
    n_runs: int
    rms: np.ndarray  # (n_sources, n_samples)


def monte_carlo_rms(cfg: MonteCarloConfig) -> list:
    """Run the seeded Monte-Carlo error sweep.

    For every run r: regenerate the fixture, mix, add noise seeded with
    ``base_seed + r``, separate with each method, normalize truth and
    estimates to unit magnitude, associate, flip negatively correlated
    estimates, and accumulate squared per-sample errors.  The RMS over
    runs is reported per (method, noise sd, source).  Accumulation is a
    plain sum of squares in fixed run order, so repeated invocations
    are bitwise identical.
    """
    sources = generate_sources(cfg.fixture)
    truth = np.vstack([normalize_unit(ch) for ch in sources.data])
    clean = sources if cfg.mixing is None else mix(sources, cfg.mixing)
    n, m = sources.data.shape

    reports = []
    for sd in cfg.noise_sds:
        sums = {spec.label: np.zeros((n, m)) for spec in cfg.methods}
        for run in range(cfg.n_runs):
            noisy = add_noise(clean, NoiseSpec(sd, cfg.base_seed + run))
            for spec in cfg.methods:
                result = spec.run(noisy)
                est = MultichannelSignal(
                    np.vstack([normalize_unit(e.series) for e in result.estimates])
                )
                report = associate(sources, est)
                for i, j, rho in report.pairs:
                    aligned = est.data[j] if rho >= 0 else -est.data[j]
                    sums[spec.label][i] += (aligned - truth[i]) ** 2
        for spec in cfg.methods:
            reports.append(
                RmsReport(spec.label, sd, cfg.n_runs, np.sqrt(sums[spec.label] / cfg.n_runs))
            )
    return reports

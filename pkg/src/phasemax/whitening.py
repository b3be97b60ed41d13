"""Whitening: linear maps that make the channels orthonormal.

Uncorrelated sources generally map to non-orthogonal directions in the
phase trajectory of a mixture, which is what contaminates projection
estimates.  Whitening fixes that: after an invertible transform that
makes the channels orthonormal under the sample inner product
``<x, y> = sum_n x[n] y[n]``, directions of sources with zero sample
cross-product become exactly orthogonal, and projections recover each
source to a scaling constant.

Two backends are provided:

* ``gram_schmidt`` - modified Gram-Schmidt over the channels in a
  configurable order; the first output channel is the first input
  channel rescaled to unit norm.
* ``pca`` - project onto the eigenvectors of the uncentered second
  moment matrix and rescale each component series to unit norm.

The inner product uses raw sums (no 1/M factor); only orthogonality and
relative scale matter downstream.  No centering happens here: centering
is a separate, deliberate step because it shifts baselines and can make
otherwise uncorrelated sources correlated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidSpecError
from .numerics import gram_schmidt_orthonormal, symmetric_eig
from .signals import MultichannelSignal

METHODS = ("none", "gram_schmidt", "pca")


@dataclass(frozen=True)
class WhiteningTransform:
    """Invertible N x N map that produced a set of whitened channels.

    ``forward @ data`` reproduces the whitened channels from the raw
    ones.  ``channel_order`` records the (1-based) channel order used by
    the Gram-Schmidt backend and is None otherwise.
    """

    method: str
    forward: np.ndarray
    channel_order: tuple | None = None

    @classmethod
    def identity(cls, n_channels: int) -> "WhiteningTransform":
        return cls("none", np.eye(n_channels), None)

    def apply(self, signal: MultichannelSignal) -> MultichannelSignal:
        return MultichannelSignal(self.forward @ signal.data)

    def map_direction(self, v) -> np.ndarray:
        """Image of a raw-space direction under the transform."""
        return self.forward @ np.asarray(v, dtype=float)


def _validated_order(order, n):
    if order is None:
        return tuple(range(1, n + 1))
    order = tuple(int(i) for i in order)
    if sorted(order) != list(range(1, n + 1)):
        raise InvalidSpecError(
            f"channel order must be a permutation of 1..{n}, got {order}"
        )
    return order


def whiten_gram_schmidt(signal: MultichannelSignal, order=None):
    """Orthonormalize the channels by modified Gram-Schmidt.

    Parameters
    ----------
    signal : MultichannelSignal
        Input whose channels are linearly independent as M-vectors.
    order : sequence of int, optional
        1-based channel order; the first listed channel becomes the
        first whitened channel (rescaled only).  Defaults to natural
        order 1..N.

    Returns
    -------
    (MultichannelSignal, WhiteningTransform)
        Whitened channels e_1..e_N plus the recorded transform.

    Raises
    ------
    DegenerateInputError
        If the channels are rank deficient.
    """
    n = signal.n_channels
    order = _validated_order(order, n)
    rows = signal.data[[i - 1 for i in order], :]
    basis, coeffs = gram_schmidt_orthonormal(rows)
    # rows == coeffs @ basis, so the whitened channels are
    # coeffs^-1 @ P @ data with P the order permutation.
    perm = np.zeros((n, n))
    for k, i in enumerate(order):
        perm[k, i - 1] = 1.0
    forward = np.linalg.solve(coeffs, perm)
    return MultichannelSignal(basis), WhiteningTransform("gram_schmidt", forward, order)


def whiten_pca(signal: MultichannelSignal):
    """Whiten via eigenanalysis of the uncentered second moment matrix.

    Each output channel is the projection of the data onto one
    eigenvector, rescaled to unit sample norm.  Ordered by descending
    eigenvalue.

    Raises
    ------
    DegenerateInputError
        If the second moment matrix is numerically rank deficient.
    """
    data = signal.data
    m = signal.n_samples
    moment = data @ data.T / m
    eig = symmetric_eig(0.5 * (moment + moment.T))
    if eig.eigenvalues[0] <= 0.0 or eig.eigenvalues[-1] <= 1e-12 * eig.eigenvalues[0]:
        raise DegenerateInputError("second moment matrix is rank deficient")
    components = eig.eigenvectors.T @ data
    norms = np.sqrt((components**2).sum(axis=1))
    if np.any(norms == 0.0):
        raise DegenerateInputError("a principal component series is identically zero")
    forward = eig.eigenvectors.T / norms[:, np.newaxis]
    return MultichannelSignal(components / norms[:, np.newaxis]), WhiteningTransform(
        "pca", forward, None
    )


def apply_whitening(signal: MultichannelSignal, method: str, order=None):
    """Dispatch on method name; returns (whitened signal, transform)."""
    if method == "none":
        return signal, WhiteningTransform.identity(signal.n_channels)
    if method == "gram_schmidt":
        return whiten_gram_schmidt(signal, order)
    if method == "pca":
        return whiten_pca(signal)
    raise InvalidSpecError(f"unknown whitening method {method!r}; expected one of {METHODS}")

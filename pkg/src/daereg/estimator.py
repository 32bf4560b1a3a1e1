"""Scikit-learn style front end for the regularization loop."""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .transform import (Status, apply_col_transform, apply_row_transform,
                        regularize, retrieval_system)
from .validation import check_dae


class Regularizer(TransformerMixin, BaseEstimator):
    """Learn the operator transforms that make a DAE 1CM-regular.

    ``fit`` runs the loop and keeps the row/column operators; ``transform``
    replays them on a DAE with the same unknowns (for the fitted DAE this
    is the regularized system, or the retrieval system when
    ``retrieval=True``).
    """

    def __init__(self, max_iters=None, probe=False, seed=0, retrieval=False):
        self.max_iters = max_iters
        self.probe = probe
        self.seed = seed
        self.retrieval = retrieval

    def fit(self, X, y=None):
        dae = check_dae(X)
        if self.max_iters is not None and int(self.max_iters) < 0:
            raise ValueError("max_iters must be nonnegative")
        res = regularize(dae, max_iters=self.max_iters, probe=self.probe, seed=self.seed)
        self.result_ = res
        self.status_ = res.status
        self.delta_hat_ = res.delta_hats
        self.n_iter_ = res.iterations
        self.steps_ = [(t.pair.U, t.p, t.pair.V, t.q) for t in res.trace if t.pair is not None]
        self.n_features_in_ = dae.n
        return self

    def transform(self, X):
        check_is_fitted(self, "result_")
        dae = check_dae(X)
        if dae.n != self.n_features_in_:
            raise ValueError(f"fitted on {self.n_features_in_} unknowns, got {dae.n}")
        original = dae
        for it, (U, p, V, q) in enumerate(self.steps_, start=1):
            dae = apply_row_transform(dae, U, p)
            dae = apply_col_transform(dae, V, q, tuple(f"y{it}_{j + 1}" for j in range(dae.n)))
        if not self.retrieval:
            return dae
        if self.status_ is not Status.REGULARIZED:
            raise ValueError(f"no retrieval system for status {self.status_.value}")
        replay = type(self.result_)(self.status_, dae, original,
                                    v_chain=[(V, q) for _, _, V, q in self.steps_])
        return retrieval_system(replay, original)

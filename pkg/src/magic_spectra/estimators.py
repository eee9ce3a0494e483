"""scikit-learn style facade over the spectral pipeline."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import ParameterError, ValidationError
from .imps import ImpsState
from .spectra import sre_report

FEATURES = ("m_n", "xi", "xi_sre", "W_inf", "L_inf", "I_inf")
SOURCES = ("chi2", "chi4", "file")


def check_replica_order(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise ParameterError(f"replica order must be an integer >= 2, got {n!r}")
    return int(n)


def check_parameter_grid(X) -> np.ndarray:
    """Accept a scalar, 1-D array or single-column 2-D array of finite reals."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValidationError(f"expected one parameter column, got {arr.shape[1]}")
        arr = arr[:, 0]
    arr = np.atleast_1d(arr)
    if arr.ndim != 1:
        raise ValidationError("parameter grid must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("parameter grid contains NaN or Inf")
    return arr


def check_state(state) -> ImpsState:
    if not isinstance(state, ImpsState):
        raise ValidationError(f"expected ImpsState, got {type(state).__name__}")
    if state.d != 2:
        raise ValidationError("SRE pipeline needs qubit states (d=2)")
    return state


class SreSpectrumEstimator(TransformerMixin, BaseEstimator):
    """Maps skeleton parameters (g or mu) to SRE report features.

    ``transform`` returns one row per parameter with columns FEATURES. With
    ``source="file"`` the state is read once in ``fit`` and every row of X
    gets the same report.
    """

    def __init__(self, source="chi2", n=2, chi_t=None, k=None, file=None):
        self.source = source
        self.n = n
        self.chi_t = chi_t
        self.k = k
        self.file = file

    def fit(self, X=None, y=None):
        if self.source not in SOURCES:
            raise ParameterError(f"source must be one of {SOURCES}")
        self.n_ = check_replica_order(self.n)
        if self.chi_t is not None and self.chi_t < 1:
            raise ParameterError("chi_t must be positive")
        self.state_ = None
        if self.source == "file":
            from .io import read_mps

            if not self.file:
                raise ParameterError("source='file' needs file")
            self.state_ = check_state(read_mps(self.file))
        if X is not None:
            self.n_features_in_ = 1
            check_parameter_grid(X)
        return self

    def _state(self, x):
        from .skeleton import chi2_tensors, chi4_tensors

        if self.state_ is not None:
            return self.state_
        return chi2_tensors(x) if self.source == "chi2" else chi4_tensors(x)

    def report(self, x):
        check_is_fitted(self, "n_")
        return sre_report(self._state(x), self.n_, self.chi_t, self.k)

    def transform(self, X):
        check_is_fitted(self, "n_")
        xs = check_parameter_grid(X)
        out = np.empty((xs.size, len(FEATURES)))
        for i, x in enumerate(xs):
            row = self.report(x).as_row()
            out[i] = [row[f] for f in FEATURES]
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(FEATURES, dtype=object)

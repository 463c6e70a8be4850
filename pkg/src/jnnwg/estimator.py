"""scikit-learn style wrapper around the hopping designer.

Only the dispersion design step fits the estimator shape: hyperparameters
in ``__init__``, ``fit`` solves for the hoppings, ``predict`` evaluates the
band on momenta. Dynamics and scenarios stay plain functions.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .dispersion import DispersionTarget, group_velocity, omega_of_k, solve_target


class DispersionDesigner(BaseEstimator):
    """Design J-th nearest-neighbour hoppings for a target band.

    Parameters
    ----------
    kind : str
        ``chiral_linear``, ``symmetric_linear``, ``quadratic``, ``cubic`` or ``polynomial``.
    J : int
        Longest hopping range.
    coefficient : float, optional
        v_g, q_g or c_g; 1 when omitted.
    coefficients : sequence of float, optional
        Polynomial coefficients alpha_0..alpha_n (polynomial kind only).
    omega0 : float
        Band centre.
    """

    def __init__(self, kind="chiral_linear", J=5, coefficient=None, coefficients=None, omega0=0.0):
        self.kind = kind
        self.J = J
        self.coefficient = coefficient
        self.coefficients = coefficients
        self.omega0 = omega0

    def fit(self, X=None, y=None):
        """Solve the design; X and y are accepted for pipeline compatibility and ignored."""
        coeffs = None if self.coefficients is None else tuple(self.coefficients)
        self.target_ = DispersionTarget(self.kind, self.coefficient, coeffs, float(self.omega0))
        self.hoppings_ = solve_target(int(self.J), self.target_)
        self.amplitudes_ = self.hoppings_.amplitudes
        self.phases_ = self.hoppings_.phases
        return self

    @staticmethod
    def _momenta(X) -> np.ndarray:
        X = check_array(np.asarray(X, dtype=float).reshape(-1, 1) if np.ndim(X) <= 1 else X)
        if X.shape[1] != 1:
            raise ValueError(f"expected a single momentum column, got {X.shape[1]}")
        return X[:, 0]

    def predict(self, X) -> np.ndarray:
        """Band frequency omega(k) at each momentum in X (shape (n,) or (n, 1))."""
        check_is_fitted(self, "hoppings_")
        return omega_of_k(self.hoppings_, self._momenta(X))

    def group_velocity(self, X) -> np.ndarray:
        check_is_fitted(self, "hoppings_")
        return group_velocity(self.hoppings_, self._momenta(X))

    def score(self, X, y=None) -> float:
        """Negative max deviation from the target curve over X (higher is better)."""
        k = self._momenta(X)
        ref = self.target_.evaluate(k) if y is None else np.asarray(y, dtype=float).ravel()
        return -float(np.max(np.abs(self.predict(k) - ref)))

"""Estimator-style wrappers: ``fit`` / ``transform`` / ``get_params`` over growth tables."""

from collections.abc import Mapping

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .assembly import synthesize
from .growth import GrowthFunction, check_bgd
from .normalize import normalize_bgd, suplinear_report


def check_growth(X, min_horizon=2):
    """Coerce ``X`` to a :class:`GrowthFunction` and check its horizon.

    Accepts a GrowthFunction, a JSON-style mapping, or any 1-d sequence of
    integers (floats with integral values are accepted, others are not).
    """
    if isinstance(X, GrowthFunction):
        v = X
    elif isinstance(X, Mapping):
        v = GrowthFunction.from_dict(X)
    else:
        try:
            seq = list(X)
        except TypeError:
            raise TypeError(f"expected a sequence of integers, got {type(X).__name__}") from None
        vals = []
        for x in seq:
            if hasattr(x, "__len__"):
                raise ValueError("expected a 1-d sequence")
            if isinstance(x, float):
                if not x.is_integer():
                    raise ValueError(f"non-integral value {x}")
                x = int(x)
            vals.append(int(x))
        v = GrowthFunction(tuple(vals))
    if v.horizon < min_horizon:
        raise ValueError(f"horizon {v.horizon} < {min_horizon}")
    return v


class BgdNormalizer(TransformerMixin, BaseEstimator):
    """Map a bgd table to a representative a binary tree can realise exactly."""

    def __init__(self, L=None, a_max=1000):
        self.L = L
        self.a_max = a_max

    def fit(self, X, y=None):
        v = check_growth(X)
        self.L_ = self.L if self.L is not None else check_bgd(v).L
        self.report_ = normalize_bgd(v, self.L_, a_max=self.a_max)
        self.input_ = v
        return self

    def transform(self, X):
        check_is_fitted(self, "report_")
        v = check_growth(X)
        if v == self.input_:
            return self.report_.output
        return normalize_bgd(v, self.L_, a_max=self.a_max).output


class SuplinearRepresentative(TransformerMixin, BaseEstimator):
    """``floor(convex minorant) + v`` with a patched prefix."""

    def __init__(self, L=None, threshold=None):
        self.L = L
        self.threshold = threshold

    def fit(self, X, y=None):
        v = check_growth(X)
        self.L_ = self.L if self.L is not None else check_bgd(v).L
        self.report_ = suplinear_report(v, self.L_, self.threshold)
        self.input_ = v
        return self

    def transform(self, X):
        check_is_fitted(self, "report_")
        v = check_growth(X)
        if v == self.input_:
            return self.report_.output
        return suplinear_report(v, self.L_, self.threshold).output


class GrowthSynthesizer(TransformerMixin, BaseEstimator):
    """Run the whole synthesis pipeline; ``transform`` returns the discrete growth ``z``."""

    def __init__(self, params=None, mode="infinite", seed=0, a_max=1000, doubling=False):
        self.params = params
        self.mode = mode
        self.seed = seed
        self.a_max = a_max
        self.doubling = doubling

    def fit(self, X, y=None):
        if self.params is None:
            raise ValueError("GrowthSynthesizer needs catalog params")
        v = check_growth(X)
        self.result_ = synthesize(
            v, self.params, self.mode, self.seed, a_max=self.a_max, doubling=self.doubling
        )
        self.witness_ = self.result_.witness
        return self

    def transform(self, X):
        check_is_fitted(self, "result_")
        v = check_growth(X)
        if v == self.result_.input:
            return self.result_.growth.z
        return synthesize(
            v, self.params, self.mode, self.seed, a_max=self.a_max, doubling=self.doubling
        ).growth.z

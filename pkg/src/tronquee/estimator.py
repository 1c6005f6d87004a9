"""Estimator-style wrapper: ``fit`` builds the seed, ``predict`` integrates to points."""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .dynamics import jacobian_limit
from .experiments import _Runner, _auto_radius, _seed, build_tronquee, seed_table, GridSpec
from .integrate import concat, make_arc, make_ray
from .model import Polar, make_equation, branch as make_branch, sector as make_sector


class TronqueeSolution(BaseEstimator):
    """The tronquee solution of one branch in one existence sector.

    Parameters mirror the command line: ``params`` is a mapping of parameter
    names to exact strings or numbers.  ``fit`` ignores its arguments apart
    from validation and prepares the seed; ``predict`` returns u (and
    optionally U) at complex points of the sector.
    """

    def __init__(self, family: str = "p3i", m: int = 0, params: Optional[dict] = None,
                 k: int = 0, R0: Optional[float] = None, N: Optional[int] = None,
                 tol: float = 1e-10, engine: str = "hp", table_order: int = 80):
        self.family = family
        self.m = m
        self.params = params
        self.k = k
        self.R0 = R0
        self.N = N
        self.tol = tol
        self.engine = engine
        self.table_order = table_order

    def fit(self, X=None, y=None):
        eq = make_equation(self.family, dict(self.params or {}))
        br = make_branch(eq, self.m)
        sec = make_sector(eq, self.m, self.k)
        table = seed_table(eq, br, order=self.table_order)
        R0 = _auto_radius(table, self.R0 if self.R0 is not None else max(10.0, 2 * sec.r_min))
        anchor = Polar(R0, sec.bisector)
        u0, U0, n_seed, err = _seed(table, anchor, self.N)
        self.equation_, self.branch_, self.sector_, self.table_ = eq, br, sec, table
        self.anchor_, self.seed_ = anchor, (u0, U0)
        self.seed_order_, self.seed_error_ = n_seed, err
        self.eigenvalues_ = jacobian_limit(br, eq).closed_form
        return self

    def _lift(self, z: complex) -> Polar:
        p = Polar.from_complex(complex(z), near=self.sector_.bisector)
        if not self.sector_.theta_lo < p.theta < self.sector_.theta_hi:
            raise ValueError(f"{z} is outside the existence sector")
        return p

    def predict(self, X, return_U: bool = False):
        check_is_fitted(self, "seed_")
        pts = np.atleast_1d(np.asarray(X, dtype=complex)).ravel()
        runner = _Runner(self.equation_, self.eigenvalues_[0], self.tol, self.engine)
        R0, th0 = self.anchor_
        u = np.empty(len(pts), dtype=complex)
        U = np.empty(len(pts), dtype=complex)
        for i, z in enumerate(pts):
            p = self._lift(z)
            legs = []
            if p.theta != th0:
                legs.append(make_arc(R0, th0, p.theta))
            if p.r != R0:
                legs.append(make_ray(p.theta, R0, p.r))
            if not legs:
                u[i], U[i] = complex(self.seed_[0]), complex(self.seed_[1])
                continue
            ends = runner.run(concat(*legs), *self.seed_)
            if len(ends) < len(legs):
                u[i] = U[i] = complex("nan")
            else:
                u[i], U[i] = complex(ends[-1][0]), complex(ends[-1][1])
        return (u, U) if return_U else u

    def patch(self, grid: Optional[GridSpec] = None):
        """The full grid patch at the fitted seeding radius."""
        check_is_fitted(self, "seed_")
        return build_tronquee(self.equation_, self.branch_, self.sector_, self.anchor_.r,
                              self.N, grid, self.tol, self.engine, self.table_)

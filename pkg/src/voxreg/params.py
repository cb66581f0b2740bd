"""Pipeline configuration.

Every length scale in the pipeline is tied to the voxel size ``v``:
the normal-estimation radius, the descriptor radius, and the noise
bound used by both the correspondence-graph test and the solver all
default to fixed multiples of ``v``. Tuning one number retunes the
whole pipeline for a new sensor or scene scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import RegistrationError


@dataclass(frozen=True)
class GncSettings:
    """Knobs for the graduated non-convexity solver.

    ``noise_bound`` is the residual scale below which a correspondence
    is considered consistent with the candidate transform. ``mu_update``
    controls how quickly the surrogate cost anneals toward a hard
    truncated loss.
    """

    noise_bound: float
    max_iterations: int = 100
    mu_update: float = 1.4
    weight_tolerance: float = 1e-6
    cost_tolerance: float = 1e-6

    def __post_init__(self):
        if self.noise_bound <= 0.0:
            raise RegistrationError("noise_bound must be positive")
        if self.max_iterations < 1:
            raise RegistrationError("max_iterations must be at least 1")
        if self.mu_update <= 1.0:
            raise RegistrationError("mu_update must exceed 1")
        if self.weight_tolerance <= 0.0 or self.cost_tolerance <= 0.0:
            raise RegistrationError("convergence tolerances must be positive")


@dataclass(frozen=True)
class Params:
    """Registration parameters, all derived from the voxel size ``v``.

    Derived defaults:
      * ``r_normal = 3.5 * v``  neighborhood for normal estimation
      * ``r_fpfh   = 5.0 * v``  neighborhood for descriptor histograms
      * ``beta     = 1.5 * v``  noise bound for pruning and solving
    """

    v: float
    r_normal: float = field(default=None)  # type: ignore[assignment]
    r_fpfh: float = field(default=None)  # type: ignore[assignment]
    beta: float = field(default=None)  # type: ignore[assignment]
    tau_num: int = 3
    tau_lin: float = 0.99
    n_tau: int = 3000
    histogram_bins: int = 11
    tau_valid: int = 5
    suppress_dominant_plane: bool = False
    min_plane_fraction: float = 0.2
    seed: int = 0
    gnc: GncSettings = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.v <= 0.0:
            raise RegistrationError("voxel size must be positive")
        if self.r_normal is None:
            object.__setattr__(self, "r_normal", 3.5 * self.v)
        if self.r_fpfh is None:
            object.__setattr__(self, "r_fpfh", 5.0 * self.v)
        if self.beta is None:
            object.__setattr__(self, "beta", 1.5 * self.v)
        if self.gnc is None:
            object.__setattr__(self, "gnc", GncSettings(noise_bound=self.beta))
        if self.r_normal <= 0.0 or self.r_fpfh <= 0.0:
            raise RegistrationError("search radii must be positive")
        if self.r_normal > self.r_fpfh:
            raise RegistrationError(
                "r_normal must not exceed r_fpfh: normal-estimation "
                "neighborhoods are carved out of the descriptor search"
            )
        if self.beta <= 0.0:
            raise RegistrationError("beta must be positive")
        if self.tau_num < 3:
            raise RegistrationError("tau_num must be at least 3")
        if not (0.0 < self.tau_lin <= 1.0):
            raise RegistrationError("tau_lin must lie in (0, 1]")
        if self.n_tau < 1:
            raise RegistrationError("n_tau must be at least 1")
        if self.histogram_bins < 2:
            raise RegistrationError("histogram_bins must be at least 2")
        if self.tau_valid < 1:
            raise RegistrationError("tau_valid must be at least 1")
        if not (0.0 < self.min_plane_fraction < 1.0):
            raise RegistrationError("min_plane_fraction must lie in (0, 1)")

    def with_overrides(self, **kwargs) -> Params:
        return replace(self, **kwargs)

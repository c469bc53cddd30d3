"""CT-CFAR radar detection: simulation, noise estimation, detectors and evaluation."""

from ._ctcfar import (
    CtcfarError,
    GammaNoiseModel,
    RadarParams,
    Scenario,
    Target,
    alpha_from_pfa,
    detect,
    detectors,
    estimate_noise,
    invert_gamma_cdf,
    monte_carlo,
    nca,
    random_scenario,
    rd_transform,
    read_cube,
    simulate,
    truncation_gain,
    truth_bins,
    window_statistic,
    write_cube,
)

__all__ = [
    "CtcfarError",
    "GammaNoiseModel",
    "RadarParams",
    "Scenario",
    "Target",
    "alpha_from_pfa",
    "detect",
    "detectors",
    "estimate_noise",
    "invert_gamma_cdf",
    "monte_carlo",
    "nca",
    "random_scenario",
    "rd_transform",
    "read_cube",
    "simulate",
    "truncation_gain",
    "truth_bins",
    "window_statistic",
    "write_cube",
]

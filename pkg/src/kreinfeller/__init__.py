"""Numerical toolkit for Krein-Feller operators of fractal measures.

Submodules:

* :mod:`kreinfeller.ifs` -- iterated function systems and atomic invariant
  measure approximations;
* :mod:`kreinfeller.dimension` -- L-infinity dimension estimation and the
  compactness condition checks;
* :mod:`kreinfeller.geometry` -- constant-curvature model spaces, hinge
  formulas, cone annuli, and chart pushforwards;
* :mod:`kreinfeller.embedding` -- compact-embedding criteria and Poincare
  probes;
* :mod:`kreinfeller.galerkin` -- Galerkin assembly, Dirichlet spectra of the
  measure Laplacian, and the vibrating-string oracle;
* :mod:`kreinfeller.cli` -- the command-line pipeline.
"""

from . import dimension, embedding, errors, galerkin, geometry, ifs
from .dimension import (
    BallProfile,
    ConditionReport,
    DimensionEstimate,
    RadiusLadder,
    ball_profile,
    check_conditions,
    compactness_threshold,
    estimate_linf_dim,
    selfsimilar_dim_bounds,
)
from .embedding import (
    MazjaReport,
    PoincareProbe,
    embedding_verdict,
    mazja_small_scale,
    mazja_tail,
    poincare_probe_line,
)
from .galerkin import (
    GalerkinSystem,
    Mesh,
    Spectrum,
    assemble_measure_mass,
    assemble_stiffness,
    build_mesh,
    build_system,
    discrete_string_oracle,
    solve_poisson,
    solve_spectrum,
    weyl_counting,
)
from .geometry import (
    ChartMap,
    ConeAnnulus,
    HyperbolicSurface,
    ModelSpace,
    SphereSurface,
    annulus_chord,
    annulus_chord_bracket,
    chart_pushforward,
    cone_annulus_contains,
    hinge_third_side,
    inclusion_probe,
    model_exp,
    model_log,
)
from .ifs import (
    Conformal1D,
    IFSystem,
    MeasureApprox,
    Similitude,
    attractor_cover,
    ball_mass,
    cantor_system,
    compose_word,
    discretize,
    pushforward,
)

__version__ = "0.1.0"

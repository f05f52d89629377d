"""Point process learning: thinning-based cross-validation and innovation losses."""
from .cv import CvScheme, CvSplit, mccv_splits, multinomial_splits, nested_triples
from .geometry import (UNIT_SQUARE, Point, PointPattern, QuadratureGrid, Window, distance,
                       integrate_on_window, min_pairwise_distance, uncovered_area)
from .innovations import (Constant, CoordPower, ConstantIntensity, HardCorePapangelou,
                          InnovationValue, Inverse, InverseSqrt, KernelIntensity,
                          ParametricIntensity, Power, XiTransform, bivariate_innovation,
                          hardcore_feasible_range, univariate_innovation)
from .learning import FoldEstimates, SearchSpec, loss, minimize, per_fold_estimates
from .simulate import (DppSpec, GaussianFieldSpec, HardCoreSpec, simulate_dpp,
                       simulate_hardcore, simulate_lgcp, simulate_poisson, thin_independent)

__version__ = "0.1.0"

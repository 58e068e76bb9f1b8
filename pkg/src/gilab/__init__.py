"""Numerical laboratory for collapsing hyperkahler metrics on elliptic fibrations."""

__version__ = "0.1.0"

from .ansatz import (CalabiParams, CalabiPoint, OVParams, SemiFlatParams,
                     calabi_forms, local_model_map, local_model_inverse,
                     ov_forms, ov_potential, sf_fiber_area, sf_forms,
                     sk_metric, sk_radial_distance)
from .collapse import (CollapseRegime, Correspondence, FiniteMetricSpace, GHBounds,
                       SamplingBudget, estimate_sk_scale, gh_brute_force,
                       gh_lower, gh_upper, limit_space_sample, pointed_ball,
                       run_regime)
from .fields import Box, MetricField, OVFieldParams
from .geom import (ChartPoint, ComplexFormValue, ComplexStructureValue,
                   FormValue, HKTripleValue, RiemannMetricValue, hk_rotate,
                   metric_from_kahler, triple_residuals, wedge_top,
                   wedge_top_c)
from .gluing import (BFieldCocycle, CocycleChart, CycleSpec, GluingConfig,
                     decay_fit, f_eps, f_eps_sup, glued_ansatz, mass_balance,
                     model_cocycle, period_pairing, twist_forms)
from .periods import (WeierstrassData, colliding_family, continue_periods,
                      discriminant_roots, loop_monodromy, sk_segment_length,
                      weierstrass_periods)
from .riemann import (ExponentFit, PointCloud, ball_volume, cloud_sample,
                      cyl_check, distance_compare, fiber_diameter,
                      fit_exponent, geodesic_shoot, graph_distance, ricci)

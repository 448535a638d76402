"""Every tunable default in one place.

Reports embed the effective values of these settings, so changing a number
here changes what a report says it used.

==========================  ==========  ==============================================
name                        value       used by
==========================  ==========  ==============================================
QUAD_ORDER                  8           Gauss-Legendre points per panel (all modules)
INTEGRATE_TOL               1e-10       quadrature.integrate absolute tolerance
INTEGRATE_MAX_DEPTH         16          panel-halving limit in quadrature.integrate
EXTREMIZE_GRID              64          coarse grid for 1-D sup/inf scans
EXTREMIZE_TOL               1e-9        golden-section bracket width
BOX_DENSITY                 64          points per axis for (t, u, v) box scans
STRICTNESS_TOL              1e-12       minimum margin for a strict inequality
EIGEN_EPS_REL               1e-6        smallest accepted eps, relative to mu
CAP_FACTOR                  1e3         cap for unbounded ranges, times the radius
COLLATZ_TOL                 1e-12       relative slack in lambda*w >= A w
SPECTRAL_N                  128         target Nystrom nodes for spectral radii
POWER_TOL                   1e-13       power-iteration quotient change (relative)
POWER_MAX_ITER              20000       power-iteration cap
SOLVER_PANELS               16          uniform panels of the solver grid
PICARD_DAMPING              1.0         Picard relaxation factor
PICARD_TOL                  1e-12       Picard sup-norm step tolerance
PICARD_MAX_ITER             400         Picard cap
NEWTON_TOL                  1e-12       Newton residual tolerance
NEWTON_MAX_ITER             40          Newton cap
FD_STEP                     1e-7        forward-difference step, scaled by 1+|x|
REPORT_RESIDUAL             1e-8        residual a returned solution must meet
DEDUPE_REL                  1e-4        dedupe distance relative to the largest norm
CONSISTENCY_TOL             1e-6        sup distance to the doubled-grid solution
TRIVIAL_TOL                 1e-9        sup norm below which a solution is trivial
STARTS_PER_SHELL            3           seed magnitudes per shell and component
CONE_SLACK                  1e-6        slack for cone-membership verdicts
BISECTION_TOL               1e-14       inversion of the radial substitution
==========================  ==========  ==============================================
"""

QUAD_ORDER = 8
INTEGRATE_TOL = 1e-10
INTEGRATE_MAX_DEPTH = 16
EXTREMIZE_GRID = 64
EXTREMIZE_TOL = 1e-9
BOX_DENSITY = 64
STRICTNESS_TOL = 1e-12
EIGEN_EPS_REL = 1e-6
CAP_FACTOR = 1e3
COLLATZ_TOL = 1e-12
SPECTRAL_N = 128
POWER_TOL = 1e-13
POWER_MAX_ITER = 20000
SOLVER_PANELS = 16
PICARD_DAMPING = 1.0
PICARD_TOL = 1e-12
PICARD_MAX_ITER = 400
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 40
FD_STEP = 1e-7
REPORT_RESIDUAL = 1e-8
DEDUPE_REL = 1e-4
CONSISTENCY_TOL = 1e-6
TRIVIAL_TOL = 1e-9
STARTS_PER_SHELL = 3
CONE_SLACK = 1e-6
BISECTION_TOL = 1e-14


def as_dict():
    """All defaults as a plain dict, for embedding in reports."""
    return {k: v for k, v in globals().items() if k.isupper()}

"""Global numeric defaults.

Every predicate that depends on one of these takes it as an explicit keyword
argument; the values here are only the defaults.
"""

# identities (exact algebra carried out in floating point)
IDENTITY_TOL = 1e-9
# finite-scale limits
LIMIT_TOL = 1e-6
# |det g - 1| accepted for SL(n) inputs
DET_TOL = 1e-8
# angular tolerance (radians) used by convexity / membership tests
ANGULAR_TOL = 1e-6
# decimals used when deduplicating unit directions
DEDUP_DECIMALS = 12

ELEMENT_BUDGET = 200_000_000
# |logscale| beyond this drops the element
LOGSCALE_BOUND = 1e6

SHARP_THRESHOLD = 0.02
EPSILON_LIST = (0.3, 0.2, 0.1, 0.05)
N_LADDER = (6, 8, 10, 12)
MIN_CONE_COUNT = 20

SCHEMA_VERSION = 1

# width of the neighbourhood of the folded plane used by the escape detector
FOLD_KAPPA = 0.1
# perturbation size and ball radius at which the folded-plane escape is checked
ESCAPE_T0 = 0.01
ESCAPE_N0 = 8

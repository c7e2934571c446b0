import decouple

# numerical constants shared by the steppers, diagnostics and drivers
FD_EPS = 1e-6
REFERENCE_REFINEMENT = 100
DEFAULT_STRIDE = 100
DEFAULT_SPIN = 6.0
DEFAULT_TILT = 0.05
# falling flank of f''(z); f''' vanishes at z ~ 1.694
STABLE_AXIS_BRACKET = (1.7, 4.0)

LOGGING_FILE = decouple.config("LOGGING_FILE", default="")
LOG_LEVEL = decouple.config("LOG_LEVEL", default="INFO")
MAX_PARALLEL_CALLS = decouple.config("MAX_PARALLEL_CALLS", default=4, cast=int)
TABLEAU_CACHE_SIZE = decouple.config("TABLEAU_CACHE_SIZE", default=32, cast=int)

ENUMERATION_CAP = 20
BRUTE_FORCE_MAX_M = 12

DEFAULT_CLAMP_GAMMA = 0.98
WEIGHT_FLOOR = 1e-300

MODEL_FORMAT_VERSION = '1.0'
RADO_FORMAT_VERSION = '1.0'

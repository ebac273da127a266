#
# coding=utf-8
"""This module contains constants used throughout ``mdpcert``."""

# Unless documented in the API reference nothing here should be considered
# part of the public API of this module

INFINITY = float('inf')

# Maximum deviation of a kernel row sum from 1
ROW_SUM_TOL = 1e-12

# Relative residual allowed for a dense linear solve, scaled by (1 + ||rhs||)
SOLVE_RESIDUAL_TOL = 1e-10

# Variance entries below -VARIANCE_CORRUPTION_TOL indicate corrupted arithmetic.
# Entries between that and 0 are rounding noise and get clamped.
VARIANCE_CORRUPTION_TOL = 1e-9

# Relative improvement a policy iteration step needs before switching actions
PI_SWITCH_TOL = 1e-12

# Tolerance used when an exact optimal solution is needed as an oracle
ORACLE_TOL = 1e-10
ORACLE_MAX_ITERS = 100_000

# Largest policy count exhaustive enumeration will attempt
MAX_ENUMERATED_POLICIES = 100_000

# Smallest separation threshold that 64-bit arithmetic resolves reliably
MIN_RESOLVABLE_THRESHOLD = 1e-9

# Absorbing reward range slack
ABSORBING_U_SLACK = 1e-12

# Unspecified universal constants of the planner analysis
DEFAULT_C0 = 4.0
DEFAULT_C1 = 1.0
DEFAULT_C2 = 4.0
DEFAULT_ALPHA = 1.0

# Solver methods
METHOD_QVI = 'qvi'
METHOD_PI = 'pi'
METHODS = [METHOD_QVI, METHOD_PI]

# Keyed random stream tags. Each consumer of randomness owns one tag so that no
# two consumers ever share a stream.
STREAM_TRANSITIONS = 1
STREAM_PERTURBATION = 2
STREAM_FAMILY_KERNEL = 3
STREAM_FAMILY_REWARD = 4
STREAM_BATTERY = 5
STREAM_TIEBREAK_TRIAL = 6

# MDP families
FAMILY_RANDOM_DIRICHLET = 'random-dirichlet'
FAMILY_CHAIN = 'chain'
FAMILY_SYMMETRIC_ADVERSARIAL = 'symmetric-adversarial'
FAMILIES = [FAMILY_RANDOM_DIRICHLET, FAMILY_CHAIN, FAMILY_SYMMETRIC_ADVERSARIAL]

# Sweep modes
MODE_PLAN = 'plan'
MODE_EVALUATE = 'evaluate'
MODE_LEMMAS = 'lemmas'
MODE_TIEBREAK = 'tiebreak'
MODES = [MODE_PLAN, MODE_EVALUATE, MODE_LEMMAS, MODE_TIEBREAK]

# Sweep CSV schema. Do not reorder.
CSV_FIELDS = ['family', 'discount', 'n', 'seed', 'error_sup', 'bound_instance', 'bound_worst', 'wall_time_ms']

# Derived x field accepted by slope fits: the effective horizon 1/(1-discount)
FIELD_HORIZON = 'horizon'

# Leaky chain family: leak probability of the best action per unit of (1 - discount), and the
# margin ladder in units of the hold-probability standard deviation
CHAIN_LEAK_SCALE = 1.0 / 3.0
CHAIN_GAP_SCALE = 0.2
CHAIN_GAP_DECAY = 0.5

# Net matching statuses
MATCH = 'match'
MISMATCH = 'mismatch'
NOT_APPLICABLE = 'not-applicable'

# Lemma battery parameters
BATTERY_DISCOUNTS = [0.5, 0.9, 0.95]
BATTERY_MAX_STATES = 6
BATTERY_MAX_ACTIONS = 3
BATTERY_ORACLE_MAX_STATES = 4
NEUMANN_TERMS = 200
NET_MATCH_OMEGA = 1e-2

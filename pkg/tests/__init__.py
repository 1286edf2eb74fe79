"""
Test package for iqprob
"""

# Test configuration
TEST_CONFIG = {
    'seed': 20240611,
    'dims': (2, 6),
    'suite_count': 6,
    'numeric_tolerance': 1e-9,
    'golden_tolerance': 1e-10,
    'angles': [0.1, 0.4, 0.7853981633974483, 1.2],
    'spin1_values': (1, 0, -1),
}

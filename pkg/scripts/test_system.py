#!/usr/bin/env python3
"""
Smoke test to verify the iqprob system is working correctly.
Runs a quick check on every component without pytest.
"""

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import logging
import numpy as np

logging.basicConfig(level=logging.WARNING, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


def test_imports():
    """Test that all modules can be imported"""
    print("🧪 Testing imports...")

    try:
        from src import hermitian_core, projector_geometry, imprecise_probability  # noqa: F401
        from src import classical_ip, measurement_models, examples_spin, property_suite  # noqa: F401
        from src import cli  # noqa: F401
        print("✅ All iqprob modules imported successfully")
        return True

    except ImportError as e:
        print(f"❌ Import error: {e}")
        print("💡 Make sure you're running from the project root directory")
        print("💡 Try: pip install -r requirements.txt")
        return False


def test_operators():
    """Test the lower/upper operators on a rank-one pair in dim 2"""
    print("\n📐 Testing probability operators...")

    try:
        from src.hermitian_core import validate_projector
        from src.imprecise_probability import lower_operator, upper_operator

        angle = 0.6
        v = np.array([np.cos(angle), np.sin(angle)])
        p = validate_projector(np.diag([1.0, 0.0]))
        q = validate_projector(np.outer(v, v))

        lower = lower_operator(p, q).matrix
        upper = upper_operator(p, q).matrix
        if not np.allclose(lower, 0) or not np.allclose(upper, np.cos(angle) ** 2 * np.eye(2)):
            print("❌ Operators do not match lower = 0, upper = cos^2 I")
            return False

        print(f"✅ lower = 0, upper = {np.cos(angle) ** 2:.4f} I")
        return True

    except Exception as e:
        print(f"❌ Operator test failed: {e}")
        return False


def test_reference_tables():
    """Test the spin-1 reference tables"""
    print("\n🧲 Testing spin-1 reference tables...")

    try:
        from src.examples_spin import reproduce_tables

        report = reproduce_tables()
        if not report.passed:
            print(f"❌ {len(report.failed())} reference cases failed")
            print(report.failed().to_string(index=False))
            return False

        print(f"✅ {len(report.rows)} reference cases reproduced "
              f"(max deviation {report.max_deviation:.1e})")
        return True

    except Exception as e:
        print(f"❌ Reference table test failed: {e}")
        return False


def test_suites():
    """Run every property suite on a handful of instances"""
    print("\n🎲 Testing property suites...")

    try:
        from src.property_suite import PropertySuiteRunner, summarize

        frames = PropertySuiteRunner(seed=0).run_all(counts={
            'axioms': 5, 'intersections': 5, 'decompositions': 5,
            'operator_properties': 5, 'two_dimensional': 5, 'classical': 5,
        })
        summary = summarize(frames)
        print(summary.to_string(index=False))

        if (summary['failed'] > 0).any():
            print("❌ Some suite instances failed")
            return False

        print("✅ All suite instances passed")
        return True

    except Exception as e:
        print(f"❌ Suite test failed: {e}")
        return False


def test_edge_cases():
    """Test edge cases and error handling"""
    print("\n🧪 Testing edge cases...")

    try:
        from src.errors import NotIdempotent, ResolutionInvalid
        from src.hermitian_core import validate_projector
        from src.measurement_models import ProjectiveResolution

        try:
            validate_projector(np.diag([2.0, 0.0]))
            print("⚠️  Non-idempotent matrix should have failed")
            return False
        except NotIdempotent:
            print("✅ Non-idempotent matrix rejected")

        try:
            ProjectiveResolution.from_matrices([np.diag([1.0, 0.0, 0.0])])
            print("⚠️  Incomplete resolution should have failed")
            return False
        except ResolutionInvalid:
            print("✅ Incomplete resolution rejected")

        return True

    except Exception as e:
        print(f"❌ Edge case test failed: {e}")
        return False


def main():
    """Main test function"""
    print("⚛️  iqprob - System Smoke Test")
    print("=" * 60)

    tests_passed = 0
    total_tests = 5

    if test_imports():
        tests_passed += 1
    else:
        print("\n❌ Import tests failed. Cannot continue.")
        return False

    for check in (test_operators, test_reference_tables, test_suites, test_edge_cases):
        if check():
            tests_passed += 1

    print("\n" + "=" * 60)

    if tests_passed == total_tests:
        print(f"🎉 ALL TESTS PASSED! ({tests_passed}/{total_tests})")
        print("\n🚀 Next Steps:")
        print("1. Try: python scripts/run_iqprob.py spin1 --reproduce --output pretty")
        print("2. Run the full suites: python scripts/run_iqprob.py suite all --jobs -1")
        print("3. Run the tests: pytest -m 'not slow'")
        return True

    print(f"❌ Some tests failed ({tests_passed}/{total_tests} passed)")
    print("\n🔧 Troubleshooting:")
    print("- Check that all dependencies are installed: pip install -r requirements.txt")
    print("- Ensure you're running from the project root directory")
    return False


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)

from vfnif.verify.checks import LEVELS, CheckResult, run_checks

__all__ = ["CheckResult", "LEVELS", "run_checks"]

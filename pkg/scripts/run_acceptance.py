"""Run the acceptance suite and print only the per-criterion verdict lines.

    python3 scripts/run_acceptance.py
"""

import pathlib
import re
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]


def main():
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-s",
                           str(ROOT / "tests" / "test_acceptance.py")],
                          capture_output=True, text=True, cwd=ROOT)
    lines = [l for l in proc.stdout.splitlines() if re.match(r"AC-\d+ (PASS|FAIL)", l)]
    print("\n".join(lines))
    print(proc.stdout.strip().splitlines()[-1])
    return proc.returncode


if __name__ == "__main__":
    sys.exit(main())

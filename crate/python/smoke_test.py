"""Smoke test for the nqp extension module.

Build and install the module next to this script, then run it:

    cargo build -p nqp-py --release
    cp target/release/libnqp.so python/nqp.so
    python python/smoke_test.py        # or: pytest python/smoke_test.py
"""

import os
import sys
import tempfile

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
import nqp  # noqa: E402


def test_reference_spectrum_is_damped_and_conjugate_closed():
    lam = np.array(nqp.reference_spectrum())
    assert lam.shape == (4,)
    assert np.all(lam.real < 0)
    assert np.allclose(np.sort_complex(lam), np.sort_complex(lam.conj()))


def test_pipeline_ledger_passes():
    rows = nqp.pipeline_ledger()
    assert rows
    assert all(r[4] for r in rows), [r for r in rows if not r[4]]


def test_suite_and_norm():
    ok, cases, violations, report = nqp.verify("bracket", seed=3, instances=5)
    assert ok and cases > 0 and violations == 0
    assert report.startswith("suite")
    # Single term z = 2 at alpha = (1), k = (1): norm = 2 eps e^s.
    text = "1 1\n1 1 1 2.0 0.0\n"
    assert np.isclose(nqp.field_norm(text, 0.5, 0.25), 2 * 0.5 * np.exp(0.25))


def test_cli_exit_codes():
    with tempfile.TemporaryDirectory() as d:
        code, summary, _ = nqp.run("spectrum", d)
        assert code == 0, summary
        code, _, _ = nqp.run("verify", d, suite="no-such-suite")
        assert code == 1


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"ok  {name}")

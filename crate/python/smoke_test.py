"""Smoke test for the phaselab_py extension module.

Build and run from the repository root:

    cargo build --release -p phaselab-py --features extension-module
    cp target/release/libphaselab_py.so python/phaselab_py.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import phaselab_py as pl


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    assert close(pl.per_copy_trace_term(2, False, False), 7.0)
    assert close(pl.expected_purity([1, 0, 0, 0], 2, 1), 7 / 9)

    bounds = pl.lemma1_bounds(9, 1)
    assert close(bounds["lemma_bound"], math.log2(9) - 2)

    u = pl.haar_unitary(3, 7)
    assert u == pl.haar_unitary(3, 7)
    gram = [[sum(u[k][i].conjugate() * u[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
    assert all(close(gram[i][j], 1.0 if i == j else 0.0, 1e-12) for i in range(3) for j in range(3))

    assert pl.clifford_group_order(2) == 24
    assert close(pl.entropy([[0.5, 0], [0, 0.5]]), 1.0)

    inst = pl.ChannelInstance.sample(4, 11)
    ci = inst.joint_coherent_info()
    assert close(ci["average"], 1.0, 1e-6)
    assert close(inst.reversal_fidelity([0.5, 0.5, 0.5, 0.5]), 1.0)
    assert close(inst.entanglement_fidelity(), 1.0)

    run = pl.backassisted_classical(3, 2, 1, 5)
    assert tuple(run["decoded"]) == (2, 1)
    assert close(run["rate"], 2 * math.log2(3) / 3, 1e-15)
    assert run["transcript"].startswith("# transcript v1")

    try:
        pl.expected_purity([1, 0, 0], 2, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("mismatched amplitudes accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()

"""Builds the extension module and runs a small recovery through it.

    python python/smoke_test.py
"""

import math
import os
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load_module():
    subprocess.run(["cargo", "build", "-p", "ndtv-python"], cwd=ROOT, check=True)
    built = os.path.join(ROOT, "target", "debug", "libndtv_py.so")
    where = tempfile.mkdtemp()
    shutil.copy(built, os.path.join(where, "ndtv_py.so"))
    sys.path.insert(0, where)
    import ndtv_py

    return ndtv_py


def main():
    nd = load_module()

    x = nd.Signal.phantom("gradient-sparse", 2, 16, seed=1, sparsity=4)
    assert (x.d, x.n, len(x)) == (2, 16, 256)
    assert x.tv("aniso") >= x.tv("iso") > 0.0

    back = nd.Signal.from_haar(2, 16, x.haar())
    assert max(abs(a - b) for a, b in zip(back.values(), x.values())) < 1e-12
    assert nd.Signal.from_bytes(x.to_bytes()).values() == x.values()

    op = nd.Operator.composite(2, 16, p=40, q=20, seed=2)
    assert op.rows == 2 * 2 * 20 + 40
    assert nd.Operator.from_json(op.to_json()).apply(x) == op.apply(x)

    y = nd.measure(op, x, epsilon=0.0, seed=3)
    x_hat, result = nd.solve(op, y, epsilon=0.0, variant="iso")
    err = math.sqrt(sum(abs(a - b) ** 2 for a, b in zip(x_hat.values(), x.values()))) / x.norm()
    print(f"recovery error {err:.2e} after {result['iterations']} iterations")
    assert err < 1e-3

    reports = nd.check_main_bounds(x, x_hat, 4, 0.0)
    print("bounds:", [(r["name"], r["status"]) for r in reports])
    print("bv:", nd.check_bv_embedding(x)["status"])

    diag = nd.Operator.random(3, 1, 4, seed=0)
    cert = diag.rip(1)
    assert cert["level"] >= 0.0

    try:
        nd.Signal(2, 4, [0j] * 5)
    except ValueError:
        pass
    else:
        raise AssertionError("length mismatch accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()

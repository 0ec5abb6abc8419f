import time

import numpy as np
import pytest
import scipy.sparse as sp

import renewalops as ro

SESSION_T0 = time.time()


def doubling_branch_matrix(m: int) -> sp.csr_matrix:
    """Ulam matrix of the two-branch full shift on [1/2, 1] (return time 1)."""
    g = ro.Grid(m)
    e = g.edges
    rows, cols, w = [], [], []
    for t in range(m):
        for lo, hi in (((e[t] + 0.5) / 2, (e[t + 1] + 0.5) / 2),
                       ((e[t] + 1.0) / 2, (e[t + 1] + 1.0) / 2)):
            k0 = max(int(np.floor((lo - 0.5) / g.width + 1e-12)), 0)
            k1 = min(int(np.ceil((hi - 0.5) / g.width - 1e-12)) - 1, m - 1)
            for k in range(k0, k1 + 1):
                ov = min(hi, e[k + 1]) - max(lo, e[k])
                if ov > 0:
                    rows.append(t)
                    cols.append(k)
                    w.append(ov / g.width)
    return sp.csr_matrix((w, (rows, cols)), shape=(m, m))


@pytest.fixture(scope="session")
def doubling_op():
    return ro.InducedOperator.synthetic(ro.Grid(32), [doubling_branch_matrix(32)])


@pytest.fixture(scope="session")
def lsv2_small():
    """LSV alpha=2, coarse grid; cheap fixture for structural tests."""
    return ro.assemble_operator(ro.MapSpec("lsv", alpha=2.0), ro.Grid(64),
                                n_trunc=200, j_direct=32)


@pytest.fixture(scope="session")
def lsv2_mid():
    """LSV alpha=2 at medium resolution; used by quantitative checks."""
    return ro.assemble_operator(ro.MapSpec("lsv", alpha=2.0), ro.Grid(512),
                                n_trunc=1200, j_direct=512)


@pytest.fixture(scope="session")
def lsv2_spectral():
    """Finer truncation for spectral asymptotics near z = 1."""
    return ro.assemble_operator(ro.MapSpec("lsv", alpha=2.0), ro.Grid(256),
                                n_trunc=4000, j_direct=256, k_ladder=40000)


@pytest.fixture(scope="session")
def lsv0_small():
    return ro.assemble_operator(ro.MapSpec("lsv0"), ro.Grid(128),
                                n_trunc=400, j_direct=64, k_ladder=20000)

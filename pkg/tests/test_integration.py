"""Cross-component checks: tabulated solution characteristics, solves with a
potential term, and the client-to-live-server path."""

import math
import socket
import threading
import time

import pytest

from fracfem import Kernel, assemble_1d, interpolate, make_interval_mesh, mountain_pass
from fracfem.cli import main
from fracfem.runs import run_table
from fracfem.variational import ProblemSpec


def test_table_characteristics_match_references():
    # reference characteristics of the ground state and the nodal solution
    # on (-1, 1) at p = 4:
    #   s     E(u1)  max u1   E(u2)  max u2
    #   0.4   0.38   1.4      1.41   2.1
    #   0.7   0.76   1.5      6.45   2.6
    out = run_table([0.4, 0.7], p=4.0, nodes=512, tol=1e-2)
    by_s = {row["s"]: row for row in out["rows"]}
    r4 = by_s[0.4]
    assert r4["energy_ground"] == pytest.approx(0.38, rel=0.10)
    assert r4["max_ground"] == pytest.approx(1.4, rel=0.10)
    assert r4["energy_nodal"] == pytest.approx(1.41, rel=0.15)
    assert r4["max_nodal"] == pytest.approx(2.1, rel=0.10)
    r7 = by_s[0.7]
    assert r7["energy_ground"] == pytest.approx(0.76, rel=0.10)
    assert r7["max_ground"] == pytest.approx(1.5, rel=0.10)
    assert r7["energy_nodal"] == pytest.approx(6.45, rel=0.15)
    assert r7["max_nodal"] == pytest.approx(2.6, rel=0.10)
    assert r7["min_nodal"] == pytest.approx(-2.6, rel=0.10)
    assert abs(r7["max_nodal"] + r7["min_nodal"]) <= 0.05 * r7["max_nodal"]


def test_disk_solutions_for_milder_order():
    # second qualitative 2D case: s = 0.6 on the unit disk
    import numpy as np

    from fracfem import (
        assemble_2d,
        make_disk_mesh,
        modified_mountain_pass,
    )
    from fracfem.runs import default_ground_start, default_nodal_start

    mesh = make_disk_mesh(1.0, 1)
    gram = assemble_2d(mesh, Kernel(2, 0.6))
    spec = ProblemSpec(gram, 4.0, 1.0)
    ground = mountain_pass(spec, default_ground_start(mesh), tol=1e-2)
    assert np.all(ground.solution.coefficients > 0.0)
    nodal = modified_mountain_pass(spec, default_nodal_start(mesh), tol=1e-2)
    c = nodal.solution.coefficients
    assert c.max() > 0.0 > c.min()
    assert nodal.energy > ground.energy


@pytest.mark.parametrize("s,tol", [(0.5, 0.03), (0.9, 0.07)])
def test_disk_unit_source_matches_closed_form(s, tol):
    # the unit-source problem has a closed-form solution on the ball; its
    # value at the center is 2^(-2s) / Gamma(1+s)^2 in two dimensions
    import numpy as np

    from fracfem import assemble_2d, make_disk_mesh, solve_linear

    exact0 = 2.0 ** (-2.0 * s) / math.gamma(1.0 + s) ** 2
    errs = []
    for level in (1, 2):
        mesh = make_disk_mesh(1.0, level)
        gram = assemble_2d(mesh, Kernel(2, s))
        u = solve_linear(gram, 1.0)
        center = int(np.flatnonzero(mesh.interior_vertices == 0)[0])
        errs.append(abs(u.coefficients[center] - exact0) / exact0)
    assert errs[1] < errs[0]  # refinement improves the center value
    assert errs[1] <= tol


def test_2d_potential_linearity():
    import numpy as np

    from fracfem import assemble_2d, make_disk_mesh

    mesh = make_disk_mesh(1.0, 1)
    g0 = assemble_2d(mesh, Kernel(2, 0.5))
    g3 = assemble_2d(mesh, Kernel(2, 0.5), 3.0)
    assert np.max(np.abs(g3.S - g0.S - 3.0 * g0.M)) <= 1e-12
    assert np.allclose(g3.M, g0.M)


def test_ground_state_with_potential():
    mesh = make_interval_mesh(-1.0, 1.0, 64)
    g2 = assemble_1d(mesh, Kernel(1, 0.5), 2.0)
    g0 = assemble_1d(mesh, Kernel(1, 0.5))
    u0 = interpolate(mesh, lambda x: math.cos(math.pi * x / 2.0))
    rep2 = mountain_pass(ProblemSpec(g2, 4.0, 1.0), u0, tol=1e-2)
    rep0 = mountain_pass(ProblemSpec(g0, 4.0, 1.0), u0, tol=1e-2)
    assert rep2.solution.coefficients.min() > 0.0
    # a confining potential raises the ground-state level
    assert rep2.energy > rep0.energy


def test_cli_against_live_server(tmp_path):
    uvicorn = pytest.importorskip("uvicorn")
    from fracfem.service.app import app

    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()

    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    try:
        deadline = time.time() + 15.0
        while not server.started and time.time() < deadline:
            time.sleep(0.05)
        assert server.started, "service did not come up"
        code = main(
            [
                "eigen", "--dim", "1", "--nodes", "48", "--s", "0.5", "--k", "2",
                "--server", f"http://127.0.0.1:{port}", "--out", str(tmp_path),
            ]
        )
        assert code == 0
        assert (tmp_path / "eigen.json").exists()
        assert (tmp_path / "phi_2.dat").exists()
    finally:
        server.should_exit = True
        thread.join(timeout=10.0)

import json

from fracfem.cli import main


def run_cli(*argv):
    return main(list(argv))


class TestMeshGen:
    def test_writes_mesh_file(self, tmp_path):
        code = run_cli(
            "mesh-gen", "--dim", "1", "--a", "-1", "--b", "1", "--nodes", "9",
            "--out", str(tmp_path),
        )
        assert code == 0
        data = json.loads((tmp_path / "mesh.json").read_text())
        assert data["dim"] == 1
        assert len(data["nodes"]) == 9

    def test_deterministic_output(self, tmp_path):
        for sub in ("a", "b"):
            run_cli(
                "mesh-gen", "--dim", "2", "--radius", "1", "--level", "1",
                "--out", str(tmp_path / sub),
            )
        assert (tmp_path / "a" / "mesh.json").read_bytes() == (
            tmp_path / "b" / "mesh.json"
        ).read_bytes()

    def test_validation_exit_code(self, tmp_path, capsys):
        code = run_cli(
            "mesh-gen", "--dim", "1", "--a", "1", "--b", "-1", "--nodes", "9",
            "--out", str(tmp_path),
        )
        assert code == 2


class TestAssembleAndEigen:
    def test_assemble_writes_system(self, tmp_path):
        code = run_cli(
            "assemble", "--dim", "1", "--nodes", "10", "--s", "0.5",
            "--out", str(tmp_path),
        )
        assert code == 0
        data = json.loads((tmp_path / "system.json").read_text())
        assert len(data["S"]) == 8 * 9 // 2

    def test_assemble_from_mesh_file(self, tmp_path):
        run_cli("mesh-gen", "--dim", "1", "--nodes", "10", "--out", str(tmp_path))
        code = run_cli(
            "assemble", "--mesh", str(tmp_path / "mesh.json"), "--s", "0.5",
            "--out", str(tmp_path / "sys"),
        )
        assert code == 0
        assert (tmp_path / "sys" / "system.json").exists()

    def test_eigen_writes_report_and_phi_files(self, tmp_path):
        code = run_cli(
            "eigen", "--dim", "1", "--nodes", "64", "--s", "0.5", "--k", "2",
            "--out", str(tmp_path),
        )
        assert code == 0
        report = json.loads((tmp_path / "eigen.json").read_text())
        assert report["phis"] == ["phi_1.json", "phi_2.json"]
        assert (tmp_path / "phi_1.dat").exists()
        xs = [float(l.split()[0]) for l in (tmp_path / "phi_1.dat").read_text().splitlines()]
        assert xs == sorted(xs)


class TestSolves:
    def test_solve_linear_outputs(self, tmp_path):
        code = run_cli(
            "solve-linear", "--dim", "1", "--nodes", "128", "--s", "0.5",
            "--out", str(tmp_path),
        )
        assert code == 0
        lines = (tmp_path / "solution.dat").read_text().splitlines()
        assert len(lines) == 128
        first_x, first_v = map(float, lines[0].split())
        assert first_x == -1.0 and first_v == 0.0

    def test_ground_state_and_symmetry_roundtrip(self, tmp_path):
        code = run_cli(
            "ground-state", "--dim", "1", "--nodes", "96", "--s", "0.3", "--p", "4",
            "--out", str(tmp_path),
        )
        assert code == 0
        code = run_cli(
            "symmetry", "--solution", str(tmp_path / "ground_state.json"),
            "--axis", "x", "--out", str(tmp_path / "sym"),
        )
        assert code == 0
        rep = json.loads((tmp_path / "sym" / "symmetry.json").read_text())
        assert rep["classification"] == "symmetric"

    def test_determinism_of_solves(self, tmp_path):
        for sub in ("r1", "r2"):
            run_cli(
                "ground-state", "--dim", "1", "--nodes", "64", "--s", "0.4",
                "--p", "4", "--out", str(tmp_path / sub),
            )
        assert (tmp_path / "r1" / "ground_state.json").read_bytes() == (
            tmp_path / "r2" / "ground_state.json"
        ).read_bytes()
        assert (tmp_path / "r1" / "ground_state.dat").read_bytes() == (
            tmp_path / "r2" / "ground_state.dat"
        ).read_bytes()

    def test_convergence_exit_code(self, tmp_path):
        code = run_cli(
            "ground-state", "--dim", "1", "--nodes", "64", "--s", "0.5", "--p", "4",
            "--tol", "1e-10", "--max-iter", "2", "--out", str(tmp_path),
        )
        assert code == 3

    def test_numerical_exit_code(self, tmp_path):
        code = run_cli(
            "solve-linear", "--dim", "1", "--nodes", "32", "--s", "0.5",
            "--v-const", "-50", "--out", str(tmp_path),
        )
        assert code == 4

    def test_unreachable_server_exit_code(self, tmp_path):
        code = run_cli(
            "mesh-gen", "--dim", "1", "--nodes", "9",
            "--server", "http://127.0.0.1:9",  # discard port: nothing listens
            "--out", str(tmp_path),
        )
        assert code == 4


class TestStudies:
    def test_limit_csv(self, tmp_path):
        code = run_cli(
            "limit", "--dim", "1", "--nodes", "64", "--s", "0.3", "--which", "1",
            "--p-seq", "2.5,2.1", "--out", str(tmp_path),
        )
        assert code == 0
        lines = (tmp_path / "limit.csv").read_text().splitlines()
        assert lines[0] == "p,energy,angle_degrees,limit_residual"
        assert len(lines) == 3

    def test_limit_ratio_curves_flatten(self, tmp_path):
        run_cli(
            "limit", "--dim", "1", "--nodes", "64", "--s", "0.3", "--which", "1",
            "--p-seq", "3,2.1", "--out", str(tmp_path),
        )
        spreads = {}
        for p in ("3", "2.1"):
            vals = [
                float(line.split()[1])
                for line in (tmp_path / f"ratio_p{p}.dat").read_text().splitlines()
            ]
            mean = sum(vals) / len(vals)
            spreads[p] = (max(vals) - min(vals)) / mean
        # the solution approaches a multiple of the eigenfunction
        assert spreads["2.1"] < spreads["3"]
        assert spreads["2.1"] < 0.05

    def test_table_output(self, tmp_path):
        code = run_cli(
            "table", "--s-values", "0.3", "--p", "4", "--nodes", "96",
            "--out", str(tmp_path),
        )
        assert code == 0
        table = json.loads((tmp_path / "table.json").read_text())
        assert table["rows"][0]["s"] == 0.3
        text = (tmp_path / "table.txt").read_text()
        assert "E(u1)" in text

    def test_converge_small(self, tmp_path):
        code = run_cli(
            "converge", "--s", "0.5", "--sizes", "16,32,64", "--out", str(tmp_path),
        )
        assert code == 0
        data = json.loads((tmp_path / "converge.json").read_text())
        assert data["slope_h"] < 0.0
        lines = (tmp_path / "converge.csv").read_text().splitlines()
        assert lines[0] == "m,err_h,err_l2"
        assert len(lines) == 4

import numpy as np
import pytest

from expandersketch import (
    GroupModel,
    PlainSparseModel,
    TreeModel,
    generate_random_matrix,
    io,
    sample_model_signal,
)
from expandersketch.cli import main


class TestMatrixFiles:
    def test_round_trip_bit_exact(self, tmp_path):
        a = generate_random_matrix(9, 7, 3, seed=5)
        path = tmp_path / "mat.txt"
        io.save_matrix(a, path)
        b = io.load_matrix(path)
        assert (b.n_left, b.n_right, b.degree) == (9, 7, 3)
        assert np.array_equal(a.columns, b.columns)
        io.save_matrix(b, tmp_path / "again.txt")
        assert path.read_text() == (tmp_path / "again.txt").read_text()

    def test_rejects_wrong_entry_count(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2 3 2\n0 1\n0\n")
        with pytest.raises(io.FileFormatError):
            io.load_matrix(path)

    def test_rejects_wrong_line_count(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("3 3 1\n0\n1\n")
        with pytest.raises(io.FileFormatError):
            io.load_matrix(path)

    def test_rejects_out_of_range(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1 2 2\n0 5\n")
        with pytest.raises(io.FileFormatError):
            io.load_matrix(path)


class TestModelFiles:
    @pytest.mark.parametrize(
        "model",
        [
            PlainSparseModel(10, 3),
            TreeModel.complete(7, 2, 3),
            GroupModel(4, ((0, 1), (1, 2), (2, 3)), 2),
        ],
    )
    def test_round_trip(self, tmp_path, model):
        path = tmp_path / "model.txt"
        io.save_model(model, path)
        assert io.load_model(path) == model

    def test_group_size_prefix_checked(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("group 3 2 1\n2: 0 1\n3: 1 2\n")
        with pytest.raises(io.FileFormatError):
            io.load_model(path)

    def test_tree_parent_count_checked(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_text("tree 3 2 2\n-1\n0\n")
        with pytest.raises(io.FileFormatError):
            io.load_model(path)

    def test_unknown_kind(self, tmp_path):
        path = tmp_path / "u.txt"
        path.write_text("mystery 3 2\n")
        with pytest.raises(io.FileFormatError):
            io.load_model(path)


class TestVectorFiles:
    def test_round_trip_exact(self, tmp_path):
        x = np.random.default_rng(0).standard_normal(17)
        path = tmp_path / "x.txt"
        io.save_vector(x, path)
        assert np.array_equal(io.load_vector(path), x)

    def test_length_check(self, tmp_path):
        path = tmp_path / "x.txt"
        io.save_vector(np.ones(3), path)
        with pytest.raises(io.FileFormatError):
            io.load_vector(path, expected_length=4)


class TestCli:
    def test_gen_matrix_and_verify(self, tmp_path, capsys):
        mat = tmp_path / "a.txt"
        model = tmp_path / "m.txt"
        assert main(["gen-matrix", "--n", "6", "--m", "20", "--d", "3",
                     "--seed", "1", "--out", str(mat)]) == 0
        io.save_model(PlainSparseModel(6, 2), model)
        assert main(["verify-expander", "--matrix", str(mat), "--model", str(model)]) == 0
        out = capsys.readouterr().out
        assert "epsilon" in out and "exhaustive" in out

    def test_verify_sampled_mode(self, tmp_path, capsys):
        mat = tmp_path / "a.txt"
        model = tmp_path / "m.txt"
        main(["gen-matrix", "--n", "8", "--m", "16", "--d", "3", "--seed", "2",
              "--out", str(mat)])
        io.save_model(PlainSparseModel(8, 3), model)
        assert main(["verify-expander", "--matrix", str(mat), "--model", str(model),
                     "--samples", "25"]) == 0
        assert "unverified" in capsys.readouterr().out

    def test_model_validate_and_sample(self, tmp_path, capsys):
        model = tmp_path / "tree.txt"
        io.save_model(TreeModel.complete(15, 2, 4), model)
        assert main(["model", "validate", str(model)]) == 0
        assert "tree" in capsys.readouterr().out
        out = tmp_path / "x.txt"
        assert main(["model", "sample", str(model), "--seed", "3", "--out", str(out)]) == 0
        x = io.load_vector(out, expected_length=15)
        assert np.count_nonzero(x) == 4

    def test_model_validate_rejects_loopy(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("group 3 3 1\n2: 0 1\n2: 1 2\n2: 0 2\n")
        assert main(["model", "validate", str(path)]) == 1
        assert "error" in capsys.readouterr().err

    def test_project_command(self, tmp_path, capsys):
        model = tmp_path / "m.txt"
        signal = tmp_path / "x.txt"
        out = tmp_path / "p.txt"
        io.save_model(GroupModel(4, ((0, 1), (1, 2), (2, 3)), 1), model)
        io.save_vector(np.array([1.0, 5.0, 5.0, 1.0]), signal)
        assert main(["project", "--model", str(model), "--signal", str(signal),
                     "--out", str(out)]) == 0
        line = capsys.readouterr().out.strip().split()
        assert line[0] == "2"  # support size
        assert float(line[1]) == 10.0 and float(line[2]) == 2.0
        assert np.array_equal(io.load_vector(out), [0.0, 5.0, 5.0, 0.0])

    def test_recover_command_normalized(self, tmp_path, capsys):
        from expandersketch import SparseBinaryMatrix

        cols = np.arange(15 * 4).reshape(15, 4)  # disjoint neighborhoods
        matrix = SparseBinaryMatrix(n_left=15, n_right=60, degree=4, columns=cols)
        tree = TreeModel.complete(15, 2, 4)
        x = sample_model_signal(tree, 8)
        mat, model, sketch, out = (tmp_path / n for n in ("a.txt", "m.txt", "y.txt", "xhat.txt"))
        io.save_matrix(matrix, mat)
        io.save_model(tree, model)
        io.save_vector(matrix.apply(x) / matrix.degree, sketch)
        assert main(["recover", "--algo", "meiht", "--matrix", str(mat),
                     "--model", str(model), "--sketch", str(sketch),
                     "--normalized", "--out", str(out)]) == 0
        iters, reason, residual = capsys.readouterr().out.split()
        assert reason in ("tolerance", "residual", "max_iterations", "stalled")
        estimate = io.load_vector(out, expected_length=15)
        assert np.abs(estimate - x).sum() <= 1e-8 * np.abs(x).sum()

    def test_experiment_and_report(self, tmp_path, capsys):
        out_dir = tmp_path / "results"
        assert main(["experiment", "tree", "--n-min", "128", "--n-max", "128",
                     "--trials", "2", "--seed", "5", "--m-step", "400",
                     "--max-iters", "40", "--out", str(out_dir)]) == 0
        for name in ("raw.csv", "summary.csv", "config.echo",
                     "m_star.png", "error_curves.png"):
            assert (out_dir / name).exists(), name
        # report re-renders figures from the CSVs alone
        fig_dir = tmp_path / "figs"
        assert main(["report", "--results", str(out_dir), "--out", str(fig_dir)]) == 0
        assert (fig_dir / "m_star.png").exists()

    def test_experiment_config_file_overrides(self, tmp_path):
        out_dir = tmp_path / "results"
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("trials=1\nm-step=500\nno-plot=true\n")
        assert main(["experiment", "tree", "--n-min", "128", "--n-max", "128",
                     "--trials", "9", "--seed", "1", "--max-iters", "30",
                     "--config", str(cfg), "--out", str(out_dir)]) == 0
        import json

        echo = json.loads((out_dir / "config.echo").read_text())
        assert echo["trials"] == 1
        assert not (out_dir / "m_star.png").exists()

    def test_report_missing_inputs(self, tmp_path, capsys):
        assert main(["report", "--results", str(tmp_path)]) == 1

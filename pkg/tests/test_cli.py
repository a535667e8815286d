import pytest

from idtrack.cli import ABLATION_MODELS, main
from idtrack.mot_io import read_detections, read_embeddings, read_gt


@pytest.fixture()
def tiny_config(tmp_path):
    p = tmp_path / "sim.cfg"
    p.write_text(
        "seed=3\n"
        "num_identities=4\n"
        "frames=30\n"
        "arena=400,300\n"
        "embedding_dim=16\n"
        "occlusion_events=1\n"
    )
    return p


def simulate(tmp_path, tiny_config, name="scene", extra=()):
    out_dir = tmp_path / name
    rc = main(["simulate", "--config", str(tiny_config), "--out-dir", str(out_dir), *extra])
    assert rc == 0
    return out_dir


def test_simulate_writes_the_three_files(tmp_path, tiny_config, capsys):
    out_dir = simulate(tmp_path, tiny_config)
    assert "seed=3" in capsys.readouterr().out
    gt = read_gt(out_dir / "gt.txt")
    dets = read_detections(out_dir / "dets.txt")
    dim, vectors = read_embeddings(out_dir / "embeddings.txt")
    assert sorted(gt) == list(range(1, 31))
    assert dim == 16
    assert len(vectors) == sum(len(v) for v in dets.values())


def test_simulate_seed_flag_beats_env_beats_config(tmp_path, tiny_config, capsys, monkeypatch):
    simulate(tmp_path, tiny_config, "a")
    assert "seed=3" in capsys.readouterr().out

    monkeypatch.setenv("IDTRACK_SEED", "5")
    simulate(tmp_path, tiny_config, "b")
    assert "seed=5" in capsys.readouterr().out

    simulate(tmp_path, tiny_config, "c", extra=("--seed", "9"))
    assert "seed=9" in capsys.readouterr().out


def test_simulate_rejects_bad_env_seed(tmp_path, tiny_config, capsys, monkeypatch):
    monkeypatch.setenv("IDTRACK_SEED", "not-a-number")
    rc = main(["simulate", "--config", str(tiny_config), "--out-dir", str(tmp_path / "x")])
    assert rc == 1
    assert "IDTRACK_SEED" in capsys.readouterr().err


def test_simulate_same_seed_is_byte_identical(tmp_path, tiny_config):
    a = simulate(tmp_path, tiny_config, "a")
    b = simulate(tmp_path, tiny_config, "b")
    for name in ("gt.txt", "dets.txt", "embeddings.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_track_and_eval_round(tmp_path, tiny_config, capsys):
    scene = simulate(tmp_path, tiny_config)
    hyp = tmp_path / "hyp.txt"
    rc = main(
        [
            "track",
            "--dets", str(scene / "dets.txt"),
            "--embeddings", str(scene / "embeddings.txt"),
            "--out", str(hyp),
        ]
    )
    assert rc == 0
    assert hyp.exists()
    capsys.readouterr()

    rc = main(["eval", "--gt", str(scene / "gt.txt"), "--hyp", str(hyp)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "MOTA" in out
    assert "mota=" in out
    assert "gt_total=" in out


def test_track_accepts_presets_and_overrides(tmp_path, tiny_config):
    scene = simulate(tmp_path, tiny_config)
    for extra in (
        ("--preset", "mot16"),
        ("--w1", "0.3", "--w2", "0.7"),
        ("--w2", "0.0"),
        ("--frame-stride", "2"),
        ("--write-interpolated",),
    ):
        rc = main(
            [
                "track",
                "--dets", str(scene / "dets.txt"),
                "--embeddings", str(scene / "embeddings.txt"),
                "--out", str(tmp_path / "out.txt"),
                *extra,
            ]
        )
        assert rc == 0


def test_track_accepts_a_predictions_file(tmp_path, tiny_config):
    scene = simulate(tmp_path, tiny_config)
    first = (scene / "dets.txt").read_text().splitlines()[0].split(",")
    pred = tmp_path / "preds.txt"
    pred.write_text(f"1,0,{first[2]},{first[3]},{first[4]},{first[5]},1,-1,-1,-1\n")
    rc = main(
        [
            "track",
            "--dets", str(scene / "dets.txt"),
            "--embeddings", str(scene / "embeddings.txt"),
            "--predictions", str(pred),
            "--out", str(tmp_path / "out.txt"),
        ]
    )
    assert rc == 0


def test_track_without_embeddings_needs_zero_identity_weight(tmp_path, tiny_config, capsys):
    scene = simulate(tmp_path, tiny_config)
    args = ["track", "--dets", str(scene / "dets.txt"), "--out", str(tmp_path / "o.txt")]
    rc = main(args)  # default weights want embeddings
    assert rc == 1
    assert "embedding" in capsys.readouterr().err
    assert main([*args, "--preset", "iou-only"]) == 0


def test_eval_sweep(tmp_path, tiny_config, capsys):
    scene = simulate(tmp_path, tiny_config)
    hyp = tmp_path / "hyp.txt"
    main(
        [
            "track",
            "--dets", str(scene / "dets.txt"),
            "--embeddings", str(scene / "embeddings.txt"),
            "--out", str(hyp),
        ]
    )
    capsys.readouterr()
    rc = main(
        [
            "eval",
            "--gt", str(scene / "gt.txt"),
            "--hyp", str(hyp),
            "--sweep",
            "--thresholds", "0.3,0.6",
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "thr=0.30" in out and "thr=0.60" in out
    assert "best_mota=" in out
    assert "best_mota_row_mota=" in out


def test_eval_missing_file_returns_one(tmp_path, capsys):
    rc = main(["eval", "--gt", str(tmp_path / "nope.txt"), "--hyp", str(tmp_path / "nope.txt")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_ablate_runs_all_variants(tmp_path, tiny_config, capsys):
    out_dir = tmp_path / "runs"
    rc = main(
        [
            "ablate",
            "--config", str(tiny_config),
            "--strides", "1,3",
            "--out-dir", str(out_dir),
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    for name in ABLATION_MODELS:
        assert f"{name}@s1" in out
        assert f"{name}@s3" in out
        assert (out_dir / f"{name}_s1.txt").exists()
        assert (out_dir / f"{name}_s3.txt").exists()
    assert "id_assoc_s3_mota=" in out


def test_ablate_rejects_bad_strides(tmp_path, tiny_config, capsys):
    rc = main(["ablate", "--config", str(tiny_config), "--strides", "0,2"])
    assert rc == 1
    assert "strides" in capsys.readouterr().err


def test_usage_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["track"])  # missing required arguments
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_ablation_models_are_the_documented_three():
    assert list(ABLATION_MODELS) == ["iou-only", "iou-motion", "id-assoc"]
    assert ABLATION_MODELS["iou-only"].weights.identity == 0.0
    assert ABLATION_MODELS["iou-only"].motion_propagate_frames == 0
    assert ABLATION_MODELS["iou-motion"].motion_propagate_frames == 5
    assert ABLATION_MODELS["id-assoc"].weights.identity == 0.5

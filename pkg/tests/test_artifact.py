import json

import numpy as np
import pytest

from surromod import artifact, bnn, svgp
from surromod.errors import ArtifactFormatError


def _tiny_bnn(sim_train):
    arch = bnn.BnnArchitecture(10, 6, hidden_layers=(8,))
    cfg = bnn.TrainConfig(epochs=3, batch_size=32, seed=1)
    return bnn.train(bnn.init(arch, seed=1), sim_train, cfg)


def _tiny_svgp(sim_train):
    cfg = svgp.SvgpConfig(n_inducing=8, steps=10, batch_size=30, seed=1)
    return svgp.train(svgp.init(sim_train, cfg), sim_train, cfg)


def test_bnn_roundtrip_bit_exact(tmp_path, sim_train):
    model = _tiny_bnn(sim_train)
    path = str(tmp_path / "m.json")
    artifact.save_model(model, path, model_id="custom-id")
    loaded, model_id = artifact.load_model(path)
    assert model_id == "custom-id"
    for a, b in zip(model.weights, loaded.weights):
        np.testing.assert_array_equal(a, b)
    for a, b in zip(model.biases, loaded.biases):
        np.testing.assert_array_equal(a, b)
    assert loaded.arch == model.arch
    assert loaded.train_log == model.train_log
    assert loaded.output_names == model.output_names
    p1 = bnn.predict_mc(model, sim_train.X[:4], T=6, seed=3)
    p2 = bnn.predict_mc(loaded, sim_train.X[:4], T=6, seed=3)
    np.testing.assert_array_equal(p1.mean, p2.mean)
    np.testing.assert_array_equal(p1.variance, p2.variance)


def test_svgp_roundtrip_bit_exact(tmp_path, sim_train):
    model = _tiny_svgp(sim_train)
    path = str(tmp_path / "m.json")
    artifact.save_model(model, path)
    loaded, model_id = artifact.load_model(path)
    assert model_id == "svgp-1"   # family-seed default
    for b0, b1 in zip(model.blocks, loaded.blocks):
        for a, b in zip(b0.params_list(), b1.params_list()):
            np.testing.assert_array_equal(a, b)
        assert b1.noise_var == b0.noise_var
        assert b1.kind == b0.kind
    p1 = svgp.predict(model, sim_train.X[:4])
    p2 = svgp.predict(loaded, sim_train.X[:4])
    np.testing.assert_array_equal(p1.mean, p2.mean)
    np.testing.assert_array_equal(p1.variance, p2.variance)


def test_saved_file_is_sorted_json_without_timestamps(tmp_path, sim_train):
    model = _tiny_bnn(sim_train)
    path = str(tmp_path / "m.json")
    artifact.save_model(model, path)
    doc = json.load(open(path))
    assert doc["format"] == artifact.FORMAT_NAME
    assert doc["format_version"] == artifact.FORMAT_VERSION
    assert "created" not in json.dumps(doc)
    # identical content twice -> identical bytes (supports reproducible runs)
    path2 = str(tmp_path / "m2.json")
    artifact.save_model(model, path2)
    assert open(path, "rb").read() == open(path2, "rb").read()


def test_load_rejects_foreign_json(tmp_path):
    p = tmp_path / "other.json"
    p.write_text(json.dumps({"format": "something-else", "format_version": 1}))
    with pytest.raises(ArtifactFormatError):
        artifact.load_model(str(p))


def test_load_rejects_future_version(tmp_path, sim_train):
    path = str(tmp_path / "m.json")
    artifact.save_model(_tiny_bnn(sim_train), path)
    doc = json.load(open(path))
    doc["format_version"] = artifact.FORMAT_VERSION + 1
    json.dump(doc, open(path, "w"))
    with pytest.raises(ArtifactFormatError):
        artifact.load_model(path)


def test_array_encoding_preserves_float64():
    a = np.array([[1.0, np.pi], [1e-300, -0.0]])
    back = artifact._dec(artifact._enc(a))
    np.testing.assert_array_equal(back, a)
    assert back.dtype == np.float64
    assert back.flags["C_CONTIGUOUS"]


def test_file_sha256_matches_hashlib(tmp_path):
    import hashlib
    p = tmp_path / "blob.bin"
    p.write_bytes(b"abc" * 1000)
    assert artifact.file_sha256(str(p)) \
        == hashlib.sha256(b"abc" * 1000).hexdigest()


def test_manifest_roundtrip_and_hash_check(tmp_path):
    f = tmp_path / "data.csv"
    f.write_text("a,b\n1,2\n")
    man = artifact.RunManifest(seeds={"train": 1}, config={"n": 10})
    man.add(str(f), role="dataset", base_dir=str(tmp_path))
    mpath = man.write(str(tmp_path / "manifest.json"))
    back = artifact.RunManifest.read(mpath)
    assert back.seeds == {"train": 1}
    assert back.config == {"n": 10}
    assert back.artifacts["data.csv"]["role"] == "dataset"
    assert back.artifacts["data.csv"]["sha256"] \
        == artifact.file_sha256(str(f))
    assert back.created_utc   # stamped at write time

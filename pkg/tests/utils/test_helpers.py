import json

import numpy as np

from src.utils.helpers import deep_update, derive_seed, hash_arrays, load_json, save_json


def test_derive_seed_xors_edge_index():
    assert derive_seed(0, 3) == 3
    assert derive_seed(5, 1) == 4
    assert derive_seed(7) == 7


def test_derive_seed_separates_round_and_client():
    assert derive_seed(0, 1, 2) != derive_seed(0, 2, 1)


def test_deep_update_merges_nested_sections():
    base = {'training': {'epochs': 40, 'seed': 0}, 'paths': {'output': 'runs/'}}
    merged = deep_update(base, {'training': {'epochs': 3}})
    assert merged == {'training': {'epochs': 3, 'seed': 0}, 'paths': {'output': 'runs/'}}
    assert base['training']['epochs'] == 40


def test_hash_arrays_sensitive_to_dtype_and_shape():
    a = np.arange(6, dtype=np.float64)
    assert hash_arrays([a]) == hash_arrays([a.copy()])
    assert hash_arrays([a]) != hash_arrays([a.reshape(2, 3)])
    assert hash_arrays([a]) != hash_arrays([a.astype(np.float32)])


def test_json_roundtrip_sorts_keys(tmp_path):
    path = tmp_path / 'sub' / 'x.json'
    save_json({'b': 1, 'a': [1, 2]}, str(path))
    assert list(json.loads(path.read_text())) == ['a', 'b']
    assert load_json(str(path)) == {'a': [1, 2], 'b': 1}

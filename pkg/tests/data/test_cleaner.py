import numpy as np
import pytest

from src.data.cleaner import FlowDataCleaner, FlowSchema, ingest_csv
from src.utils.errors import EmptyDatasetError, SchemaError

CSV = """dur,sbytes,proto,attack_cat
1.5,100,tcp,Normal
2.0,abc,udp,Normal
0.5,300,tcp,Exploits
,400,tcp,Normal
inf,500,tcp,Normal
3.0,600,tcp,Fuzzers
"""


@pytest.fixture
def flows_csv(tmp_path):
    path = tmp_path / 'flows.csv'
    path.write_text(CSV)
    return str(path)


@pytest.fixture
def schema():
    return FlowSchema.from_dict({
        'features': ['dur', 'sbytes'],
        'label_column': 'attack_cat',
        'label_mapping': {'Normal': 0},
        'default_label': 1,
    })


def test_ingest_drops_bad_rows(flows_csv, schema):
    ds = ingest_csv(flows_csv, schema)
    assert ds.n_rows == 3
    assert ds.dropped_rows == 3
    np.testing.assert_array_equal(ds.labels, [0, 1, 1])
    assert ds.feature_names == ('dur', 'sbytes')
    assert len(ds.manifest['sha256']) == 64


def test_unmapped_labels_dropped_without_default(flows_csv):
    schema = FlowSchema.from_dict({'features': ['dur'], 'label_column': 'attack_cat',
                                   'label_mapping': {'Normal': 0, 'Exploits': 1}})
    ds = ingest_csv(flows_csv, schema)
    np.testing.assert_array_equal(ds.labels, [0, 0, 1])


def test_missing_column(flows_csv):
    schema = FlowSchema.from_dict({'features': ['dur', 'dbytes']})
    with pytest.raises(SchemaError, match='dbytes'):
        ingest_csv(flows_csv, schema)


def test_schema_needs_features():
    with pytest.raises(SchemaError):
        FlowSchema.from_dict({'label_column': 'label'})


def test_from_header(flows_csv):
    schema = FlowSchema.from_header(flows_csv, label_column='attack_cat')
    assert schema.features == ['dur', 'sbytes', 'proto']
    assert schema.label_column == 'attack_cat'
    assert FlowSchema.from_header(flows_csv).label_column is None


def test_no_usable_rows(tmp_path):
    path = tmp_path / 'bad.csv'
    path.write_text("a,b\nx,y\n,\n")
    with pytest.raises(EmptyDatasetError):
        FlowDataCleaner(FlowSchema(features=['a', 'b'])).clean_all(str(path))


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        ingest_csv(str(tmp_path / 'absent.csv'), FlowSchema(features=['a']))

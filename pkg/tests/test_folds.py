import numpy as np
import pytest

from rulegnn.errors import StratificationError
from rulegnn.folds import load_folds, make_folds, save_folds
from rulegnn.graphs import GraphDataset, graph_from_edges


def dataset_with_classes(class_labels):
    class_labels = np.asarray(class_labels)
    graphs = [graph_from_edges([], node_count=1) for _ in class_labels]
    return GraphDataset(
        "toy", graphs, class_labels, num_classes=int(class_labels.max()) + 1
    )


class TestMakeFolds:
    def test_ten_folds_of_hundred(self):
        ds = dataset_with_classes([i % 2 for i in range(100)])
        spec = make_folds(ds, 10, seed=0)
        assert len(spec) == 10
        assert all(len(f.test) == 10 for f in spec.folds)
        all_test = np.sort(np.concatenate([f.test for f in spec.folds]))
        assert np.array_equal(all_test, np.arange(100))

    def test_five_folds(self):
        ds = dataset_with_classes([i % 10 for i in range(150)])
        spec = make_folds(ds, 5, seed=0)
        assert len(spec) == 5
        assert all(len(f.test) == 30 for f in spec.folds)

    def test_determinism(self):
        ds = dataset_with_classes([i % 3 for i in range(60)])
        a = make_folds(ds, 10, seed=7)
        b = make_folds(ds, 10, seed=7)
        for fa, fb in zip(a.folds, b.folds):
            assert np.array_equal(fa.train, fb.train)
            assert np.array_equal(fa.validation, fb.validation)
            assert np.array_equal(fa.test, fb.test)

    def test_validation_is_next_part(self):
        ds = dataset_with_classes([i % 2 for i in range(40)])
        spec = make_folds(ds, 4, seed=1)
        # fold f's validation set equals fold (f+1)'s test set
        for f in range(4):
            nxt = (f + 1) % 4
            assert np.array_equal(spec.folds[f].validation, spec.folds[nxt].test)

    def test_each_fold_partitions(self):
        ds = dataset_with_classes([i % 2 for i in range(40)])
        spec = make_folds(ds, 4, seed=1)
        for fold in spec.folds:
            joined = np.sort(np.concatenate([fold.train, fold.validation, fold.test]))
            assert np.array_equal(joined, np.arange(40))

    def test_stratification(self):
        ds = dataset_with_classes([0] * 80 + [1] * 20)
        spec = make_folds(ds, 10, seed=3)
        labels = ds.class_labels
        for fold in spec.folds:
            assert labels[fold.test].sum() == 2  # 2 of 10 per test part

    def test_small_class_rejected(self):
        ds = dataset_with_classes([0] * 50 + [1] * 5)
        with pytest.raises(StratificationError):
            make_folds(ds, 10, seed=0)

    def test_too_few_folds_rejected(self):
        ds = dataset_with_classes([0, 1] * 10)
        with pytest.raises(StratificationError):
            make_folds(ds, 1, seed=0)


class TestFoldFile:
    def test_round_trip(self, tmp_path):
        ds = dataset_with_classes([i % 2 for i in range(30)])
        spec = make_folds(ds, 3, seed=9)
        path = tmp_path / "folds.json"
        save_folds(spec, path)
        loaded = load_folds(path)
        assert loaded.seed == spec.seed
        for fa, fb in zip(spec.folds, loaded.folds):
            assert np.array_equal(fa.train, fb.train)
            assert np.array_equal(fa.validation, fb.validation)
            assert np.array_equal(fa.test, fb.test)
        loaded.validate(30)

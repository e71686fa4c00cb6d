import numpy as np
import pytest

from rulegnn.errors import ParseError, StructuralError
from rulegnn.graphs import GraphDataset, graph_from_edges
from rulegnn.tud_io import parse_tud_dataset, write_tud_dataset


def write_fixture(directory, name, a_lines, indicator, graph_labels, node_labels=None):
    (directory / f"{name}_A.txt").write_text("\n".join(a_lines) + "\n")
    (directory / f"{name}_graph_indicator.txt").write_text(
        "\n".join(str(v) for v in indicator) + "\n"
    )
    (directory / f"{name}_graph_labels.txt").write_text(
        "\n".join(str(v) for v in graph_labels) + "\n"
    )
    if node_labels is not None:
        (directory / f"{name}_node_labels.txt").write_text(
            "\n".join(str(v) for v in node_labels) + "\n"
        )


class TestParse:
    def test_triangle_plus_edge_fixture(self, tmp_path):
        # graph 1: triangle on nodes 1..3; graph 2: a single edge 4-5
        write_fixture(
            tmp_path,
            "two",
            ["1, 2", "2, 1", "2, 3", "3, 2", "1, 3", "3, 1", "4, 5", "5, 4"],
            [1, 1, 1, 2, 2],
            [6, 3],
        )
        ds = parse_tud_dataset(tmp_path, "two")
        assert [g.node_count for g in ds.graphs] == [3, 2]
        assert [g.edge_count for g in ds.graphs] == [3, 1]
        # constant label 0 when the node label file is absent
        assert all((g.node_labels == 0).all() for g in ds.graphs)
        # raw labels 6, 3 remap to 1, 0 preserving sorted raw order
        assert ds.class_labels.tolist() == [1, 0]
        assert ds.num_classes == 2

    def test_duplicate_and_reversed_edges_dedupe(self, tmp_path):
        write_fixture(tmp_path, "d", ["1, 2", "2, 1", "1, 2"], [1, 1], [0])
        ds = parse_tud_dataset(tmp_path, "d")
        assert ds.graphs[0].edge_count == 1

    def test_node_labels_read(self, tmp_path):
        write_fixture(tmp_path, "lab", ["1, 2"], [1, 1], [0], node_labels=[5, 7])
        ds = parse_tud_dataset(tmp_path, "lab")
        assert ds.graphs[0].node_labels.tolist() == [5, 7]

    def test_malformed_line_reports_file_and_line(self, tmp_path):
        write_fixture(tmp_path, "bad", ["1, 2", "oops"], [1, 1], [0])
        with pytest.raises(ParseError) as err:
            parse_tud_dataset(tmp_path, "bad")
        assert "bad_A.txt" in str(err.value)
        assert ":2:" in str(err.value)

    def test_cross_graph_edge_rejected(self, tmp_path):
        write_fixture(tmp_path, "x", ["1, 3"], [1, 1, 2], [0, 1])
        with pytest.raises(StructuralError):
            parse_tud_dataset(tmp_path, "x")

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(StructuralError):
            parse_tud_dataset(tmp_path, "nothing")


class TestRoundTrip:
    def build(self):
        graphs = [
            graph_from_edges([(0, 1), (1, 2), (0, 2)], node_count=3,
                             node_labels=[1, 2, 1]),
            graph_from_edges([(0, 1)], node_count=2, node_labels=[3, 3]),
            graph_from_edges([], node_count=1, node_labels=[2]),
        ]
        return GraphDataset("rt", graphs, np.asarray([0, 1, 0]), num_classes=2)

    def test_parse_write_parse_identity(self, tmp_path):
        ds = self.build()
        write_tud_dataset(ds, tmp_path / "rt")
        again = parse_tud_dataset(tmp_path / "rt", "rt")
        assert again == ds
        # serialize -> parse -> serialize is byte-stable
        write_tud_dataset(again, tmp_path / "rt2")
        for suffix in ("A", "graph_indicator", "graph_labels", "node_labels"):
            a = (tmp_path / "rt" / f"rt_{suffix}.txt").read_text()
            b = (tmp_path / "rt2" / f"rt_{suffix}.txt").read_text()
            assert a == b

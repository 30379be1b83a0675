from __future__ import annotations

import pytest

from evocd.ingest import ingest_contacts


def write(tmp_path, text: str):
    path = tmp_path / "contacts.csv"
    path.write_text(text)
    return path


class TestIngest:
    def test_weights_normalized_by_window_max(self, tmp_path):
        path = write(tmp_path, "0,1,2\n10,1,2\n20,2,3\n")
        g = ingest_contacts(path, window_seconds=60)
        assert len(g) == 1
        weights = {(u, v): w for u, v, w in g.snapshots[0].edges}
        assert weights[(1, 2)] == 1.0
        assert weights[(2, 3)] == 0.5

    def test_contacts_span_three_windows(self, tmp_path):
        path = write(tmp_path, "0,1,2\n65,1,2\n130,2,3\n")
        g = ingest_contacts(path, window_seconds=60)
        assert len(g) == 3
        assert all(s.n_edges == 1 for s in g.snapshots)

    def test_empty_window_retained(self, tmp_path):
        path = write(tmp_path, "0,1,2\n130,2,3\n")
        g = ingest_contacts(path, window_seconds=60)
        assert len(g) == 3
        assert g.snapshots[1].n_nodes == 0
        assert g.snapshots[1].n_edges == 0

    def test_header_tolerated(self, tmp_path):
        path = write(tmp_path, "timestamp,node_a,node_b\n0,1,2\n")
        g = ingest_contacts(path, window_seconds=60)
        assert g.meta["rejected_rows"] == 0
        assert g.snapshots[0].n_edges == 1

    def test_malformed_rows_counted(self, tmp_path):
        path = write(tmp_path, "0,1,2\nnot-a-time,1,2\n5,3\n7,4,4\n8,2,3\n")
        g = ingest_contacts(path, window_seconds=60)
        assert g.meta["rejected_rows"] == 3
        assert g.snapshots[0].n_edges == 2

    def test_empty_file_errors(self, tmp_path):
        path = write(tmp_path, "")
        with pytest.raises(ValueError, match="no valid contact rows"):
            ingest_contacts(path, window_seconds=60)

    def test_string_labels_mapped(self, tmp_path):
        path = write(tmp_path, "0,alice,bob\n10,bob,carol\n")
        g = ingest_contacts(path, window_seconds=60)
        label_map = g.meta["label_map"]
        assert set(label_map) == {"alice", "bob", "carol"}
        assert g.snapshots[0].n_nodes == 3

    def test_repeated_contacts_accumulate(self, tmp_path):
        path = write(tmp_path, "0,1,2\n1,2,1\n2,1,2\n3,1,3\n")
        g = ingest_contacts(path, window_seconds=60)
        weights = {(u, v): w for u, v, w in g.snapshots[0].edges}
        assert weights[(1, 2)] == 1.0
        assert weights[(1, 3)] == pytest.approx(1.0 / 3.0)

    def test_no_ground_truth(self, tmp_path):
        path = write(tmp_path, "0,1,2\n")
        assert ingest_contacts(path, window_seconds=60).ground_truth is None

    def test_window_validation(self, tmp_path):
        path = write(tmp_path, "0,1,2\n")
        with pytest.raises(ValueError):
            ingest_contacts(path, window_seconds=0)

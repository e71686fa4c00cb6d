"""Disk caches for preprocessing products, keyed by dataset and rule.

Layout on disk (one directory per dataset):

  <root>/<dataset>/distances.npz
      version, node_counts, flat  - per-graph distance matrices concatenated
  <root>/<dataset>/labeling_<descriptor>.npz
      version, offsets, labels, alphabet
  <root>/<dataset>/layouts_<descriptor>.npz
      version, n_weights, n_biases, in_dims, out_dims,
      entry_offsets, rows, cols, weight_idx,
      bias_offsets, bias_rows, bias_idx

All files are written atomically (temp file + rename). The version field
guards against stale formats; mismatching files are ignored and rebuilt.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .labeling import DatasetLabeling
from .layouts import RuleLayout

CACHE_VERSION = 1


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.,=-]", "_", name)


def _atomic_savez(path: Path, **arrays) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        np.savez(fh, **arrays)
    tmp.replace(path)


def _load_if_current(path: Path):
    if not path.exists():
        return None
    try:
        data = np.load(path, allow_pickle=False)
    except (OSError, ValueError):
        return None
    if int(data["version"]) != CACHE_VERSION:
        data.close()
        return None
    return data


class PreprocessCache:
    """Cache handle for one dataset under a root directory."""

    def __init__(self, root: str | Path, dataset_name: str):
        self.dir = Path(root) / _safe(dataset_name)

    # -- distances ---------------------------------------------------------

    def _distance_path(self) -> Path:
        return self.dir / "distances.npz"

    def get_distances(self) -> list[np.ndarray] | None:
        data = _load_if_current(self._distance_path())
        if data is None:
            return None
        counts = data["node_counts"]
        flat = data["flat"]
        out = []
        pos = 0
        for n in counts:
            n = int(n)
            out.append(flat[pos : pos + n * n].reshape(n, n))
            pos += n * n
        data.close()
        return out

    def put_distances(self, matrices: list[np.ndarray]) -> None:
        counts = np.asarray([m.shape[0] for m in matrices], dtype=np.int64)
        flat = (
            np.concatenate([m.reshape(-1) for m in matrices])
            if matrices
            else np.zeros(0, dtype=np.int32)
        )
        _atomic_savez(
            self._distance_path(),
            version=np.asarray(CACHE_VERSION),
            node_counts=counts,
            flat=flat.astype(np.int32),
        )

    # -- labelings ---------------------------------------------------------

    def _labeling_path(self, descriptor: str) -> Path:
        return self.dir / f"labeling_{_safe(descriptor)}.npz"

    def get_labeling(self, descriptor: str) -> DatasetLabeling | None:
        data = _load_if_current(self._labeling_path(descriptor))
        if data is None:
            return None
        offsets = data["offsets"]
        labels = data["labels"]
        arrays = [
            labels[offsets[i] : offsets[i + 1]].astype(np.int64)
            for i in range(len(offsets) - 1)
        ]
        alphabet = int(data["alphabet"])
        data.close()
        return DatasetLabeling(arrays, alphabet_size=alphabet, source=descriptor)

    def put_labeling(self, descriptor: str, labeling: DatasetLabeling) -> None:
        offsets = np.zeros(len(labeling.labels) + 1, dtype=np.int64)
        np.cumsum([len(a) for a in labeling.labels], out=offsets[1:])
        labels = (
            np.concatenate(labeling.labels)
            if labeling.labels
            else np.zeros(0, dtype=np.int64)
        )
        _atomic_savez(
            self._labeling_path(descriptor),
            version=np.asarray(CACHE_VERSION),
            offsets=offsets,
            labels=labels.astype(np.int32),
            alphabet=np.asarray(labeling.alphabet_size),
        )

    # -- layouts -----------------------------------------------------------

    def _layout_path(self, descriptor: str) -> Path:
        return self.dir / f"layouts_{_safe(descriptor)}.npz"

    def get_layouts(self, descriptor: str) -> list[RuleLayout] | None:
        data = _load_if_current(self._layout_path(descriptor))
        if data is None:
            return None
        eo = data["entry_offsets"]
        bo = data["bias_offsets"]
        layouts = []
        for i in range(len(eo) - 1):
            s, e = eo[i], eo[i + 1]
            bs, be = bo[i], bo[i + 1]
            layouts.append(
                RuleLayout(
                    out_dim=int(data["out_dims"][i]),
                    in_dim=int(data["in_dims"][i]),
                    rows=data["rows"][s:e],
                    cols=data["cols"][s:e],
                    weight_idx=data["weight_idx"][s:e],
                    bias_rows=data["bias_rows"][bs:be],
                    bias_idx=data["bias_idx"][bs:be],
                    weight_pool_size=int(data["n_weights"]),
                    bias_pool_size=int(data["n_biases"]),
                )
            )
        data.close()
        return layouts

    def put_layouts(self, descriptor: str, layouts: list[RuleLayout]) -> None:
        entry_offsets = np.zeros(len(layouts) + 1, dtype=np.int64)
        np.cumsum([l.nonzeros for l in layouts], out=entry_offsets[1:])
        bias_offsets = np.zeros(len(layouts) + 1, dtype=np.int64)
        np.cumsum([len(l.bias_rows) for l in layouts], out=bias_offsets[1:])

        def cat(parts, dtype=np.int32):
            parts = list(parts)
            return np.concatenate(parts) if parts else np.zeros(0, dtype=dtype)

        _atomic_savez(
            self._layout_path(descriptor),
            version=np.asarray(CACHE_VERSION),
            n_weights=np.asarray(layouts[0].weight_pool_size if layouts else 0),
            n_biases=np.asarray(layouts[0].bias_pool_size if layouts else 0),
            in_dims=np.asarray([l.in_dim for l in layouts], dtype=np.int64),
            out_dims=np.asarray([l.out_dim for l in layouts], dtype=np.int64),
            entry_offsets=entry_offsets,
            rows=cat(l.rows for l in layouts),
            cols=cat(l.cols for l in layouts),
            weight_idx=cat(l.weight_idx for l in layouts),
            bias_offsets=bias_offsets,
            bias_rows=cat(l.bias_rows for l in layouts),
            bias_idx=cat(l.bias_idx for l in layouts),
        )

"""Trained-model files.

Layout (little-endian)::

    b"GWMD" | u16 version=1 | u32 descriptor length | descriptor (UTF-8 JSON)
    | arrays as f64, in the order listed by the descriptor

The descriptor records the model spec, the feature pipeline, the payload
type with its topology (layer list for networks) and the name, shape and
in-memory dtype of every array.  Forest trees are stored as node arrays:
feature index, threshold, left child, right child and leaf class counts.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .. import nn
from ..errors import FormatError
from ..features import FeaturePipeline
from .base import ModelSpec, TrainedModel
from .elm import ElmScorer
from .forest import ForestScorer, Tree
from .gradient import NetworkScorer

MAGIC = b"GWMD"
VERSION = 1
_HEAD = struct.Struct("<4sHI")
_TREE_FIELDS = ("feature", "threshold", "left", "right", "value")


def _payload_arrays(payload):
    if isinstance(payload, NetworkScorer):
        net = payload.network
        desc = {
            "type": "network",
            "input_shape": list(net.input_shape),
            "layers": [layer.to_dict() for layer in net.layers],
        }
        arrays = [(f"layer{i}.param{j}", p) for i, group in enumerate(net.params) for j, p in enumerate(group)]
        return desc, arrays
    if isinstance(payload, ElmScorer):
        return {"type": "elm"}, [("w_in", payload.w_in), ("b_in", payload.b_in), ("w_out", payload.w_out)]
    if isinstance(payload, ForestScorer):
        arrays = [
            (f"tree{t}.{name}", getattr(tree, name))
            for t, tree in enumerate(payload.trees)
            for name in _TREE_FIELDS
        ]
        return {"type": "forest", "n_trees": len(payload.trees), "n_classes": payload.n_classes}, arrays
    raise TypeError(f"cannot serialise payload {type(payload).__name__}")


def save_model(model, path):
    payload_desc, arrays = _payload_arrays(model.payload)
    arrays = arrays + [(f"features.{k}", v) for k, v in model.features.arrays().items()]
    descriptor = {
        "spec": model.spec.to_dict(),
        "n_features": model.n_features,
        "n_classes": model.n_classes,
        "features": model.features.describe(),
        "payload": payload_desc,
        "meta": model.meta,
        "arrays": [{"name": name, "shape": list(np.shape(a)), "dtype": str(np.asarray(a).dtype)} for name, a in arrays],
    }
    blob = json.dumps(descriptor, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, len(blob)))
        fh.write(blob)
        for _, a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_model(path):
    data = Path(path).read_bytes()
    if len(data) < _HEAD.size:
        raise FormatError("file shorter than the model header", offset=len(data))
    magic, version, n_desc = _HEAD.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    if version != VERSION:
        raise FormatError(f"unsupported model version {version}", offset=4)
    end = _HEAD.size + n_desc
    if len(data) < end:
        raise FormatError("truncated descriptor", offset=len(data))
    try:
        desc = json.loads(data[_HEAD.size : end].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"descriptor is not valid JSON: {exc}", offset=_HEAD.size) from None

    arrays = {}
    offset = end
    for entry in desc["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = 8 * count
        if offset + nbytes > len(data):
            raise FormatError(f"truncated array {entry['name']}", offset=offset)
        a = np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(shape)
        arrays[entry["name"]] = a.astype(entry["dtype"])
        offset += nbytes
    if offset != len(data):
        raise FormatError("trailing bytes after the last array", offset=offset)

    spec = ModelSpec(**desc["spec"])
    feat_arrays = {k.split(".", 1)[1]: v for k, v in arrays.items() if k.startswith("features.")}
    features = FeaturePipeline.restore(desc["features"], feat_arrays)
    pdesc = desc["payload"]
    if pdesc["type"] == "network":
        layers = [nn.layer_from_dict(d) for d in pdesc["layers"]]
        params = [
            [arrays[f"layer{i}.param{j}"] for j in range(len(layer.param_shapes(None)))]
            for i, layer in enumerate(layers)
        ]
        net = nn.Network(layers, tuple(pdesc["input_shape"]), params=params, dtype=spec.dtype)
        payload = NetworkScorer(net)
    elif pdesc["type"] == "elm":
        payload = ElmScorer(arrays["w_in"], arrays["b_in"], arrays["w_out"])
    elif pdesc["type"] == "forest":
        trees = [Tree(*(arrays[f"tree{t}.{name}"] for name in _TREE_FIELDS)) for t in range(pdesc["n_trees"])]
        payload = ForestScorer(trees, pdesc["n_classes"])
    else:
        raise FormatError(f"unknown payload type {pdesc['type']!r}", offset=_HEAD.size)
    return TrainedModel(spec, desc["n_features"], payload, features, desc["n_classes"], desc.get("meta", {}))

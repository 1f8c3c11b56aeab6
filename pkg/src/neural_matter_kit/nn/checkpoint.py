#!/usr/bin/env python
"""
Versioned checkpoints: a JSON manifest plus a raw little-endian float64 payload.

    <dir>/checkpoint.json   format, version, model spec, tensor table, layer settings
    <dir>/checkpoint.bin    every tensor raveled in C order, in declaration order
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from neural_matter_kit.config.schema import ModelSpec
from neural_matter_kit.errors import ConsistencyError, DatasetIOError, FormatError
from neural_matter_kit.nn.model import (
    DenseLayer,
    DropoutLayer,
    EncoderLayer,
    Layer,
    Model,
    Params,
    PatchEmbedLayer,
    PoolLayer,
    PositionalLayer,
    YatDenseLayer,
    build_model,
)

logger = logging.getLogger(__name__)

FORMAT_NAME = "neural-matter-kit-checkpoint"
FORMAT_VERSION = 1
MANIFEST_FILE = "checkpoint.json"
PAYLOAD_FILE = "checkpoint.bin"
_DTYPE = np.dtype("<f8")

_LAYER_KINDS = {
    YatDenseLayer: "yat_dense",
    DenseLayer: "dense",
    DropoutLayer: "dropout",
    PatchEmbedLayer: "patch_embed",
    PositionalLayer: "positions",
    EncoderLayer: "encoder_block",
    PoolLayer: "global_avg_pool",
}


class TensorEntry(BaseModel):
    name: str
    shape: List[int]


class LayerEntry(BaseModel):
    name: str
    kind: str
    epsilon: Optional[float] = None
    scale_mode: Optional[str] = None
    alphas: Dict[str, float] = Field(
        default_factory=dict, description="Scale exponents owned by the layer"
    )


class CheckpointManifest(BaseModel):
    format: str = FORMAT_NAME
    version: int = FORMAT_VERSION
    model: ModelSpec
    tensors: List[TensorEntry]
    layers: List[LayerEntry]


def _layer_entry(layer: Layer, params: Params) -> LayerEntry:
    entry = LayerEntry(name=layer.name, kind=_LAYER_KINDS[type(layer)])
    if hasattr(layer, "epsilon"):
        entry.epsilon = float(layer.epsilon)
        entry.scale_mode = layer.scale_mode.value
    prefix = f"{layer.name}."
    entry.alphas = {
        name: float(value)
        for name, value in params.items()
        if name.startswith(prefix) and name.endswith("alpha")
    }
    return entry


def save_checkpoint(directory: Union[str, Path], model: Model, params: Params) -> Path:
    """
    Write params for model into directory.

    Args:
        directory: Target directory, created if missing
        model: Architecture the parameters belong to
        params: Parameter dictionary

    Returns:
        Path of the manifest file

    Raises:
        ConsistencyError, ShapeError: If params do not fit the model
    """
    model.check_params(params)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = list(model.param_shapes())
    manifest = CheckpointManifest(
        model=model.spec,
        tensors=[
            TensorEntry(name=name, shape=list(np.shape(params[name]))) for name in names
        ],
        layers=[_layer_entry(layer, params) for layer in model.layers],
    )
    payload = b"".join(
        np.ascontiguousarray(params[name], dtype=_DTYPE).tobytes() for name in names
    )
    manifest_path = directory / MANIFEST_FILE
    manifest_path.write_text(manifest.model_dump_json(indent=2))
    (directory / PAYLOAD_FILE).write_bytes(payload)
    logger.info(f"Saved checkpoint with {len(names)} tensors to {directory}")
    return manifest_path


def load_checkpoint(directory: Union[str, Path]) -> Tuple[Model, Params]:
    """
    Read a checkpoint and rebuild its model.

    Args:
        directory: Directory holding checkpoint.json and checkpoint.bin

    Returns:
        Tuple of (model, parameter dictionary)

    Raises:
        DatasetIOError: If a file is missing or unreadable
        FormatError: If the manifest is malformed or of another format/version
        ConsistencyError: If the payload size or tensor table disagrees with the
            model
    """
    directory = Path(directory)
    manifest_path = directory / MANIFEST_FILE
    payload_path = directory / PAYLOAD_FILE
    try:
        raw_manifest = manifest_path.read_text()
        payload = payload_path.read_bytes()
    except OSError as e:
        raise DatasetIOError(f"Cannot read checkpoint in {directory}: {e}") from e
    try:
        manifest = CheckpointManifest.model_validate_json(raw_manifest)
    except ValidationError as e:
        raise FormatError(f"Malformed checkpoint manifest {manifest_path}: {e}") from e
    if manifest.format != FORMAT_NAME or manifest.version != FORMAT_VERSION:
        raise FormatError(
            f"Unsupported checkpoint {manifest.format!r} version {manifest.version}, "
            f"expected {FORMAT_NAME!r} version {FORMAT_VERSION}"
        )

    model = build_model(manifest.model)
    expected = model.param_shapes()
    listed = {entry.name: tuple(entry.shape) for entry in manifest.tensors}
    if list(listed.items()) != list(expected.items()):
        raise ConsistencyError(
            f"Tensor table in {manifest_path} does not match the "
            f"{manifest.model.arch.value} model"
        )
    total = sum(int(np.prod(shape, dtype=np.int64)) for shape in expected.values())
    if len(payload) != total * _DTYPE.itemsize:
        raise ConsistencyError(
            f"Payload holds {len(payload)} bytes, expected {total * _DTYPE.itemsize}"
        )

    values = np.frombuffer(payload, dtype=_DTYPE)
    params: Params = {}
    offset = 0
    for name, shape in expected.items():
        size = int(np.prod(shape, dtype=np.int64))
        params[name] = values[offset:offset + size].astype(np.float64).reshape(shape)
        offset += size
    logger.info(f"Loaded checkpoint from {directory} ({total} values)")
    return model, params

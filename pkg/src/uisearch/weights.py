"""Versioned binary serialization of trained model weights.

File layout (all integers little-endian):

    magic   4 bytes  b"UIWT"
    version u32
    hlen    u32      header length in bytes
    header  hlen bytes of UTF-8 JSON:
              {"format_version": int, "config": {...},
               "arrays": [{"group": "ae"|"label", "name": str, "shape": [..]}]}
    data    concatenated float32 little-endian array values, header order

Loading rebuilds the expected parameter table from the stored config and
rejects any shape or length mismatch, so a weights file can never silently
construct a model of the wrong architecture.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import WeightsFormatError
from .net import AutoencoderConfig, ImageAutoencoder, LabelNet

MAGIC = b"UIWT"
FORMAT_VERSION = 1


@dataclass
class ModelWeights:
    """Serialized parameters for both networks plus their config."""

    config: AutoencoderConfig
    ae: dict[str, np.ndarray]
    label: dict[str, np.ndarray]
    format_version: int = FORMAT_VERSION

    @classmethod
    def from_models(cls, model: ImageAutoencoder, labelnet: LabelNet) -> "ModelWeights":
        return cls(
            config=model.config,
            ae={name: p.value.copy() for name, p in model.params.items()},
            label={name: p.value.copy() for name, p in labelnet.params.items()},
        )

    def build_models(self) -> tuple[ImageAutoencoder, LabelNet]:
        """Instantiate both networks carrying these weights."""
        model = ImageAutoencoder(self.config)
        labelnet = LabelNet(self.config)
        for net, group in ((model, self.ae), (labelnet, self.label)):
            for name, p in net.params.items():
                if name not in group:
                    raise WeightsFormatError(f"weights missing parameter {name!r}")
                if group[name].shape != p.value.shape:
                    raise WeightsFormatError(
                        f"parameter {name!r}: stored shape {group[name].shape} "
                        f"!= expected {p.value.shape}"
                    )
                p.value = group[name].astype(self.config.np_dtype)
        return model, labelnet


def expected_shapes(config: AutoencoderConfig) -> list[tuple[str, str, tuple[int, ...]]]:
    """(group, name, shape) triples implied by a config, in file order."""
    model = ImageAutoencoder(config)
    labelnet = LabelNet(config)
    out = [("ae", name, p.value.shape) for name, p in model.params.items()]
    out += [("label", name, p.value.shape) for name, p in labelnet.params.items()]
    return out


def save_weights(weights: ModelWeights, path: str | Path) -> None:
    arrays = []
    blobs = []
    for group, store in (("ae", weights.ae), ("label", weights.label)):
        for name, value in store.items():
            arrays.append({"group": group, "name": name, "shape": list(value.shape)})
            blobs.append(np.ascontiguousarray(value, dtype="<f4").tobytes())
    header = json.dumps(
        {
            "format_version": weights.format_version,
            "config": asdict(weights.config),
            "arrays": arrays,
        },
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", weights.format_version, len(header)))
        f.write(header)
        for blob in blobs:
            f.write(blob)


def load_weights(path: str | Path) -> ModelWeights:
    """Read and validate a weights file.

    Raises:
        WeightsFormatError: bad magic, version, header, or any shape/length
            disagreement with the stored config.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != MAGIC:
        raise WeightsFormatError(f"{path}: not a weights file")
    version, hlen = struct.unpack("<II", raw[4:12])
    if version != FORMAT_VERSION:
        raise WeightsFormatError(f"{path}: unsupported format version {version}")
    if len(raw) < 12 + hlen:
        raise WeightsFormatError(f"{path}: truncated header")
    try:
        header = json.loads(raw[12:12 + hlen].decode("utf-8"))
        config = AutoencoderConfig(**header["config"])
        arrays = header["arrays"]
    except (ValueError, KeyError, TypeError) as e:
        raise WeightsFormatError(f"{path}: bad header: {e}") from e

    expected = expected_shapes(config)
    declared = [(a.get("group"), a.get("name"), tuple(a.get("shape", ()))) for a in arrays]
    if declared != expected:
        raise WeightsFormatError(
            f"{path}: stored parameter table does not match the stored config"
        )

    offset = 12 + hlen
    ae: dict[str, np.ndarray] = {}
    label: dict[str, np.ndarray] = {}
    for group, name, shape in expected:
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 4
        if offset + nbytes > len(raw):
            raise WeightsFormatError(f"{path}: truncated data for {name!r}")
        value = np.frombuffer(raw, dtype="<f4", count=count, offset=offset).reshape(shape).copy()
        (ae if group == "ae" else label)[name] = value
        offset += nbytes
    if offset != len(raw):
        raise WeightsFormatError(f"{path}: trailing bytes after parameter data")
    return ModelWeights(config=config, ae=ae, label=label, format_version=version)

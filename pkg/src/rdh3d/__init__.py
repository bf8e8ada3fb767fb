"""Separable reversible data hiding in encrypted 3D triangle meshes."""

from .cipher import (
    KeyMaterial,
    KeyRole,
    crypt_payload,
    decrypt_mesh,
    encrypt_mesh,
    keystream,
)
from .codec import embed, extract, recover
from .container import (
    MarkedContainer,
    container_mesh,
    read_container,
    read_container_file,
    write_container,
    write_container_file,
)
from .errors import (
    CapacityError,
    ConfigError,
    ContainerError,
    DomainError,
    MeshParseError,
    Rdh3dError,
)
from .mesh_io import Mesh, parse_mesh, read_mesh_file, write_mesh, write_mesh_file
from .metrics import FidelityReport, embedding_rate, hausdorff, snr
from .partition import Partition, partition
from .predictor import (
    PredictionReport,
    analyze,
    choose_n,
    max_prefix_len,
    predict_bit,
)
from .quantize import (
    QuantizedMesh,
    bit_length,
    bits_of,
    dequantize,
    quantize,
    word_of,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ConfigError",
    "ContainerError",
    "DomainError",
    "FidelityReport",
    "KeyMaterial",
    "KeyRole",
    "MarkedContainer",
    "Mesh",
    "MeshParseError",
    "Partition",
    "PredictionReport",
    "QuantizedMesh",
    "Rdh3dError",
    "analyze",
    "bit_length",
    "bits_of",
    "choose_n",
    "container_mesh",
    "crypt_payload",
    "decrypt_mesh",
    "dequantize",
    "embed",
    "embedding_rate",
    "encrypt_mesh",
    "extract",
    "hausdorff",
    "keystream",
    "max_prefix_len",
    "parse_mesh",
    "partition",
    "predict_bit",
    "quantize",
    "read_container",
    "read_container_file",
    "read_mesh_file",
    "recover",
    "snr",
    "word_of",
    "write_container",
    "write_container_file",
    "write_mesh",
    "write_mesh_file",
]

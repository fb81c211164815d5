#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Model checkpoints

Layout (all little-endian):
    b"EBDN" | u32 version | u8 fusion tag | u16 len + arch name (UTF-8)
    u32 layer count | per layer: u32 m, u32 n, u8 visible kind
    u32 head count  | per head layer: u32 in, u32 out, u8 activation
    u8 has-optimizer flag
    per layer:      W (m*n, row-major), b (m), c (n), sigma (m; ones for bernoulli)
    per head layer: weights (in*out, row-major), bias (out)
    if flagged:     u64 step | u32 count | per entry: u16 len + name,
                    u32 rows, u32 cols | then m, v payloads per entry
All payloads are f64.
"""

import io
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from config.settings import ARCH_PRESETS
from converters.base_converter import BaseConverter
from core.dbn import DbnStack
from core.errors import DataError
from core.fusion import FusionMode
from core.head import Activation, AdamState, DenseLayer
from core.rbm import CdConfig, RbmParams, VisibleKind

MAGIC = b'EBDN'
VERSION = 1

PREAMBLE = struct.Struct('<4sIB')
U8 = struct.Struct('<B')
U16 = struct.Struct('<H')
U32 = struct.Struct('<I')
U64 = struct.Struct('<Q')
LAYER = struct.Struct('<IIB')
ENTRY_SHAPE = struct.Struct('<II')


@dataclass
class Checkpoint:
    stack: DbnStack
    head: List[DenseLayer] = field(default_factory=list)
    adam: Optional[AdamState] = None


def _write_array(handle, array: np.ndarray) -> None:
    handle.write(np.ascontiguousarray(array, dtype='<f8').tobytes())


class _Reader:
    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.pos = 0
        self.path = path

    def fail(self, message: str):
        raise DataError(message, context={'path': str(self.path), 'offset': self.pos})

    def unpack(self, fmt: struct.Struct):
        if self.pos + fmt.size > len(self.data):
            self.fail("Truncated checkpoint header")
        values = fmt.unpack_from(self.data, self.pos)
        self.pos += fmt.size
        return values

    def text(self) -> str:
        (length,) = self.unpack(U16)
        if self.pos + length > len(self.data):
            self.fail("Truncated checkpoint string")
        raw = self.data[self.pos:self.pos + length]
        self.pos += length
        return raw.decode('utf-8')

    def array(self, shape) -> np.ndarray:
        count = int(np.prod(shape))
        end = self.pos + 8 * count
        if end > len(self.data):
            self.fail("Checkpoint payload shorter than header declares")
        values = np.frombuffer(self.data, dtype='<f8', count=count, offset=self.pos)
        self.pos = end
        return values.astype(np.float64).reshape(shape)


def _cd_configs(arch_name: str, n_layers: int) -> List[CdConfig]:
    preset = ARCH_PRESETS.get(arch_name)
    if preset is not None and len(preset['hidden']) == n_layers:
        return [CdConfig(learning_rate=lr, momentum=mom)
                for lr, mom in zip(preset['learning_rate'], preset['momentum'])]
    return [CdConfig() for _ in range(n_layers)]


class CheckpointConverter(BaseConverter):
    """DBN stack, classification head and optional Adam state"""

    name = 'checkpoint'

    def encode(self, checkpoint: Checkpoint) -> bytes:
        stack = checkpoint.stack
        out = io.BytesIO()
        out.write(PREAMBLE.pack(MAGIC, VERSION, stack.fusion_mode.tag))
        arch = stack.arch_name.encode('utf-8')
        out.write(U16.pack(len(arch)))
        out.write(arch)
        out.write(U32.pack(len(stack.layers)))
        for layer in stack.layers:
            out.write(LAYER.pack(layer.n_visible, layer.n_hidden, layer.visible_kind.tag))
        out.write(U32.pack(len(checkpoint.head)))
        for layer in checkpoint.head:
            out.write(LAYER.pack(layer.n_in, layer.n_out, layer.activation.tag))
        out.write(U8.pack(1 if checkpoint.adam is not None else 0))

        for layer in stack.layers:
            _write_array(out, layer.W)
            _write_array(out, layer.b)
            _write_array(out, layer.c)
            _write_array(out, layer.sigma if layer.sigma is not None else np.ones(layer.n_visible))
        for layer in checkpoint.head:
            _write_array(out, layer.weights)
            _write_array(out, layer.bias)

        if checkpoint.adam is not None:
            adam = checkpoint.adam
            out.write(U64.pack(adam.t))
            out.write(U32.pack(len(adam.names)))
            for name, moment in zip(adam.names, adam.m):
                encoded = name.encode('utf-8')
                out.write(U16.pack(len(encoded)))
                out.write(encoded)
                # cols == 0 marks a vector
                rows, cols = moment.shape if moment.ndim == 2 else (moment.size, 0)
                out.write(ENTRY_SHAPE.pack(rows, cols))
            for m, v in zip(adam.m, adam.v):
                _write_array(out, m)
                _write_array(out, v)
        return out.getvalue()

    def decode(self, data: bytes, path: Path = Path('<memory>')) -> Checkpoint:
        reader = _Reader(data, path)
        magic, version, fusion_tag = reader.unpack(PREAMBLE)
        if magic != MAGIC:
            reader.fail("Not a checkpoint (bad magic)")
        if version != VERSION:
            reader.fail(f"Unsupported checkpoint version {version}")
        fusion_mode = FusionMode.from_tag(fusion_tag)
        arch_name = reader.text()
        (n_layers,) = reader.unpack(U32)
        layer_dims = [reader.unpack(LAYER) for _ in range(n_layers)]
        (n_head,) = reader.unpack(U32)
        head_dims = [reader.unpack(LAYER) for _ in range(n_head)]
        (has_adam,) = reader.unpack(U8)

        layers = []
        for m, n, kind_tag in layer_dims:
            W = reader.array((m, n))
            b = reader.array((m,))
            c = reader.array((n,))
            sigma = reader.array((m,))
            kind = VisibleKind.from_tag(kind_tag)
            layers.append(RbmParams(W, b, c, kind, sigma if kind is VisibleKind.GAUSSIAN else None))
        head = []
        for n_in, n_out, activation_tag in head_dims:
            weights = reader.array((n_in, n_out))
            bias = reader.array((n_out,))
            head.append(DenseLayer(weights, bias, Activation.from_tag(activation_tag)))

        adam = None
        if has_adam:
            (t,) = reader.unpack(U64)
            (count,) = reader.unpack(U32)
            entries = []
            for _ in range(count):
                name = reader.text()
                rows, cols = reader.unpack(ENTRY_SHAPE)
                entries.append((name, (rows,) if cols == 0 else (rows, cols)))
            m_list, v_list = [], []
            for _, shape in entries:
                m_list.append(reader.array(shape))
                v_list.append(reader.array(shape))
            adam = AdamState([name for name, _ in entries], m_list, v_list, int(t))

        if reader.pos != len(data):
            reader.fail("Trailing bytes after checkpoint payload")
        try:
            stack = DbnStack(layers, fusion_mode, _cd_configs(arch_name, n_layers), arch_name)
        except Exception as e:
            raise DataError(f"Checkpoint violates stack invariants: {e}", context={'path': str(path)}) from None
        return Checkpoint(stack, head, adam)

    def read(self, path) -> Checkpoint:
        path = self.validate_input(path)
        checkpoint = self.decode(path.read_bytes(), path)
        self.logger.debug(f"Loaded checkpoint {path} ({checkpoint.stack.arch_name}, "
                          f"{checkpoint.stack.fusion_mode.value}, layers {checkpoint.stack.sizes})")
        return checkpoint

    def write(self, checkpoint: Checkpoint, path) -> Path:
        path = self.ensure_output_dir(path)
        path.write_bytes(self.encode(checkpoint))
        self.logger.info(f"Checkpoint saved: {path}")
        return path

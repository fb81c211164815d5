import json
import struct

import numpy as np
import pytest

from config.settings import ARCH_PRESETS
from converters import (
    Checkpoint, CheckpointConverter, ConverterFactory, FusedCacheConverter, PgmConverter, StatsConverter,
    get_converter,
)
from converters.base_converter import BaseConverter
from core.dbn import build_custom_stack, build_stack
from core.errors import DataError
from core.fusion import FrameTensor, FusionMode
from core.head import FinetuneConfig, build_head, finetune
from core.numerics import RngStream
from core.pipeline import FrameStats, build_fused_rows, load_manifest

LARGE_PRESETS = {'iota', 'zeta'}


def small_checkpoint(with_adam=True):
    stack = build_custom_stack([6, 4], [0.5, 0.5], [1e-3, 1e-3], FusionMode.GRADIENT, 9, RngStream(0))
    head = build_head(stack.top_dim, 3, RngStream(1))
    if not with_adam:
        return Checkpoint(stack, head)
    rows = RngStream(2).normal((12, 9))
    labels = np.arange(12) % 3
    result = finetune(stack, head, FinetuneConfig(head_lr=1e-2, unfrozen_dbn_lr=1e-3, epochs=1, batch_size=4),
                      rows, labels, RngStream(3))
    return Checkpoint(result.stack, result.head, result.adam)


class TestCheckpoint:
    @pytest.mark.parametrize('arch', [
        pytest.param(name, marks=pytest.mark.slow) if name in LARGE_PRESETS else name
        for name in sorted(ARCH_PRESETS)
    ])
    def test_presets_round_trip_bitwise(self, arch, tmp_path):
        converter = CheckpointConverter()
        stack = build_stack(arch, FusionMode.AGGREGATIVE, input_dim=3, rng=RngStream(5))
        path = converter.write(Checkpoint(stack), tmp_path / f"{arch}.ebdn")
        loaded = converter.read(path)
        assert loaded.stack.arch_name == arch
        assert loaded.stack.fusion_mode is FusionMode.AGGREGATIVE
        assert loaded.stack.fingerprints() == stack.fingerprints()
        assert converter.encode(loaded) == path.read_bytes()
        assert [cfg.learning_rate for cfg in loaded.stack.per_layer_cd] == ARCH_PRESETS[arch]['learning_rate']

    def test_head_and_adam(self, tmp_path):
        converter = CheckpointConverter()
        checkpoint = small_checkpoint()
        loaded = converter.read(converter.write(checkpoint, tmp_path / 'model.ebdn'))
        assert len(loaded.head) == 2
        for a, b in zip(loaded.head, checkpoint.head):
            assert a.weights.tobytes() == b.weights.tobytes()
            assert a.activation is b.activation
        assert loaded.adam.names == checkpoint.adam.names
        assert loaded.adam.t == checkpoint.adam.t == 3
        for a, b in zip(loaded.adam.v, checkpoint.adam.v):
            assert a.shape == b.shape and a.tobytes() == b.tobytes()
        assert converter.encode(loaded) == converter.encode(checkpoint)

    def test_without_adam(self):
        converter = CheckpointConverter()
        loaded = converter.decode(converter.encode(small_checkpoint(with_adam=False)))
        assert loaded.adam is None and len(loaded.head) == 2

    def test_header_layout(self):
        data = CheckpointConverter().encode(small_checkpoint(with_adam=False))
        magic, version, fusion_tag = struct.unpack_from('<4sIB', data, 0)
        assert (magic, version, fusion_tag) == (b'EBDN', 1, FusionMode.GRADIENT.tag)

    def test_bad_magic(self):
        data = bytearray(CheckpointConverter().encode(small_checkpoint(with_adam=False)))
        data[:4] = b'NOPE'
        with pytest.raises(DataError, match='magic'):
            CheckpointConverter().decode(bytes(data))

    def test_bad_version(self):
        data = bytearray(CheckpointConverter().encode(small_checkpoint(with_adam=False)))
        struct.pack_into('<I', data, 4, 99)
        with pytest.raises(DataError, match='version'):
            CheckpointConverter().decode(bytes(data))

    def test_truncated(self):
        data = CheckpointConverter().encode(small_checkpoint())
        with pytest.raises(DataError):
            CheckpointConverter().decode(data[:-3])

    def test_trailing_bytes(self):
        data = CheckpointConverter().encode(small_checkpoint())
        with pytest.raises(DataError, match='Trailing'):
            CheckpointConverter().decode(data + b'\x00')

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            CheckpointConverter().read(tmp_path / 'absent.ebdn')


class TestStats:
    def test_round_trip(self, tmp_path):
        stats = FrameStats(np.array([0.1, -2.0, 3.5]), np.array([1.0, 0.0, 2.5]))
        loaded = StatsConverter().read(StatsConverter().write(stats, tmp_path / 's.ebst'))
        assert loaded.mean.tobytes() == stats.mean.tobytes()
        assert loaded.std.tobytes() == stats.std.tobytes()

    def test_bad_length(self, tmp_path):
        path = StatsConverter().write(FrameStats(np.zeros(4), np.ones(4)), tmp_path / 's.ebst')
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(DataError):
            StatsConverter().read(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / 's.ebst'
        path.write_bytes(b'XXXX' + bytes(12))
        with pytest.raises(DataError, match='magic'):
            StatsConverter().read(path)


class TestFusedCache:
    def test_round_trip(self, blob_manifest, tmp_path):
        fused = build_fused_rows(load_manifest(blob_manifest), FusionMode.AGGREGATIVE, k=4)
        converter = FusedCacheConverter()
        loaded = converter.read(converter.write(fused, tmp_path / 'rows'))
        assert loaded.fusion_mode is FusionMode.AGGREGATIVE
        assert loaded.n_classes == 3
        assert loaded.train.rows.tobytes() == fused.train.rows.tobytes()
        assert loaded.test.clip_ids == fused.test.clip_ids
        np.testing.assert_array_equal(loaded.test.clip_index, fused.test.clip_index)
        assert loaded.fused_stats.mean.tobytes() == fused.fused_stats.mean.tobytes()
        assert loaded.meta['frames_per_clip'] == 4

    def test_missing_meta(self, tmp_path):
        with pytest.raises(DataError, match='meta.json'):
            FusedCacheConverter().read(tmp_path)

    def test_version(self, blob_manifest, tmp_path):
        fused = build_fused_rows(load_manifest(blob_manifest), FusionMode.GRADIENT, k=3)
        directory = FusedCacheConverter().write(fused, tmp_path / 'rows')
        meta = json.loads((directory / 'meta.json').read_text())
        meta['version'] = 7
        (directory / 'meta.json').write_text(json.dumps(meta))
        with pytest.raises(DataError, match='version'):
            FusedCacheConverter().read(directory)


class TestPgmConverter:
    def test_round_trip(self, tmp_path):
        frame = FrameTensor.from_image(np.array([[0.0, 1.0], [0.2, 0.6]]))
        converter = PgmConverter()
        loaded = converter.read(converter.write(frame, tmp_path / 'f.pgm'))
        assert loaded.shape == (2, 2)
        assert np.max(np.abs(loaded.values - frame.values)) <= 0.5 / 255 + 1e-12


class TestFactory:
    @pytest.fixture(autouse=True)
    def isolated_registry(self, monkeypatch):
        monkeypatch.setattr(ConverterFactory, '_custom_converters', {})

    def test_builtin(self):
        assert isinstance(get_converter('checkpoint'), CheckpointConverter)
        assert isinstance(get_converter('cache'), FusedCacheConverter)
        assert isinstance(get_converter('stats'), StatsConverter)

    def test_unknown(self):
        assert get_converter('mp4') is None

    def test_register_custom(self):
        class Dummy(BaseConverter):
            name = 'dummy'

            def read(self, path):
                return path

            def write(self, obj, path):
                return path

        assert get_converter('dummy') is None
        assert ConverterFactory.register_converter('dummy', Dummy)
        assert isinstance(get_converter('dummy'), Dummy)

    def test_custom_takes_precedence(self):
        class QuietCheckpoint(CheckpointConverter):
            pass

        assert ConverterFactory.register_converter('checkpoint', QuietCheckpoint)
        assert type(get_converter('checkpoint')) is QuietCheckpoint

    def test_register_rejects_non_converter(self):
        assert not ConverterFactory.register_converter('bad', dict)

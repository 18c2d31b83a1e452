"""Tests for size accounting and the benchmark runner."""

import json
from pathlib import Path
import random

import pytest

from he_compress.config import BenchConfig, Config, ReportedRow
from he_compress.sizes_bench import (
    BenchmarkReport,
    compressed_ct_bytes,
    discrepancy_flags,
    expansion_factor,
    reduction_percent,
    render_machine,
    render_text_table,
    run_benchmark,
    size_report,
)


def test_compressed_size_follows_key_size():
    assert compressed_ct_bytes(3072) == 768
    assert compressed_ct_bytes(512) == 128
    assert compressed_ct_bytes(14) == 4


def test_reduction_percent():
    assert reduction_percent(768, 8192) == pytest.approx(90.625)
    assert reduction_percent(768, 768) == 0.0
    # Compression does not pay for tiny ciphertexts
    assert reduction_percent(768, 24) == 0.0


def test_expansion_factor():
    assert expansion_factor(768, 4) == 1536.0


def test_n630_sizes(n630):
    report = size_report(n630, 3072)
    assert report.param_label == "n630"
    assert report.scheme == "lwe"
    assert report.uncompressed_ct_bytes == 5048
    assert report.uncompressed_ct_bytes_bitpacked == 5048
    assert report.seeded_ct_bytes == 24
    assert report.compressed_ct_bytes == 768
    assert report.encrypted_key_bytes == 483840
    assert report.reduction_percent == pytest.approx(84.79, abs=0.01)
    assert report.batch_capacity == 22
    assert report.expansion_compressed == 1536.0
    assert report.flags == []


def test_rlwe_sizes(config):
    n1024 = size_report(config.parameter_set("N1024"), 3072)
    assert n1024.uncompressed_ct_bytes == 8192
    # 27-bit residues pack tighter than their 4-byte encoding
    assert n1024.uncompressed_ct_bytes_bitpacked == 2 * 1024 * 27 // 8
    assert n1024.seeded_ct_bytes == 16 + 1024 * 4
    assert n1024.reduction_percent == pytest.approx(90.625)
    assert n1024.encrypted_key_bytes == 786432

    assert size_report(config.parameter_set("N8192"), 3072).encrypted_key_bytes == 6291456


def test_capacity_at_other_key_sizes(config):
    assert size_report(config.parameter_set("toy-lwe"), 512).batch_capacity == 36
    assert size_report(config.parameter_set("ring16"), 512).batch_capacity == 8
    # Below the compatibility bound the report shows 0 instead of raising
    assert size_report(config.parameter_set("toy-lwe"), 14).batch_capacity == 0
    assert size_report(config.parameter_set("n630"), 128).batch_capacity == 0


def test_sizes_grow_with_dimension(config):
    reports = [size_report(config.parameter_set(label), 3072) for label in ["N1024", "N2048", "N4096", "N8192"]]
    keys = [r.encrypted_key_bytes for r in reports]
    assert keys == sorted(keys)
    assert len({r.compressed_ct_bytes for r in reports}) == 1


def test_flags_against_reference(n630, config):
    bench = BenchConfig()
    close = ReportedRow(uncompressed_kb=5, compressed_bytes=768, encrypted_key_kb=483, reduction_percent=86.0)
    assert size_report(n630, 3072, close, bench).flags == []

    far = ReportedRow(uncompressed_kb=2.5, compressed_bytes=767, encrypted_key_kb=786, reduction_percent=70.0)
    report = size_report(config.parameter_set("N1024"), 3072, far, bench)
    assert report.flags == ["compressed_size", "uncompressed_size", "reduction"]


def test_encrypted_key_flag(n630):
    report = size_report(n630, 3072, ReportedRow(encrypted_key_kb=400), BenchConfig())
    assert report.flags == ["encrypted_key"]
    assert discrepancy_flags(report, None, BenchConfig()) == []


def test_run_benchmark_sizes_only(config):
    report = run_benchmark(config.group("table1"), 3072, 1, config=config, timings=False)
    assert [r.param_label for r in report.reports] == ["n630", "n750"]
    assert all(r.key_encryption_s is None and r.compression_s is None for r in report.reports)


def test_run_benchmark_empty():
    report = run_benchmark([], 3072, 1, config=Config())
    assert report == BenchmarkReport(3072, 1)


def test_run_benchmark_rejects_zero_trials():
    with pytest.raises(ValueError):
        run_benchmark(["n630"], 3072, 0, config=Config())


def test_run_benchmark_timings(config, keypair_512):
    report = run_benchmark(["toy-lwe", "ring16"], 512, 2, config=config, rng=random.Random(5), keypair=keypair_512)
    for entry in report.reports:
        assert entry.key_encryption_s is not None and entry.key_encryption_s >= 0
        assert entry.compression_s is not None and entry.compression_s >= 0


def test_run_benchmark_skips_incompatible_timings(config, toy_keypair):
    # 14-bit key is too small for ring16: sizes are reported, timings are not
    report = run_benchmark(["toy-lwe", "ring16"], 14, 1, config=config, rng=random.Random(5), keypair=toy_keypair)
    toy, ring = report.reports
    assert toy.compression_s is not None
    assert ring.compression_s is None


def test_render_text_table(config):
    report = run_benchmark(["n630", "N1024"], 3072, 1, config=config, timings=False)
    text = render_text_table(report)
    lines = text.splitlines()
    assert lines[0].startswith("set")
    assert "n630" in lines[2]
    assert "483.8" in lines[2]
    assert "84.79%" in lines[2]
    assert "90.62%" in lines[3] or "90.63%" in lines[3]
    assert lines[-1] == "(additive key: 3072 bits, 1 trial(s); sizes in bytes)"


def test_render_machine():
    config = Config.load(Path(__file__).resolve().parent.parent / "config.yaml")
    report = run_benchmark(["n630"], 3072, 1, config=config, timings=False)
    data = json.loads(render_machine(report))
    assert data["ahe_bits"] == 3072
    (row,) = data["reports"]
    assert row["param_label"] == "n630"
    assert row["encrypted_key_bytes"] == 483840
    assert row["reported"]["compressed_bytes"] == 768

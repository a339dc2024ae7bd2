"""Batch dataset construction with a reproducible manifest.

Every source image gets an order-independent seed derived from the master
seed and its canonical relative path, so results are byte-identical no matter
how many workers run or how the corpus is shuffled on disk. Supervision maps
are computed from the quantized planes that actually ship in the output
files, which lets verification recompute them exactly.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from importlib import resources
from pathlib import Path, PurePosixPath

import jsonschema
import numpy as np

from .errors import ConfigurationError, ContractError
from .fusion import FusionConfig, amplify_contrast
from .image import dequantize, load_image, quantize, save_image
from .selection import SelectionConfig, select
from .simulation import (
    NoiseParams,
    NoiseSampling,
    SimulationParams,
    darken,
    sample_noise_params,
    sample_params,
    synthesize_noise,
)
from .supervision import load_map, noise_map, save_map, ue_attention_map

WORKERS_ENV = "LOWLIGHT_FORGE_WORKERS"
MANIFEST_NAME = "manifest.json"
SCHEMA_VERSION = "1"

SOURCE_EXTENSIONS = {".png", ".jpg", ".jpeg"}

_OUTPUT_KINDS = ("dark", "noisy", "attention", "noise_map", "high_contrast")

# recomputed float maps may differ from their 16-bit stored form by half a
# code value plus float slack
MAP_TOLERANCE = 0.5 / 65535 + 1e-9

_VERIFY_SAMPLE_EVERY = 100


@dataclass
class PipelineConfig:
    input_dir: str
    output_dir: str
    master_seed: int = 0
    workers: int = 1
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    noise: NoiseSampling = field(default_factory=NoiseSampling)
    emit_maps: bool = True
    emit_high_contrast: bool = True

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        if self.master_seed < 0:
            raise ConfigurationError(f"master_seed must be >= 0, got {self.master_seed}")

    def to_dict(self) -> dict:
        # worker count is a scheduling knob with no effect on the outputs, so
        # it stays out of the recorded snapshot to keep manifests identical
        # across worker counts
        data = asdict(self)
        data.pop("workers")
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        data = copy.deepcopy(dict(data))
        sel = data.get("selection", {})
        fus = dict(data.get("fusion", {}))
        for key in ("gamma_range", "saturation_range"):
            if key in fus:
                fus[key] = tuple(fus[key])
        noi = dict(data.get("noise", {}))
        for key in ("sigma_p2_range", "sigma_g_range"):
            if key in noi:
                noi[key] = tuple(noi[key])
        return cls(
            input_dir=data["input_dir"],
            output_dir=data["output_dir"],
            master_seed=data.get("master_seed", 0),
            workers=data.get("workers", 1),
            selection=SelectionConfig(**sel),
            fusion=FusionConfig(**fus),
            noise=NoiseSampling(**noi),
            emit_maps=data.get("emit_maps", True),
            emit_high_contrast=data.get("emit_high_contrast", True),
        )


@dataclass
class DatasetRecord:
    source: str
    record_seed: int
    selected: bool
    selection: dict | None = None
    error: str | None = None
    sim_params: dict | None = None
    noise_params: dict | None = None
    dark: str | None = None
    noisy: str | None = None
    attention: str | None = None
    noise_map: str | None = None
    high_contrast: str | None = None


def record_seed(master_seed: int, source: str) -> int:
    """Stable 64-bit seed from the master seed and a canonical relative path."""
    digest = hashlib.sha256(f"{master_seed}:{source}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def canonical_sources(input_dir) -> list[str]:
    """Relative posix paths of all candidate images, sorted."""
    root = Path(input_dir)
    if not root.is_dir():
        raise ContractError(f"input directory does not exist: {input_dir}")
    rels = [
        p.relative_to(root).as_posix()
        for p in root.rglob("*")
        if p.is_file() and p.suffix.lower() in SOURCE_EXTENSIONS
    ]
    return sorted(rels)


def _artifact_rel(kind: str, source: str) -> str:
    return str(PurePosixPath(kind) / PurePosixPath(source).with_suffix(".png"))


def _save_artifact(out_root: str, rel: str, writer, *args) -> None:
    path = os.path.join(out_root, rel)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    writer(path, *args)


def _roundtrip8(image: np.ndarray) -> np.ndarray:
    return dequantize(quantize(image, 8))


def _process_one(config: PipelineConfig, source: str) -> DatasetRecord:
    seed = record_seed(config.master_seed, source)
    record = DatasetRecord(source=source, record_seed=seed, selected=False)
    try:
        img = load_image(os.path.join(config.input_dir, source))
        report = select(img, config.selection)
        record.selection = asdict(report)
        if not report.selected:
            return record
        rng = np.random.default_rng(seed)
        sim = sample_params(rng)
        noise = sample_noise_params(rng, config.noise)
        record.sim_params = asdict(sim)
        record.noise_params = asdict(noise)

        dark = _roundtrip8(darken(img, sim))
        noisy = _roundtrip8(synthesize_noise(dark, noise))
        record.dark = _artifact_rel("dark", source)
        record.noisy = _artifact_rel("noisy", source)
        _save_artifact(config.output_dir, record.dark, save_image, dark, 8)
        _save_artifact(config.output_dir, record.noisy, save_image, noisy, 8)

        if config.emit_maps:
            attention = ue_attention_map(img, dark)
            noise_plane = noise_map(noisy, dark)
            record.attention = _artifact_rel("attention", source)
            record.noise_map = _artifact_rel("noise_map", source)
            _save_artifact(config.output_dir, record.attention, save_map, attention)
            _save_artifact(config.output_dir, record.noise_map, save_map, noise_plane)

        if config.emit_high_contrast:
            high = amplify_contrast(img, config.fusion)
            record.high_contrast = _artifact_rel("high_contrast", source)
            _save_artifact(
                config.output_dir, record.high_contrast, save_image, _roundtrip8(high), 8
            )
        record.selected = True
    except Exception as exc:  # noqa: BLE001 - per-record isolation is the contract
        record.error = f"{type(exc).__name__}: {exc}"
        record.selected = False
    return record


def _summarize(records: list[DatasetRecord]) -> dict:
    total = len(records)
    errors = sum(1 for r in records if r.error)
    selected = sum(1 for r in records if r.selected)
    return {
        "total": total,
        "selected": selected,
        "rejected": total - selected - errors,
        "errors": errors,
    }


def build_dataset(config: PipelineConfig) -> dict:
    """Process every source image and write artifacts plus manifest.json.

    Failures are isolated per record; the run always completes and the
    affected record carries an error string instead of artifact paths.
    """
    sources = canonical_sources(config.input_dir)
    if not sources:
        raise ConfigurationError(f"no source images found under {config.input_dir}")
    os.makedirs(config.output_dir, exist_ok=True)
    worker = partial(_process_one, config)
    if config.workers > 1 and len(sources) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(worker, sources))
    else:
        records = [worker(s) for s in sources]
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "config": config.to_dict(),
        "records": [asdict(r) for r in records],
        "summary": _summarize(records),
    }
    manifest_path = os.path.join(config.output_dir, MANIFEST_NAME)
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def load_manifest(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def manifest_schema() -> dict:
    text = resources.files("lowlight_forge").joinpath("manifest.schema.json").read_text()
    return json.loads(text)


def _check_schema(manifest: dict, violations: list[str]) -> None:
    validator = jsonschema.Draft202012Validator(manifest_schema())
    for err in sorted(validator.iter_errors(manifest), key=str):
        violations.append(f"schema: {err.message} at /{'/'.join(str(p) for p in err.path)}")


def _reproduce_record(config: PipelineConfig, rec: dict, bright: np.ndarray) -> dict[str, np.ndarray]:
    """Recompute the full synthesis chain for one record."""
    rng = np.random.default_rng(record_seed(config.master_seed, rec["source"]))
    sim = sample_params(rng)
    noise = sample_noise_params(rng, config.noise)
    dark = _roundtrip8(darken(bright, sim))
    noisy = _roundtrip8(synthesize_noise(dark, noise))
    out = {"dark": dark, "noisy": noisy}
    if config.emit_maps:
        out["attention"] = ue_attention_map(bright, dark)
        out["noise_map"] = noise_map(noisy, dark)
    if config.emit_high_contrast:
        out["high_contrast"] = _roundtrip8(amplify_contrast(bright, config.fusion))
    return out


def verify_dataset(manifest_path) -> list[str]:
    """Audit a built dataset; returns human-readable violations (empty = clean).

    Checks schema validity, file closure in both directions, shape and range
    sanity of the artifacts, recomputation of the supervision maps within
    quantization tolerance, and an exact seed reproduction of every
    hundredth selected record. Artifact paths resolve relative to the
    manifest's directory.
    """
    manifest_path = os.path.abspath(os.fspath(manifest_path))
    out_root = os.path.dirname(manifest_path)
    violations: list[str] = []
    manifest = load_manifest(manifest_path)
    _check_schema(manifest, violations)
    if violations:
        return violations

    config = PipelineConfig.from_dict(manifest["config"])
    records = manifest["records"]

    summary = manifest["summary"]
    expected = {
        "total": len(records),
        "selected": sum(1 for r in records if r["selected"]),
        "errors": sum(1 for r in records if r.get("error")),
    }
    expected["rejected"] = expected["total"] - expected["selected"] - expected["errors"]
    for key, value in expected.items():
        if summary.get(key) != value:
            violations.append(f"summary: {key} is {summary.get(key)}, expected {value}")

    stem = os.path.splitext(os.path.basename(manifest_path))[0]
    referenced = {
        os.path.basename(manifest_path),
        f"{stem}.train.json",
        f"{stem}.test.json",
    }
    for rec in records:
        for kind in _OUTPUT_KINDS:
            rel = rec.get(kind)
            if rel:
                referenced.add(rel)
                if not os.path.exists(os.path.join(out_root, rel)):
                    violations.append(f"{rec['source']}: missing artifact {rel}")
    for dirpath, _, files in os.walk(out_root):
        for name in files:
            rel = PurePosixPath(
                os.path.relpath(os.path.join(dirpath, name), out_root).replace(os.sep, "/")
            )
            if str(rel) not in referenced:
                violations.append(f"unreferenced file in output tree: {rel}")

    selected_index = 0
    for rec in records:
        if not rec["selected"] or rec.get("error"):
            continue
        try:
            _verify_selected(config, rec, out_root, violations, selected_index)
        except Exception as exc:  # noqa: BLE001 - keep auditing the rest
            violations.append(f"{rec['source']}: verification failed ({exc})")
        selected_index += 1
    return violations


def _verify_selected(
    config: PipelineConfig, rec: dict, out_root: str, violations: list[str], index: int
) -> None:
    source_path = os.path.join(config.input_dir, rec["source"])
    if not os.path.exists(source_path):
        violations.append(f"{rec['source']}: source image missing, cannot recheck maps")
        return
    bright = load_image(source_path)
    dark = load_image(os.path.join(out_root, rec["dark"]))
    if dark.shape != bright.shape:
        violations.append(f"{rec['source']}: dark shape {dark.shape} != source {bright.shape}")
        return
    noisy = load_image(os.path.join(out_root, rec["noisy"]))
    if noisy.shape != bright.shape:
        violations.append(f"{rec['source']}: noisy shape {noisy.shape} != source {bright.shape}")
        return

    if config.emit_maps:
        stored_att = load_map(os.path.join(out_root, rec["attention"]))
        stored_nmap = load_map(os.path.join(out_root, rec["noise_map"]))
        if stored_att.shape != bright.shape[:2] or stored_nmap.shape != bright.shape[:2]:
            violations.append(f"{rec['source']}: map shape mismatch")
            return
        att_err = float(np.abs(ue_attention_map(bright, dark) - stored_att).max())
        if att_err > MAP_TOLERANCE:
            violations.append(
                f"{rec['source']}: attention map deviates by {att_err:.3g} "
                f"(tolerance {MAP_TOLERANCE:.3g})"
            )
        nmap_err = float(np.abs(noise_map(noisy, dark) - stored_nmap).max())
        if nmap_err > MAP_TOLERANCE:
            violations.append(
                f"{rec['source']}: noise map deviates by {nmap_err:.3g} "
                f"(tolerance {MAP_TOLERANCE:.3g})"
            )

    if index % _VERIFY_SAMPLE_EVERY == 0:
        redone = _reproduce_record(config, rec, bright)
        stored = {"dark": dark, "noisy": noisy}
        if config.emit_high_contrast:
            stored["high_contrast"] = load_image(os.path.join(out_root, rec["high_contrast"]))
        for kind, recomputed in redone.items():
            if kind in ("attention", "noise_map"):
                continue
            if not np.array_equal(quantize(recomputed, 8), quantize(stored[kind], 8)):
                violations.append(f"{rec['source']}: seed reproduction differs for {kind}")


def split_dataset(manifest: dict, test_fraction: float = 0.01, seed: int = 0) -> tuple[dict, dict]:
    """Deterministically partition a manifest into train and test manifests.

    Only selected records are eligible for the test side; rejected and errored
    records stay with the training manifest. Record order within each side
    follows the original manifest.
    """
    if not 0.0 <= test_fraction <= 1.0:
        raise ConfigurationError(f"test_fraction must lie in [0, 1], got {test_fraction}")
    records = manifest["records"]
    eligible = [i for i, r in enumerate(records) if r["selected"] and not r.get("error")]
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(eligible))
    n_test = int(round(len(eligible) * test_fraction))
    test_idx = {eligible[i] for i in order[:n_test]}

    def build_side(indices, role: str) -> dict:
        side_records = [copy.deepcopy(records[i]) for i in indices]
        side = {
            "schema_version": manifest["schema_version"],
            "config": copy.deepcopy(manifest["config"]),
            "records": side_records,
            "summary": _summarize(
                [DatasetRecord(**r) for r in side_records]
            ),
            "split": {"role": role, "test_fraction": test_fraction, "seed": seed},
        }
        return side

    train_indices = [i for i in range(len(records)) if i not in test_idx]
    test_indices = [i for i in range(len(records)) if i in test_idx]
    return build_side(train_indices, "train"), build_side(test_indices, "test")


def resolve_workers(config_workers: int, cli_workers: int | None = None) -> int:
    """Worker-count precedence: environment variable, then CLI flag, then config."""
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigurationError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
        if value < 1:
            raise ConfigurationError(f"{WORKERS_ENV} must be >= 1, got {value}")
        return value
    if cli_workers is not None:
        return cli_workers
    return config_workers

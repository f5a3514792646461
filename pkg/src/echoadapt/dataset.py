"""Deterministic splits, source-to-target pairing plans, and manifests.

Sample ids are relative file paths. Splitting sorts the corpus, applies a
seeded permutation, and partitions contiguously. Pairing supports two
modes: ``fixed`` (a stored assignment map, used where injected randomness
is unwanted, e.g. validation) and ``random_per_iteration``, where each
(source, iteration) pair draws its target from a counter-based RNG stream
keyed on (seed, iteration, source id) — reproducible without storing any
draw. Manifests persist splits, pairings, parameters, and content hashes
so a pipeline run can be replayed and verified byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, IntegrityError, ManifestError

__all__ = [
    "SplitSpec",
    "SplitResult",
    "split",
    "PairingPlan",
    "make_pairing",
    "resolve_pairing",
    "DatasetManifest",
    "write_manifest",
    "load_manifest",
    "hash_file",
    "hash_bytes",
]

PAIRING_MODES = ("random_per_iteration", "fixed")

_SEED_MASK = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class SplitSpec:
    """Partition sizes and the shuffle seed."""

    train: int
    val: int
    test: int
    seed: int = 0

    def __post_init__(self):
        for name in ("train", "val", "test"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"split count {name} must be >= 0, got {getattr(self, name)}")

    @property
    def total(self) -> int:
        return self.train + self.val + self.test


@dataclass(frozen=True)
class SplitResult:
    train: list[str]
    val: list[str]
    test: list[str]
    unassigned: list[str]

    def to_dict(self) -> dict:
        return {
            "train": list(self.train),
            "val": list(self.val),
            "test": list(self.test),
            "unassigned": list(self.unassigned),
        }


def split(corpus: Sequence[str], spec: SplitSpec) -> SplitResult:
    """Partition ``corpus`` into train/val/test plus leftovers.

    The corpus is sorted before the seeded shuffle, so the result depends
    only on its contents: same ids and seed, same partition.
    """
    ids = sorted(corpus)
    if spec.total > len(ids):
        raise ConfigurationError(
            f"split asks for {spec.total} ids but the corpus holds {len(ids)}"
        )
    order = np.random.default_rng(spec.seed & _SEED_MASK).permutation(len(ids))
    shuffled = [ids[int(i)] for i in order]
    a, b, c = spec.train, spec.train + spec.val, spec.total
    return SplitResult(
        train=shuffled[:a],
        val=shuffled[a:b],
        test=shuffled[b:c],
        unassigned=shuffled[c:],
    )


def _stream_key(source_id: str) -> int:
    digest = hashlib.sha256(source_id.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def _draw_target_index(seed: int, iteration: int, source_id: str, n_targets: int) -> int:
    bitgen = np.random.Philox(
        key=np.array([seed & _SEED_MASK, _stream_key(source_id)], dtype=np.uint64),
        counter=np.array([iteration & _SEED_MASK, 0, 0, 0], dtype=np.uint64),
    )
    return int(np.random.Generator(bitgen).integers(0, n_targets))


@dataclass(frozen=True)
class PairingPlan:
    """Source-to-target assignment policy.

    ``fixed`` plans carry the full assignment map and ignore the
    iteration; ``random_per_iteration`` plans re-draw per iteration from
    ``target_pool`` using the keyed RNG stream.
    """

    mode: str
    target_pool: list[str]
    seed: int = 0
    assignments: dict[str, str] | None = None

    def __post_init__(self):
        if self.mode not in PAIRING_MODES:
            raise ConfigurationError(f"pairing mode must be one of {PAIRING_MODES}, got {self.mode!r}")
        if not self.target_pool:
            raise ConfigurationError("pairing target pool is empty")
        if self.mode == "fixed":
            if self.assignments is None:
                raise ConfigurationError("fixed pairing requires stored assignments")
            pool = set(self.target_pool)
            for src, tgt in self.assignments.items():
                if tgt not in pool:
                    raise ManifestError(f"assignment {src!r} -> {tgt!r} points outside the target pool")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "target_pool": list(self.target_pool),
            "seed": self.seed,
            "assignments": dict(self.assignments) if self.assignments is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PairingPlan":
        return cls(
            mode=d["mode"],
            target_pool=list(d["target_pool"]),
            seed=int(d.get("seed", 0)),
            assignments=dict(d["assignments"]) if d.get("assignments") is not None else None,
        )


def resolve_pairing(plan: PairingPlan, sources: Sequence[str], iteration: int = 0) -> dict[str, str]:
    """Concrete source -> target map for one iteration under a plan."""
    if plan.mode == "fixed":
        missing = [s for s in sources if s not in plan.assignments]
        if missing:
            raise ManifestError(f"fixed pairing has no assignment for: {missing}")
        return {s: plan.assignments[s] for s in sources}
    pool = list(plan.target_pool)
    return {
        s: pool[_draw_target_index(plan.seed, iteration, s, len(pool))] for s in sources
    }


def make_pairing(
    sources: Sequence[str],
    targets: Sequence[str],
    mode: str,
    seed: int = 0,
    iteration: int = 0,
    assignments: dict[str, str] | None = None,
) -> dict[str, str]:
    """Build a plan over ``targets`` and resolve it for ``sources``."""
    plan = PairingPlan(mode=mode, target_pool=list(targets), seed=seed, assignments=assignments)
    return resolve_pairing(plan, sources, iteration)


def hash_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def hash_file(path: str | Path) -> str:
    """Lowercase hex SHA-256 of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass(frozen=True)
class DatasetManifest:
    """Replayable record of one pipeline step.

    ``files`` maps manifest-relative paths to SHA-256 hashes; loading
    verifies each referenced file. The remaining sections are optional and
    step-specific.
    """

    version: str
    files: dict[str, str] = field(default_factory=dict)
    split_spec: SplitSpec | None = None
    splits: SplitResult | None = None
    pairings: dict[str, PairingPlan] = field(default_factory=dict)
    fda: dict | None = None
    simulator: dict | None = None

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "files": dict(self.files),
            "split_spec": (
                {
                    "train": self.split_spec.train,
                    "val": self.split_spec.val,
                    "test": self.split_spec.test,
                    "seed": self.split_spec.seed,
                }
                if self.split_spec is not None
                else None
            ),
            "splits": self.splits.to_dict() if self.splits is not None else None,
            "pairings": {name: plan.to_dict() for name, plan in self.pairings.items()},
            "fda": self.fda,
            "simulator": self.simulator,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetManifest":
        split_spec = None
        if d.get("split_spec") is not None:
            s = d["split_spec"]
            split_spec = SplitSpec(
                train=int(s["train"]), val=int(s["val"]), test=int(s["test"]), seed=int(s["seed"])
            )
        splits = None
        if d.get("splits") is not None:
            s = d["splits"]
            splits = SplitResult(
                train=list(s["train"]),
                val=list(s["val"]),
                test=list(s["test"]),
                unassigned=list(s["unassigned"]),
            )
        return cls(
            version=d["version"],
            files=dict(d.get("files", {})),
            split_spec=split_spec,
            splits=splits,
            pairings={k: PairingPlan.from_dict(v) for k, v in d.get("pairings", {}).items()},
            fda=d.get("fda"),
            simulator=d.get("simulator"),
        )


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    """Serialize a manifest as UTF-8 JSON with stable key order."""
    Path(path).write_text(
        json.dumps(manifest.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_manifest(
    path: str | Path, base_dir: str | Path | None = None, verify: bool = True
) -> DatasetManifest:
    """Load a manifest and verify every referenced file's hash.

    File paths resolve against ``base_dir`` (default: the manifest's
    directory). A missing or altered file raises :class:`IntegrityError`.
    """
    path = Path(path)
    try:
        manifest = DatasetManifest.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot load manifest {path}: {exc}") from exc
    if verify:
        base = Path(base_dir) if base_dir is not None else path.parent
        for rel, expected in sorted(manifest.files.items()):
            target = base / rel
            if not target.is_file():
                raise IntegrityError(f"manifest references missing file: {target}")
            actual = hash_file(target)
            if actual != expected:
                raise IntegrityError(
                    f"hash mismatch for {target}: manifest records {expected}, file has {actual}"
                )
    return manifest

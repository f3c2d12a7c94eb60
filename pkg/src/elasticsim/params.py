"""Flat, seedable parameter vector spanning the encoder and the policy head.

Every trainable array has a fixed name, shape, and position, so
``flatten -> perturb -> unflatten`` round-trips exactly and two processes
built from the same (config, seed) agree bit-for-bit.  Matrices initialise
uniform in ±sqrt(1/fan_in); biases start at zero.

Files carry a one-line JSON header (shapes, model config, run seed) followed
by the raw little-endian float64 vector.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .gnn import EncoderParams, FeedForwardParams, GatLayerParams
from .hgraph import PM_FEATURES, VM_FEATURES, container_feature_count
from .policy import MlpParams, PolicyParams

_MAGIC = "elasticsim-params"


@dataclass(frozen=True)
class ModelConfig:
    """Network geometry and the ablation toggles that reshape it."""

    embed_dim: int = 64
    hidden_dim: int = 64
    scale_bound: int = 4
    ablate_pm: bool = False
    ablate_vm: bool = False
    ablate_zeta: bool = False

    def __post_init__(self) -> None:
        if self.embed_dim < 1 or self.hidden_dim < 1:
            raise ValueError("widths must be positive")
        if self.ablate_vm and not self.ablate_pm:
            raise ValueError("removing the VM layer implies removing the PM layer")

    @property
    def con_in_dim(self) -> int:
        raw = container_feature_count(self.ablate_zeta)
        return raw + (0 if self.ablate_vm else self.embed_dim)

    @property
    def vm_in_dim(self) -> int:
        return VM_FEATURES + (0 if self.ablate_pm else self.embed_dim)


def _array_specs(cfg: ModelConfig) -> list[tuple[str, tuple[int, ...], int]]:
    """(name, shape, fan_in) for every trainable array; fan_in 0 => zeros."""
    d, h = cfg.embed_dim, cfg.hidden_dim
    specs: list[tuple[str, tuple[int, ...], int]] = []
    if not cfg.ablate_pm:
        specs += [("pm.weight", (d, PM_FEATURES), PM_FEATURES), ("pm.attn", (2 * d,), 2 * d)]
    if not cfg.ablate_vm:
        vin = cfg.vm_in_dim
        specs += [
            ("vm.weight", (d, vin), vin),
            ("vm.attn", (2 * d,), 2 * d),
            ("vm_ff.w1", (h, d), d),
            ("vm_ff.b1", (h,), 0),
            ("vm_ff.w2", (d, h), h),
            ("vm_ff.b2", (d,), 0),
        ]
    cin = cfg.con_in_dim
    specs += [
        ("con1.weight", (d, cin), cin),
        ("con1.attn", (2 * d,), 2 * d),
        ("con2.weight", (d, d), d),
        ("con2.attn", (2 * d,), 2 * d),
        ("con_ff.w1", (h, d), d),
        ("con_ff.b1", (h,), 0),
        ("con_ff.w2", (d, h), h),
        ("con_ff.b2", (d,), 0),
        ("phi.w1", (h, d), d),
        ("phi.b1", (h,), 0),
        ("phi.w2", (1, h), h),
        ("phi.b2", (1,), 0),
        ("scale_ff.w", (d, d), d),
        ("scale_ff.b", (d,), 0),
        ("omega.w1", (h, d + 1), d + 1),
        ("omega.b1", (h,), 0),
        ("omega.w2", (1, h), h),
        ("omega.b2", (1,), 0),
    ]
    return specs


@dataclass
class ParamSet:
    config: ModelConfig
    arrays: dict[str, np.ndarray] = field(repr=False)

    @classmethod
    def initialize(cls, config: ModelConfig, seed: int) -> "ParamSet":
        rng = np.random.default_rng(seed)
        arrays: dict[str, np.ndarray] = {}
        for name, shape, fan_in in _array_specs(config):
            if fan_in > 0:
                bound = np.sqrt(1.0 / fan_in)
                arrays[name] = rng.uniform(-bound, bound, size=shape)
            else:
                arrays[name] = np.zeros(shape)
        return cls(config=config, arrays=arrays)

    @property
    def size(self) -> int:
        return sum(a.size for a in self.arrays.values())

    def vector(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays.values()])

    def with_vector(self, vec: np.ndarray) -> "ParamSet":
        """New ParamSet with the same shapes filled from a flat vector."""
        if vec.shape != (self.size,):
            raise ValueError(f"expected flat vector of length {self.size}, got {vec.shape}")
        arrays: dict[str, np.ndarray] = {}
        offset = 0
        for name, arr in self.arrays.items():
            arrays[name] = np.asarray(vec[offset:offset + arr.size], dtype=np.float64).reshape(arr.shape).copy()
            offset += arr.size
        return ParamSet(config=self.config, arrays=arrays)

    # -- structured views ----------------------------------------------------

    def encoder_params(self) -> EncoderParams:
        a = self.arrays
        pm = vm = vm_ff = None
        if not self.config.ablate_pm:
            pm = GatLayerParams(a["pm.weight"], a["pm.attn"])
        if not self.config.ablate_vm:
            vm = GatLayerParams(a["vm.weight"], a["vm.attn"])
            vm_ff = FeedForwardParams(a["vm_ff.w1"], a["vm_ff.b1"], a["vm_ff.w2"], a["vm_ff.b2"])
        return EncoderParams(
            pm=pm,
            vm=vm,
            vm_ff=vm_ff,
            con1=GatLayerParams(a["con1.weight"], a["con1.attn"]),
            con2=GatLayerParams(a["con2.weight"], a["con2.attn"]),
            con_ff=FeedForwardParams(a["con_ff.w1"], a["con_ff.b1"], a["con_ff.w2"], a["con_ff.b2"]),
        )

    def policy_params(self) -> PolicyParams:
        a = self.arrays
        return PolicyParams(
            phi=MlpParams(a["phi.w1"], a["phi.b1"], a["phi.w2"], a["phi.b2"]),
            scale_ff_w=a["scale_ff.w"],
            scale_ff_b=a["scale_ff.b"],
            omega=MlpParams(a["omega.w1"], a["omega.b1"], a["omega.w2"], a["omega.b2"]),
            scale_bound=self.config.scale_bound,
        )

    # -- persistence ---------------------------------------------------------

    def save(self, path: str | Path, seed: int | None = None) -> None:
        header = {
            "format": _MAGIC,
            "version": 1,
            "seed": seed,
            "config": asdict(self.config),
            "arrays": [[name, list(arr.shape)] for name, arr in self.arrays.items()],
            "dtype": "<f8",
        }
        with open(path, "wb") as fh:
            fh.write(json.dumps(header).encode("utf-8"))
            fh.write(b"\n")
            fh.write(np.ascontiguousarray(self.vector(), dtype="<f8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> tuple["ParamSet", int | None]:
        with open(path, "rb") as fh:
            header_line = fh.readline()
            payload = fh.read()
        header = json.loads(header_line.decode("utf-8"))
        if header.get("format") != _MAGIC:
            raise ValueError(f"{path}: not a parameter file")
        config = ModelConfig(**header["config"])
        base = cls.initialize(config, seed=0)
        stored = [(n, tuple(s)) for n, s in header["arrays"]]
        expected = [(n, a.shape) for n, a in base.arrays.items()]
        if stored != expected:
            raise ValueError(f"{path}: shape manifest does not match model config")
        vec = np.frombuffer(payload, dtype="<f8")
        return base.with_vector(vec), header.get("seed")

"""Run configuration: one structured JSON file with per-module sections.

Command-line flags override file values; file values override the defaults
below. Output files embed a hash of the resolved configuration so results
stay traceable to the card that produced them.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .device import BranchParams, VariationSpec
from .knn import KnnConfig
from .transient import CircuitParams

__all__ = ["RunConfig", "DEFAULT_CONFIG", "config_hash"]

DEFAULT_CONFIG: dict = {
    "seed": 7,
    "device": {
        "vth_low": 0.4,
        "vth_high": 1.8,
        "r_on": 50e3,
        "r_off": 10e9,
        "r_series": 0.3e6,
        "v_write": 4.0,
        "v_search": 1.0,
    },
    "variation": {
        "sigma_vth": 0.054,
        "rel_sigma_rs": 0.08,
    },
    "array": {
        "rows": 16,
        "wordlength": 64,
    },
    "circuit": {
        "vdd": 1.0,
        "c_cell": 0.15e-15,
        "c_wire": 2e-15,
        "c_o": 0.5e-15,
        "eval_k": 1e-3,
        "eval_vtn": 0.3,
        "sa_frac": 0.85,
        "window_scale": 1.4,
        "steps_per_window": 2400,
        "sense_window": None,
        "dt": None,
        "sa_threshold": None,
    },
    "search": {
        "threshold": 3,
        "guard_band": 0.05,
    },
    "energy": {
        "avg_mismatch_fraction": 0.5,
        "e_sa_const": 1e-15,
    },
    "knn": {
        "threshold_schedule": [1, 2, 3, 4, 5, 6],
        "escalation": "step_up",
        "tie_break": "lowest_class_id",
        "split_ratio": 0.8,
        "split_seed": 1234,
        "levels": None,
        "tie_seed": 0,
    },
}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in out:
            raise ValueError(f"unknown configuration key {key!r}")
        if isinstance(out[key], dict) and isinstance(value, dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def config_hash(resolved: dict) -> str:
    canon = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


@dataclass
class RunConfig:
    """Fully resolved configuration for one CLI invocation."""

    resolved: dict
    out_dir: Path = Path("out")
    threads: int = 1

    @classmethod
    def load(
        cls,
        path: str | Path | None = None,
        *,
        seed: int | None = None,
        out_dir: str | Path | None = None,
        threads: int | None = None,
    ) -> "RunConfig":
        file_cfg: dict = {}
        if path is not None:
            with open(path) as fh:
                file_cfg = json.load(fh)
        resolved = _merge(DEFAULT_CONFIG, file_cfg)
        if seed is not None:
            resolved["seed"] = int(seed)
        cfg = cls(
            resolved=resolved,
            out_dir=Path(out_dir) if out_dir is not None else Path("out"),
            threads=int(threads) if threads is not None else 1,
        )
        cfg.device  # validate eagerly so bad cards fail at load time
        cfg.variation
        cfg.knn
        return cfg

    @property
    def seed(self) -> int:
        return int(self.resolved["seed"])

    @property
    def device(self) -> BranchParams:
        return BranchParams(**self.resolved["device"])

    @property
    def variation(self) -> VariationSpec:
        var = dict(self.resolved["variation"])
        var.setdefault("seed", self.seed)
        return VariationSpec(**var)

    @property
    def rows(self) -> int:
        return int(self.resolved["array"]["rows"])

    @property
    def wordlength(self) -> int:
        return int(self.resolved["array"]["wordlength"])

    @property
    def vdd(self) -> float:
        return float(self.resolved["circuit"]["vdd"])

    @property
    def threshold(self) -> int:
        return int(self.resolved["search"]["threshold"])

    @property
    def guard_band(self) -> float:
        return float(self.resolved["search"]["guard_band"])

    @property
    def avg_mismatch_fraction(self) -> float:
        return float(self.resolved["energy"]["avg_mismatch_fraction"])

    @property
    def e_sa_const(self) -> float:
        return float(self.resolved["energy"]["e_sa_const"])

    @property
    def circuit_overrides(self) -> dict:
        over = {k: v for k, v in self.resolved["circuit"].items() if k != "vdd"}
        return {k: v for k, v in over.items() if v is not None}

    @property
    def knn(self) -> KnnConfig:
        raw = dict(self.resolved["knn"])
        raw["threshold_schedule"] = tuple(int(t) for t in raw["threshold_schedule"])
        return KnnConfig(**raw)

    def with_updates(self, updates: dict) -> "RunConfig":
        """New config with nested overrides applied (flags win over files)."""
        return RunConfig(
            resolved=_merge(self.resolved, updates),
            out_dir=self.out_dir,
            threads=self.threads,
        )

    def build_circuit(
        self, wordlength: int | None = None, vdd: float | None = None
    ) -> CircuitParams:
        return CircuitParams.for_array(
            wordlength if wordlength is not None else self.wordlength,
            vdd if vdd is not None else self.vdd,
            self.device,
            **self.circuit_overrides,
        )

    def hash(self) -> str:
        return config_hash(self.resolved)

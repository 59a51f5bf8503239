"""Resource caps and sweep configuration.

All enumeration loops in the package are guarded by explicit caps so that a
bad parameter choice fails fast instead of running for hours.  The defaults
keep every exhaustive loop in the CI tier under minutes on one core; the
extended tier raises them for documented offline runs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict


@dataclass(frozen=True)
class Caps:
    # largest q for which a full discrete-log table is built
    field_table_max_q: int = 1 << 26
    # brute-force evaluation budgets
    affine_enum_max: int = 1 << 34
    torus_enum_max: int = 1 << 30
    probe_enum_max: int = 1 << 23
    # override for the p-adic working precision (number of p-digits); 0 = auto
    precision_override: int = 0

    def with_tier(self, tier: str) -> "Caps":
        if tier == "extended":
            return Caps(
                field_table_max_q=self.field_table_max_q,
                affine_enum_max=self.affine_enum_max << 4,
                torus_enum_max=self.torus_enum_max << 4,
                probe_enum_max=self.probe_enum_max << 4,
                precision_override=self.precision_override,
            )
        return self


DEFAULT_CAPS = Caps()


@dataclass
class SweepConfig:
    """Grid description for the `sweep` command."""

    n_list: list = field(default_factory=lambda: [2, 3])
    prime_list: list = field(default_factory=lambda: [3, 5, 7])
    r_list: list = field(default_factory=lambda: [1])
    k_max: int = 2
    lambda_mode: str = "all"  # all | subfield | list
    lambda_list: list = field(default_factory=list)
    tier: str = "ci"  # ci | extended
    seed: int = 0
    out_dir: str = "sweep_out"
    threads: int = 1
    zeta_n_max: int = 2  # recover numerators only for n <= this in ci tier
    caps: Caps = field(default_factory=lambda: DEFAULT_CAPS)

    @classmethod
    def from_json(cls, path: str) -> "SweepConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        caps_raw = raw.pop("caps", None)
        cfg = cls(**raw)
        if caps_raw:
            cfg.caps = Caps(**caps_raw)
        return cfg

    def to_dict(self) -> dict:
        d = asdict(self)
        return d

"""Result record shared by every pricing method."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .mps import MPS


@dataclass
class PriceReport:
    """Price estimate plus the metadata needed to reproduce it.

    ``std_error`` is set by Monte Carlo only. ``mps`` carries the method's
    final matrix product state when one exists (for dumping); it is not
    part of the serialized document.
    """

    price: float
    method: str
    seed: Optional[int] = None
    bond_dim: Optional[int] = None
    n_samples: Optional[int] = None
    n_sweeps: Optional[int] = None
    wall_time_s: float = 0.0
    std_error: Optional[float] = None
    warnings: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    mps: Optional[MPS] = None

    def to_dict(self, omit_timing: bool = False) -> dict:
        """Plain-data view with a fixed key order; Nones and mps excluded."""
        doc: dict = {"price": self.price, "method": self.method}
        for key in ("bond_dim", "n_samples", "n_sweeps", "seed"):
            val = getattr(self, key)
            if val is not None:
                doc[key] = val
        doc["wall_time_s"] = 0.0 if omit_timing else self.wall_time_s
        if self.std_error is not None:
            doc["std_error"] = self.std_error
        doc["warnings"] = list(self.warnings)
        doc["diagnostics"] = dict(self.diagnostics)
        return doc

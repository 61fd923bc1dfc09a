"""Identity reports: one record per checked identity, serializable to JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class IdentityReport:
    """lhs compared against a sum of named rhs terms.

    residual is always lhs - sum(rhs) exactly as stored; the relative residual
    is normalized by max(1, |lhs|) so identities near zero stay meaningful.
    """

    label: str
    lhs: float
    rhs_terms: list[tuple[str, float]]
    metadata: dict = field(default_factory=dict)

    @property
    def rhs_total(self) -> float:
        return float(sum(v for _, v in self.rhs_terms))

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs_total

    @property
    def relative_residual(self) -> float:
        return abs(self.residual) / max(1.0, abs(self.lhs))

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "lhs": self.lhs,
            "rhs_terms": {name: value for name, value in self.rhs_terms},
            "residual": self.residual,
            "relative_residual": self.relative_residual,
            "metadata": self.metadata,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def __str__(self) -> str:
        rhs = " + ".join(f"{name}={value:.6g}" for name, value in self.rhs_terms)
        return (f"{self.label}: lhs={self.lhs:.6g} vs {rhs} "
                f"(residual {self.residual:.3e}, rel {self.relative_residual:.3e})")

"""Per-phase cost accounting over provider token usage.

Money is Decimal throughout; nothing is rounded until display, where amounts
quantize to 2 decimals with round-half-up.
"""

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Mapping

from ..core import Role

TWO_PLACES = Decimal("0.01")


def round_money(amount: Decimal) -> Decimal:
    return amount.quantize(TWO_PLACES, rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class UsageRecord:
    phase: Role
    input_tokens: int
    output_tokens: int
    provider: str

    def __post_init__(self):
        if self.input_tokens < 0 or self.output_tokens < 0:
            raise ValueError("token counts must be >= 0")

    def to_json(self) -> dict:
        return {
            "phase": self.phase.value,
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
            "provider": self.provider,
        }

    @classmethod
    def from_json(cls, data: dict) -> "UsageRecord":
        return cls(
            phase=Role(data["phase"]),
            input_tokens=int(data["input_tokens"]),
            output_tokens=int(data["output_tokens"]),
            provider=data["provider"],
        )


@dataclass(frozen=True)
class CostReport:
    per_phase: Mapping[Role, Decimal]
    total: Decimal

    def to_json(self) -> dict:
        return {
            "per_phase": {role.value: str(round_money(v)) for role, v in self.per_phase.items()},
            "total": str(round_money(self.total)),
        }


def accrue_cost(usages: Iterable[UsageRecord], registry) -> CostReport:
    """Sum token costs per phase at the registry's per-1k prices.

    Linear in tokens; the total is the exact sum of the unrounded phase
    amounts.
    """
    per_phase: dict[Role, Decimal] = {}
    for usage in usages:
        spec = registry.get(usage.provider)
        cost = (
            Decimal(usage.input_tokens) / 1000 * spec.price_per_1k_input
            + Decimal(usage.output_tokens) / 1000 * spec.price_per_1k_output
        )
        per_phase[usage.phase] = per_phase.get(usage.phase, Decimal("0")) + cost
    total = sum(per_phase.values(), Decimal("0"))
    return CostReport(per_phase=per_phase, total=total)


@dataclass(frozen=True)
class CostComparison:
    human_quote: Decimal
    ratio_vs_human: Decimal
    pct_vs_baseline: Decimal

    def to_json(self) -> dict:
        return {
            "human_quote": str(round_money(self.human_quote)),
            "ratio_vs_human": str(self.ratio_vs_human.quantize(Decimal("1"), rounding=ROUND_HALF_UP)),
            "pct_vs_baseline": str(self.pct_vs_baseline.quantize(TWO_PLACES, rounding=ROUND_HALF_UP)),
        }


def cost_comparisons(
    total: Decimal,
    word_count: int,
    human_rate: Decimal,
    baseline_total: Decimal,
) -> CostComparison:
    """Compare a run's cost against a human per-word quote and a baseline system."""
    if total <= 0 or word_count <= 0 or human_rate <= 0 or baseline_total <= 0:
        raise ValueError("all comparison inputs must be > 0")
    human_quote = Decimal(word_count) * human_rate
    ratio = human_quote / total
    pct = (baseline_total - total) / baseline_total * 100
    return CostComparison(human_quote=human_quote, ratio_vs_human=ratio, pct_vs_baseline=pct)

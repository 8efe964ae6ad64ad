"""Token settlement with strict conservation.

Consumers lock ``reward + gas`` when registering a job. Each successful slot
moves a reward share plus the destination gas fee to the processor, which pays
the gas on the destination side. Whatever is still locked when a job ends goes
back to the consumer. ``sum(balances) + sum(locked)`` never changes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping, Optional

from .errors import DuplicateLock, InsufficientBalance, InsufficientLocked, UnknownJob


@dataclass
class Locked:
    reward: int
    gas: int

    @property
    def total(self) -> int:
        return self.reward + self.gas


class Ledger:
    def __init__(self, balances: Optional[Mapping[str, int]] = None):
        self.balances: Dict[str, int] = {}
        for who, amount in (balances or {}).items():
            if not isinstance(amount, int) or amount < 0:
                raise ValueError(f"initial balance for {who!r} must be a non-negative integer")
            self.balances[who] = amount
        self.locked: Dict[int, Locked] = {}
        self.total_supply = sum(self.balances.values())

    def balance(self, who: str) -> int:
        return self.balances.get(who, 0)

    def lock(self, consumer: str, job_id: int, reward: int, gas: int) -> None:
        if reward < 0 or gas < 0:
            raise ValueError("lock amounts must be non-negative")
        if job_id in self.locked:
            raise DuplicateLock(f"job {job_id} already has locked funds")
        if self.balance(consumer) < reward + gas:
            raise InsufficientBalance(
                f"{consumer} holds {self.balance(consumer)}, needs {reward + gas}"
            )
        self.balances[consumer] = self.balance(consumer) - reward - gas
        self.locked[job_id] = Locked(reward, gas)

    def pay_slot(self, job_id: int, processor: str, reward_share: int, gas_fee: int) -> None:
        if reward_share < 0 or gas_fee < 0:
            raise ValueError("payout amounts must be non-negative")
        entry = self.locked.get(job_id)
        if entry is None:
            raise UnknownJob(f"no locked funds for job {job_id}")
        if entry.reward < reward_share or entry.gas < gas_fee:
            raise InsufficientLocked(
                f"job {job_id} has ({entry.reward}, {entry.gas}) locked, "
                f"asked for ({reward_share}, {gas_fee})"
            )
        entry.reward -= reward_share
        entry.gas -= gas_fee
        self.balances[processor] = self.balance(processor) + reward_share + gas_fee

    def refund(self, job_id: int, consumer: str) -> int:
        entry = self.locked.pop(job_id, None)
        if entry is None:
            raise UnknownJob(f"no locked funds for job {job_id}")
        self.balances[consumer] = self.balance(consumer) + entry.total
        return entry.total

    def audit(self) -> Optional[str]:
        """Return ``None`` when the books balance, else a description of the problem."""
        negative = sorted(k for k, v in self.balances.items() if v < 0)
        if negative:
            return f"negative balance for {', '.join(negative)}"
        bad_locks = sorted(k for k, v in self.locked.items() if v.reward < 0 or v.gas < 0)
        if bad_locks:
            return f"negative locked amount for job(s) {bad_locks}"
        held = sum(self.balances.values()) + sum(v.total for v in self.locked.values())
        if held != self.total_supply:
            return f"conservation broken: holdings {held} != supply {self.total_supply}"
        return None

    def to_dict(self) -> dict:
        return {
            "total_supply": self.total_supply,
            "balances": dict(sorted(self.balances.items())),
            "locked": {str(k): [v.reward, v.gas] for k, v in sorted(self.locked.items())},
        }
